#include "fedq/dconnection.hpp"

#include <cmath>

namespace fedq {

namespace {

Jet zero(const GeometryData& geo) { return Jet(geo.chart); }

}  // namespace

DConnectionData normal_dconnection(const GeometryData& geo) {
    const ChartPtr& ch = geo.chart;
    const int n = geo.n, d = 2 * n;
    DConnectionData c;
    c.n = n;
    c.Lh = JetTensor(ch, {n, n, n});
    c.Lv = JetTensor(ch, {n, n, n});
    c.Ch = JetTensor(ch, {n, n, n});
    c.Cv = JetTensor(ch, {n, n, n});

    // e_k g_ij and d_c g_ij tables
    JetTensor egh(ch, {n, n, n}), dgh(ch, {n, n, n}), dgv(ch, {n, n, n}), egv(ch, {n, n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                egh(i, j, k) = geo.frame_derivative(geo.gh(i, j), k);
                dgh(i, j, k) = partial(geo.gh(i, j), n + k);
                egv(i, j, k) = geo.frame_derivative(geo.gv(i, j), k);
                dgv(i, j, k) = partial(geo.gv(i, j), n + k);
            }
    JetTensor dN(ch, {n, n, n});  // dN(a, k, b) = d_b N^a_k
    for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k)
            for (int b = 0; b < n; ++b) dN(a, k, b) = partial(geo.N(a, k), n + b);

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Jet l = zero(geo), cc = zero(geo), lv = zero(geo), cv = zero(geo);
                for (int h = 0; h < n; ++h) {
                    Jet s = egh(j, h, k) + egh(h, k, j) - egh(j, k, h);
                    l.fma(geo.gh_inv(i, h), s, 0.5);
                    cc.fma(geo.gh_inv(i, h), dgh(j, h, k), 0.5);
                    Jet sv = dgv(j, h, k) + dgv(h, k, j) - dgv(j, k, h);
                    cv.fma(geo.gv_inv(i, h), sv, 0.5);
                    // L^a_{bk} with a=i, b=j
                    Jet t = egv(j, h, k);
                    for (int e = 0; e < n; ++e) {
                        if (!dN(e, k, j).is_zero()) t.fma(geo.gv(e, h), dN(e, k, j), -1.0);
                        if (!dN(e, k, h).is_zero()) t.fma(geo.gv(e, j), dN(e, k, h), -1.0);
                    }
                    lv.fma(geo.gv_inv(i, h), t, 0.5);
                }
                lv += dN(i, k, j);
                c.Lh(i, j, k) = l;
                c.Ch(i, j, k) = cc;
                c.Lv(i, j, k) = lv;
                c.Cv(i, j, k) = cv;
            }

    c.Gamma = JetTensor(ch, {d, d, d});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                c.Gamma(i, j, k) = c.Lh(i, j, k);
                c.Gamma(n + i, n + j, k) = c.Lv(i, j, k);
                c.Gamma(i, j, n + k) = c.Ch(i, j, k);
                c.Gamma(n + i, n + j, n + k) = c.Cv(i, j, k);
            }
    return c;
}

void normal_coefficients(const GeometryData& geo, JetTensor& Lh, JetTensor& Ch) {
    const int n = geo.n;
    Lh = JetTensor(geo.chart, {n, n, n});
    Ch = JetTensor(geo.chart, {n, n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int h = 0; h < n; ++h) {
                    Jet s = geo.frame_derivative(geo.gh(j, h), k) + geo.frame_derivative(geo.gh(h, k), j) -
                            geo.frame_derivative(geo.gh(j, k), h);
                    Lh(i, j, k).fma(geo.gh_inv(i, h), s, 0.5);
                    Jet t = partial(geo.gh(j, h), geo.n + k) + partial(geo.gh(h, k), geo.n + j) -
                            partial(geo.gh(j, k), geo.n + h);
                    Ch(i, j, k).fma(geo.gh_inv(i, h), t, 0.5);
                }
}

void compute_torsion(DConnectionData& c, const GeometryData& geo) {
    const int d = 2 * geo.n;
    c.T = JetTensor(geo.chart, {d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) c.T(a, b, g) = c.Gamma(a, b, g) - c.Gamma(a, g, b) - geo.W(a, g, b);
}

void compute_curvature(DConnectionData& c, const GeometryData& geo, double tol) {
    const ChartPtr& ch = geo.chart;
    const int n = geo.n, d = 2 * n;
    JetTensor eG(ch, {d, d, d, d});  // eG(a, b, g, x) = e_x Gamma(a, b, g)
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) {
                const Jet& G = c.Gamma(a, b, g);
                if (G.is_zero()) {
                    for (int x = 0; x < d; ++x) eG(a, b, g, x) = partial(G, 0);
                    continue;
                }
                for (int x = 0; x < d; ++x) eG(a, b, g, x) = geo.frame_derivative(G, x);
            }
    c.R = JetTensor(ch, {d, d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g)
                for (int e = g + 1; e < d; ++e) {
                    Jet r = eG(a, b, g, e) - eG(a, b, e, g);
                    for (int m = 0; m < d; ++m) {
                        if (!c.Gamma(m, b, g).is_zero() && !c.Gamma(a, m, e).is_zero())
                            r.fma(c.Gamma(m, b, g), c.Gamma(a, m, e));
                        if (!c.Gamma(m, b, e).is_zero() && !c.Gamma(a, m, g).is_zero())
                            r.fma(c.Gamma(m, b, e), c.Gamma(a, m, g), -1.0);
                        if (!geo.W(m, e, g).is_zero() && !c.Gamma(a, b, m).is_zero())
                            r.fma(geo.W(m, e, g), c.Gamma(a, b, m), -1.0);
                    }
                    c.R(a, b, g, e) = r;
                    c.R(a, b, e, g) = -r;
                }

    // coefficient formulas
    c.Rh = JetTensor(ch, {n, n, n, n});
    c.P = JetTensor(ch, {n, n, n, n});
    c.S = JetTensor(ch, {n, n, n, n});
    for (int i = 0; i < n; ++i)
        for (int h = 0; h < n; ++h)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Jet r = geo.frame_derivative(c.Lh(i, h, j), k) - geo.frame_derivative(c.Lh(i, h, k), j);
                    for (int m = 0; m < n; ++m) {
                        r.fma(c.Lh(m, h, j), c.Lh(i, m, k));
                        r.fma(c.Lh(m, h, k), c.Lh(i, m, j), -1.0);
                    }
                    for (int a = 0; a < n; ++a) r.fma(c.Ch(i, h, a), geo.Omega(a, k, j), -1.0);
                    c.Rh(i, h, j, k) = r;

                    // P^i_{hja} with a = k; D_j C^i_{ha} plus the torsion term C^i_{hb} T^b_{ja}
                    const int a = k;
                    Jet p = partial(c.Lh(i, h, j), n + a);
                    Jet dc = geo.frame_derivative(c.Ch(i, h, a), j);
                    for (int m = 0; m < n; ++m) {
                        dc.fma(c.Lh(i, m, j), c.Ch(m, h, a));
                        dc.fma(c.Lh(m, h, j), c.Ch(i, m, a), -1.0);
                        dc.fma(c.Lv(m, a, j), c.Ch(i, h, m), -1.0);
                    }
                    p -= dc;
                    for (int b = 0; b < n; ++b) {
                        // T^b_{ja} = T(n+b, j, n+a)
                        Jet tb = partial(geo.N(b, j), n + a) - c.Lv(b, a, j);
                        p.fma(c.Ch(i, h, b), tb);
                    }
                    c.P(i, h, j, a) = p;

                    // S^a_{bcd} with a=i, b=h, c=j, d=k
                    Jet s = partial(c.Cv(i, h, j), n + k) - partial(c.Cv(i, h, k), n + j);
                    for (int e = 0; e < n; ++e) {
                        s.fma(c.Cv(e, h, j), c.Cv(i, e, k));
                        s.fma(c.Cv(e, h, k), c.Cv(i, e, j), -1.0);
                    }
                    c.S(i, h, j, k) = s;
                }

    double mismatch = 0, scale = 1.0;
    int rel = ch->order();
    for (int i = 0; i < n; ++i)
        for (int h = 0; h < n; ++h)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    mismatch = std::max(mismatch, jet_distance(c.Rh(i, h, j, k), c.R(i, h, j, k)));
                    mismatch = std::max(mismatch, jet_distance(c.P(i, h, j, k), c.R(i, h, j, n + k)));
                    mismatch = std::max(mismatch, jet_distance(c.S(i, h, j, k), c.R(n + i, n + h, n + j, n + k)));
                    scale = std::max({scale, c.R(i, h, j, k).norm(), c.R(i, h, j, n + k).norm()});
                    rel = std::min(rel, c.R(i, h, j, k).reliable());
                }
    if (rel < 0) throw InsufficientOrder("jet order too low for curvature");
    c.curvature_mismatch = mismatch / scale;
    if (c.curvature_mismatch > tol)
        throw Error("curvature coefficient formulas disagree with operator composition: " +
                    std::to_string(c.curvature_mismatch));
}

void compute_ricci(DConnectionData& c, const GeometryData& geo, bool alternate) {
    const int n = geo.n, d = 2 * n;
    c.Ricci = JetTensor(geo.chart, {d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet s(geo.chart);
            for (int t = 0; t < d; ++t) s += alternate ? c.R(t, b, a, t) : c.R(t, a, b, t);
            c.Ricci(a, b) = s;
        }
    c.scalar_h = Jet(geo.chart);
    c.scalar_v = Jet(geo.chart);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            c.scalar_h.fma(geo.gh_inv(i, j), c.Ricci(i, j));
            c.scalar_v.fma(geo.gv_inv(i, j), c.Ricci(n + i, n + j));
        }
    c.scalar = c.scalar_h + c.scalar_v;
}

DConnectionData full_dconnection(const GeometryData& geo) {
    DConnectionData c = normal_dconnection(geo);
    compute_torsion(c, geo);
    compute_curvature(c, geo);
    compute_ricci(c, geo);
    return c;
}

JetTensor covariant_derivative2(const DConnectionData& c, const GeometryData& geo, const JetTensor& t) {
    const int d = 2 * geo.n;
    JetTensor out(geo.chart, {d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) {
                Jet s = geo.frame_derivative(t(a, b), g);
                for (int m = 0; m < d; ++m) {
                    if (!c.Gamma(m, a, g).is_zero()) s.fma(c.Gamma(m, a, g), t(m, b), -1.0);
                    if (!c.Gamma(m, b, g).is_zero()) s.fma(c.Gamma(m, b, g), t(a, m), -1.0);
                }
                out(a, b, g) = s;
            }
    return out;
}

JetTensor levi_civita_koszul(const GeometryData& geo) {
    const int d = 2 * geo.n;
    const ChartPtr& ch = geo.chart;
    JetTensor eg(ch, {d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) eg(a, b, g) = geo.frame_derivative(geo.g(a, b), g);
    // lowered: K(m, b, g) = g(D_{e_g} e_b, e_m)
    JetTensor K(ch, {d, d, d});
    for (int m = 0; m < d; ++m)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g) {
                Jet s = eg(b, m, g) + eg(g, m, b) - eg(g, b, m);
                for (int v = 0; v < d; ++v) {
                    if (!geo.W(v, g, b).is_zero()) s.fma(geo.W(v, g, b), geo.g(v, m));
                    if (!geo.W(v, g, m).is_zero()) s.fma(geo.W(v, g, m), geo.g(v, b), -1.0);
                    if (!geo.W(v, b, m).is_zero()) s.fma(geo.W(v, b, m), geo.g(v, g), -1.0);
                }
                K(m, b, g) = s * 0.5;
            }
    JetTensor LC(ch, {d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int g = 0; g < d; ++g)
                for (int m = 0; m < d; ++m)
                    if (!geo.g_inv(a, m).is_zero()) LC(a, b, g).fma(geo.g_inv(a, m), K(m, b, g));
    return LC;
}

JetTensor levi_civita_coordinate(const GeometryData& geo) {
    const int d = 2 * geo.n;
    const ChartPtr& ch = geo.chart;
    JetTensor gi = invert_matrix(geo.g_coord);
    JetTensor dg(ch, {d, d, d});  // dg(a, b, c) = d_c g_ab
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) dg(a, b, c) = partial(geo.g_coord(a, b), c);
    JetTensor Gc(ch, {d, d, d});  // D_{d_r} d_v = Gc(m, v, r) d_m
    for (int m = 0; m < d; ++m)
        for (int v = 0; v < d; ++v)
            for (int r = 0; r < d; ++r)
                for (int s = 0; s < d; ++s) {
                    Jet t = dg(s, v, r) + dg(s, r, v) - dg(v, r, s);
                    Gc(m, v, r).fma(gi(m, s), t, 0.5);
                }
    JetTensor LC(ch, {d, d, d});
    for (int b = 0; b < d; ++b)
        for (int g = 0; g < d; ++g) {
            // coordinate components of D_{e_g} e_b
            std::vector<Jet> comp(d, Jet(ch));
            for (int m = 0; m < d; ++m) {
                Jet s = geo.frame_derivative(geo.E_inv(m, b), g);
                for (int v = 0; v < d; ++v) {
                    if (geo.E_inv(v, b).is_zero()) continue;
                    for (int r = 0; r < d; ++r) {
                        if (geo.E_inv(r, g).is_zero()) continue;
                        s.fma(geo.E_inv(v, b) * geo.E_inv(r, g), Gc(m, v, r));
                    }
                }
                comp[m] = s;
            }
            for (int a = 0; a < d; ++a)
                for (int m = 0; m < d; ++m)
                    if (!geo.E(a, m).is_zero()) LC(a, b, g).fma(geo.E(a, m), comp[m]);
        }
    return LC;
}

JetTensor distortion(const DConnectionData& c, const GeometryData& geo) {
    const int n = geo.n, d = 2 * n;
    const ChartPtr& ch = geo.chart;
    JetTensor Z(ch, {d, d, d});
    auto delta = [](int x, int y) { return x == y ? 1.0 : 0.0; };
    // helper tensors
    JetTensor Xi(ch, {n, n, n, n});  // Xi^{ih}_{jk} = 1/2 (d^i_j d^h_k - g_jk g^{ih})
    JetTensor Xp(ch, {n, n, n, n}), Xm(ch, {n, n, n, n});  // +-Xi^{ab}_{cd} = 1/2 (d^a_c d^b_d +- g_cd g^{ab})
    for (int i = 0; i < n; ++i)
        for (int h = 0; h < n; ++h)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Jet dd = Jet::constant(ch, 0.5 * delta(i, j) * delta(h, k));
                    Xi(i, h, j, k) = dd - geo.gh(j, k) * geo.gh_inv(i, h) * 0.5;
                    Jet gg = geo.gv(j, k) * geo.gv_inv(i, h) * 0.5;
                    Xp(i, h, j, k) = dd + gg;
                    Xm(i, h, j, k) = dd - gg;
                }
    auto Tv = [&](int cc, int dd, int k) -> const Jet& { return c.T(n + cc, n + dd, k); };

    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                // Z^a_{jk}
                Jet z = geo.Omega(a, j, k) * -0.5;
                for (int i = 0; i < n; ++i)
                    for (int b = 0; b < n; ++b) z.fma(c.Ch(i, j, b), geo.gh(i, k) * geo.gv_inv(a, b), -1.0);
                Z(n + a, j, k) = z;
            }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int b = 0; b < n; ++b) {
                // Z^i_{kb}: D_{e_b} e_k
                Jet z(ch);
                for (int cc = 0; cc < n; ++cc)
                    for (int j = 0; j < n; ++j)
                        z.fma(geo.Omega(cc, j, k), geo.gv(cc, b) * geo.gh_inv(j, i), 0.5);
                for (int j = 0; j < n; ++j)
                    for (int h = 0; h < n; ++h) z.fma(Xi(i, h, j, k), c.Ch(j, h, b));
                Z(i, k, n + b) = z;
                Z(i, n + b, k) = z + c.Ch(i, k, b);
            }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k) {
                Jet zp(ch), zm(ch);
                for (int cc = 0; cc < n; ++cc)
                    for (int dd = 0; dd < n; ++dd) {
                        zp.fma(Xp(a, dd, cc, b), Tv(cc, dd, k));
                        zm.fma(Xm(a, dd, cc, b), Tv(cc, dd, k), -1.0);
                    }
                Z(n + a, k, n + b) = zp;
                Z(n + a, n + b, k) = zm;
            }
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Jet z(ch);
                for (int j = 0; j < n; ++j)
                    for (int cc = 0; cc < n; ++cc) {
                        z.fma(geo.gh_inv(i, j), Tv(cc, a, j) * geo.gv(cc, b), -0.5);
                        z.fma(geo.gh_inv(i, j), Tv(cc, b, j) * geo.gv(cc, a), -0.5);
                    }
                Z(i, n + a, n + b) = z;
            }
    return Z;
}

EinsteinResidual einstein_residual(const DConnectionData& c, const GeometryData& geo, double lh, double lv) {
    const int n = geo.n, d = 2 * n;
    EinsteinResidual r;
    r.ricci_mixed = JetTensor(geo.chart, {d, d});
    r.einstein_mixed = JetTensor(geo.chart, {d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int m = 0; m < d; ++m)
                if (!geo.g_inv(a, m).is_zero()) r.ricci_mixed(a, b).fma(geo.g_inv(a, m), c.Ricci(m, b));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            r.einstein_mixed(a, b) = r.ricci_mixed(a, b);
            if (a == b) r.einstein_mixed(a, b).axpy(-0.5, c.scalar);
            double src_r = 0, src_e = 0;
            if (a == b) {
                src_r = a < n ? -lh : -lv;
                src_e = a < n ? lv : lh;
            }
            r.ricci_residual = std::max(r.ricci_residual, std::abs(r.ricci_mixed(a, b).value() - src_r));
            r.einstein_residual = std::max(r.einstein_residual, std::abs(r.einstein_mixed(a, b).value() - src_e));
        }
    return r;
}

}  // namespace fedq
