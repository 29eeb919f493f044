#include "fedq/fedosov.hpp"

#include <algorithm>
#include <cmath>

namespace fedq {

namespace {

const cplx kI(0.0, 1.0);

std::uint64_t zshift(std::uint64_t key, int alpha, int d) {
    return std::uint64_t(std::int64_t(key) + std::int64_t(d) * (std::int64_t(1) << (12 + 8 * alpha)));
}

int zexp(std::uint64_t key, int alpha) { return int((key >> (12 + 8 * alpha)) & 0xFF); }

std::uint64_t with_form(std::uint64_t key, unsigned A) { return (key & ~std::uint64_t(0x3F)) | A; }

WeylForm recap(const WeylForm& a, const WeylCaps& caps) {
    WeylForm out(a.chart(), caps);
    for (auto& [k, c] : a.terms()) out.add_key(k, c);
    out.note_overflow(a.overflow());
    return out;
}

WeylForm up_to_degree(const WeylForm& a, int D) {
    return a.filter([D](std::uint64_t k) { return wkey::total(k) <= D; });
}

WeylForm theta_form(const GeometryData& geo, const WeylCaps& caps) {
    WeylForm out(geo.chart, caps);
    const int d = 2 * geo.n;
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (!geo.theta(a, b).is_zero()) out.add(0, Mono{}, (1u << a) | (1u << b), geo.theta(a, b));
    return out;
}

// shared body of dhat_weyl and exterior_d
WeylForm covariant_d(const WeylForm& a, const GeometryData& geo, const DConnectionData* conn) {
    WeylForm out(a.chart(), a.caps());
    const int d = 2 * geo.n;
    for (auto& [key, c] : a.terms()) {
        unsigned A = wkey::form(key);
        for (int g = 0; g < d; ++g) {
            int s = wedge_sign(1u << g, A);
            if (s == 0) continue;
            Jet dc = geo.frame_derivative(c, g);
            if (!dc.is_zero()) out.add_key(key | (1u << g), dc, double(s));
        }
        if (conn) {
            for (int al = 0; al < d; ++al) {
                int e = zexp(key, al);
                if (e == 0) continue;
                std::uint64_t lowered = zshift(key, al, -1);
                for (int b = 0; b < d; ++b) {
                    std::uint64_t k2 = zshift(lowered, b, +1);
                    for (int g = 0; g < d; ++g) {
                        const Jet& G = conn->Gamma(al, b, g);
                        if (G.is_zero()) continue;
                        int s = wedge_sign(1u << g, A);
                        if (s == 0) continue;
                        out.add_key(k2 | (1u << g), Jet::multiply(G, c), -double(s * e));
                    }
                }
            }
        }
        // d e^A with d e^a = -sum_{b<c} W^a_{bc} e^b ^ e^c
        int j = 0;
        for (unsigned rest = A; rest; rest &= rest - 1, ++j) {
            int al = __builtin_ctz(rest);
            unsigned P = A & ((1u << al) - 1), S = A & ~((2u << al) - 1);
            for (int b = 0; b < d; ++b)
                for (int g = b + 1; g < d; ++g) {
                    const Jet& W = geo.W(al, b, g);
                    if (W.is_zero()) continue;
                    unsigned B2 = (1u << b) | (1u << g);
                    int s1 = wedge_sign(P, B2);
                    if (s1 == 0) continue;
                    int s2 = wedge_sign(P | B2, S);
                    if (s2 == 0) continue;
                    double sgn = ((j & 1) ? 1.0 : -1.0) * s1 * s2;
                    out.add_key(with_form(key, P | B2 | S), Jet::multiply(W, c), sgn);
                }
        }
    }
    return out;
}

void check_overflow(const WeylForm& w, const char* where) {
    if (w.overflow() > 0)
        throw CapOverflow(std::string("Weyl cap overflow in ") + where + "; raise s_max / v_max (at least K_max + 2)");
}

}  // namespace

Kernel fedosov_kernel(const GeometryData& geo, bool moyal) {
    if (geo.theta_inv.empty()) throw Error("the Fedosov kernel needs an almost Kaehler geometry");
    const int d = 2 * geo.n;
    std::vector<Jet> k(d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            k[a * d + b] = geo.theta_inv(a, b);
            if (!moyal) k[a * d + b].axpy(-kI, geo.g_inv(a, b));
        }
    return Kernel(geo.chart, std::move(k));
}

TorsionCurvatureLift lift_torsion_curvature(const DConnectionData& conn, const GeometryData& geo,
                                            const WeylCaps& caps) {
    TorsionCurvatureLift out{WeylForm(geo.chart, caps), WeylForm(geo.chart, caps)};
    const int d = 2 * geo.n;
    for (int m = 0; m < d; ++m)
        for (int a = 0; a < d; ++a) {
            const Jet& th = geo.theta(m, a);
            if (th.is_zero()) continue;
            Mono zm{};
            zm[m] = 1;
            for (int b = 0; b < d; ++b)
                for (int g = b + 1; g < d; ++g) {
                    // T^a(e_b, e_g) = -T(a, b, g)
                    const Jet& t = conn.T(a, b, g);
                    if (!t.is_zero()) out.T_W.add(0, zm, (1u << b) | (1u << g), Jet::multiply(th, t), -1.0);
                }
            for (int nu = 0; nu < d; ++nu) {
                Mono z2 = zm;
                ++z2[nu];
                for (int b = 0; b < d; ++b)
                    for (int g = b + 1; g < d; ++g) {
                        // R^a_nu(e_b, e_g) = R(a, nu, g, b)
                        const Jet& r = conn.R(a, nu, g, b);
                        if (!r.is_zero()) out.R_W.add(0, z2, (1u << b) | (1u << g), Jet::multiply(th, r), 0.5);
                    }
            }
        }
    check_overflow(out.T_W, "lift_torsion_curvature");
    check_overflow(out.R_W, "lift_torsion_curvature");
    return out;
}

WeylForm dhat_weyl(const WeylForm& a, const DConnectionData& conn, const GeometryData& geo) {
    return covariant_d(a, geo, &conn);
}

WeylForm exterior_d(const WeylForm& a, const GeometryData& geo) {
    for (auto& [k, c] : a.terms())
        if (wkey::zdeg(k) != 0) throw Error("exterior_d expects a z-independent form");
    return covariant_d(a, geo, nullptr);
}

WeylForm i_over_v(const WeylForm& x) {
    WeylForm out(x.chart(), x.caps());
    for (auto& [k, c] : x.terms()) {
        if (wkey::vpow(k) == 0) {
            if (c.is_zero()) continue;
            throw Error("division by v of a term without v");
        }
        out.add_key(k - (std::uint64_t(1) << 6), c, kI);
    }
    return out;
}

WeylForm v_shift(const WeylForm& x, int k) {
    WeylForm out(x.chart(), x.caps());
    for (auto& [key, c] : x.terms()) {
        int p = wkey::vpow(key) + k;
        if (p < 0) throw Error("negative power of v");
        out.add(p, wkey::zeta(key), wkey::form(key), c);
    }
    out.note_overflow(x.overflow());
    return out;
}

FedosovState fedosov_recursion(const GeometryData& geo, const DConnectionData& conn, const FedosovOptions& opt) {
    return fedosov_recursion(std::make_shared<const GeometryData>(geo), std::make_shared<const DConnectionData>(conn),
                             opt);
}

FedosovState fedosov_recursion(std::shared_ptr<const GeometryData> geo, std::shared_ptr<const DConnectionData> conn,
                               const FedosovOptions& opt) {
    if (opt.K_max < 3) throw Error("K_max must be at least 3");
    FedosovState s;
    s.geo = std::move(geo);
    s.conn = std::move(conn);
    s.opt = opt;
    const int K = opt.K_max;
    s.caps.v_max = opt.v_max > 0 ? opt.v_max : K / 2 + 4;
    s.caps.s_max = opt.s_max > 0 ? opt.s_max : K + 6;
    s.caps.deg_max = 1 << 20;
    s.kernel = fedosov_kernel(*s.geo, opt.moyal);
    const GeometryData& g = *s.geo;
    const int d = 2 * g.n;

    s.gamma0 = WeylForm(g.chart, s.caps);
    for (int m = 0; m < d; ++m)
        for (int b = 0; b < d; ++b)
            if (!g.theta(m, b).is_zero()) {
                Mono zm{};
                zm[m] = 1;
                s.gamma0.add(0, zm, 1u << b, g.theta(m, b));
            }
    auto lift = lift_torsion_curvature(*s.conn, g, s.caps);
    s.T_W = std::move(lift.T_W);
    s.R_W = std::move(lift.R_W);

    s.r_by_degree.assign(K + 1, WeylForm(g.chart, s.caps));
    for (int D = 1; D < K; ++D) {
        WeylForm X = s.T_W.total_degree(D) + s.R_W.total_degree(D);
        if (D >= 2) X += dhat_weyl(s.r_by_degree[D], *s.conn, g);
        for (int l = 2; l <= D; ++l) {
            int m = D + 2 - l;
            if (m < 2) continue;
            X -= i_over_v(wick_product(s.r_by_degree[l], s.r_by_degree[m], s.kernel, 1));
        }
        check_overflow(X, "fedosov_recursion");
        X = X.total_degree(D);
        WeylForm r = delta_inv(X);
        check_overflow(r, "fedosov_recursion");
        for (auto& [k, c] : r.terms())
            if (wkey::fdeg(k) != 1) throw Error("recursion produced a term of form degree != 1");
        if (delta_inv(r).norm() > 1e-11 * std::max(1.0, r.norm())) throw Error("delta^{-1} r does not vanish");
        s.r_by_degree[D + 1] = std::move(r);
    }
    s.r_total = WeylForm(g.chart, s.caps);
    for (auto& r : s.r_by_degree) s.r_total += r;
    s.flatness = flatness_check(s);
    return s;
}

WeylForm fedosov_d(const WeylForm& a, const FedosovState& s) {
    WeylForm out = dhat_weyl(a, *s.conn, *s.geo);
    out -= delta(a);
    if (!s.r_total.empty() && !a.empty()) out -= i_over_v(commutator(s.r_total, a, s.kernel));
    return out;
}

FlatnessReport flatness_check(const FedosovState& s) {
    FlatnessReport rep;
    const int K = s.opt.K_max;
    const int d = 2 * s.geo->n;
    rep.by_degree.assign(K + 1, 0.0);
    rep.verified_through = K - 1;
    rep.min_reliable = s.geo->chart->order();
    // monomials z^zeta with |zeta| <= 3
    std::vector<Mono> monos{Mono{}};
    for (std::size_t i = 0; i < monos.size(); ++i) {
        int deg = 0, last = 0;
        for (int a = 0; a < d; ++a) {
            deg += monos[i][a];
            if (monos[i][a]) last = a;
        }
        if (deg == 3) continue;
        for (int a = last; a < d; ++a) {
            Mono m = monos[i];
            ++m[a];
            monos.push_back(m);
        }
    }
    for (const Mono& z : monos) {
        int zd = 0;
        for (int a = 0; a < d; ++a) zd += z[a];
        for (int A = -1; A < d; ++A) {
            WeylCaps caps = s.caps;
            caps.deg_max = zd + K;
            WeylForm p(s.geo->chart, caps);
            p.add(0, z, A < 0 ? 0u : (1u << A), Jet::constant(s.geo->chart, 1.0));
            WeylForm q = fedosov_d(fedosov_d(p, s), s);
            check_overflow(q, "flatness_check");
            ++rep.probes;
            for (auto& [k, c] : q.terms()) {
                int idx = wkey::total(k) - zd + 2;
                if (idx < 0 || idx > K) continue;
                if (idx <= K - 1) rep.min_reliable = std::min(rep.min_reliable, c.reliable());
                rep.by_degree[idx] = std::max(rep.by_degree[idx], c.norm());
            }
        }
    }
    for (int k = 0; k <= K - 1; ++k) rep.max_residual = std::max(rep.max_residual, rep.by_degree[k]);
    rep.pass = rep.min_reliable >= 0 && rep.max_residual < s.opt.tol;
    return rep;
}

WeylForm chi_lift(const Jet& f, const FedosovState& s, int max_deg) { return chi_lift(VSeries{f}, s, max_deg); }

WeylForm chi_lift(const VSeries& f, const FedosovState& s, int max_deg) {
    WeylCaps caps = s.caps;
    caps.deg_max = max_deg;
    caps.v_max = std::max(caps.v_max, max_deg / 2);
    caps.s_max = std::max(caps.s_max, max_deg);
    const ChartPtr& ch = s.geo->chart;
    std::vector<WeylForm> comp(max_deg + 1, WeylForm(ch, caps));
    for (int D = 0; D <= max_deg; ++D) {
        if (D % 2 == 0 && D / 2 < int(f.size()) && f[D / 2].valid()) comp[D].add(D / 2, Mono{}, 0, f[D / 2]);
        if (D == 0) continue;
        WeylForm X = dhat_weyl(comp[D - 1], *s.conn, *s.geo);
        for (int k = 2; k < int(s.r_by_degree.size()); ++k) {
            int j = D + 1 - k;
            if (j < 1) break;
            if (s.r_by_degree[k].empty() || comp[j].empty()) continue;
            X -= i_over_v(commutator(recap(s.r_by_degree[k], caps), comp[j], s.kernel));
        }
        comp[D] += delta_inv(X.total_degree(D - 1));
        check_overflow(comp[D], "chi_lift");
    }
    WeylForm out(ch, caps);
    for (auto& c : comp) out += c;
    return out;
}

VSeries star(const Jet& f, const Jet& g, const FedosovState& s, int order) {
    return star(VSeries{f}, VSeries{g}, s, order);
}

VSeries star(const VSeries& f, const VSeries& g, const FedosovState& s, int order) {
    const int D = 2 * order;
    WeylForm a = chi_lift(f, s, D), b = chi_lift(g, s, D);
    WeylForm p = wick_product(a, b, s.kernel);
    const ChartPtr& ch = s.geo->chart;
    VSeries out(order + 1, Jet(ch));
    for (auto& [k, c] : p.terms())
        if (wkey::zdeg(k) == 0 && wkey::form(k) == 0 && wkey::vpow(k) <= order) out[wkey::vpow(k)] += c;
    return out;
}

CurvatureReport weyl_curvature(const FedosovState& s) {
    CurvatureReport rep;
    const int K = s.opt.K_max;
    rep.verified_through = K - 1;
    WeylCaps caps = s.caps;
    caps.deg_max = K + 2;
    WeylForm Theta = recap(s.gamma0 + s.r_total, caps);
    rep.C = recap(s.R_W, caps) + dhat_weyl(Theta, *s.conn, *s.geo) - i_over_v(wick_product(Theta, Theta, s.kernel, 1));
    WeylForm plus = rep.C + theta_form(*s.geo, caps);
    plus = up_to_degree(plus, K - 1);
    rep.omega_v = WeylForm(s.geo->chart, caps);
    for (auto& [k, c] : plus.terms()) {
        if (wkey::zdeg(k) == 0)
            rep.omega_v.add_key(k, c);
        else
            rep.central_defect = std::max(rep.central_defect, c.norm());
    }
    rep.closure = exterior_d(rep.omega_v, *s.geo).norm();
    return rep;
}

WeylForm weyl_inverse(const WeylForm& B, const Kernel& K, int max_deg) {
    WeylCaps caps = B.caps();
    caps.deg_max = max_deg;
    const ChartPtr& ch = B.chart();
    WeylForm one = weyl_constant(ch, caps, Jet::constant(ch, 1.0));
    WeylForm B1 = recap(B, caps) - one;
    B1.prune();
    if (B1.min_total_degree() == 0) throw Error("gauge element must be I + (terms of positive Deg)");
    WeylForm inv = one, term = one;
    for (int it = 0; it <= max_deg && !term.empty(); ++it) {
        term = cplx(-1.0) * wick_product(term, B1, K);
        inv += term;
    }
    return inv;
}

FedosovState gauge_transform(const FedosovState& s, const WeylForm& B) {
    const int K = s.opt.K_max;
    WeylCaps caps = s.caps;
    caps.deg_max = K;
    WeylForm Bc = recap(B, caps);
    WeylForm DB = fedosov_d(Bc, s);
    WeylForm X = wick_product(DB, weyl_inverse(Bc, s.kernel, K), s.kernel);
    WeylForm rp = recap(s.r_total, caps) - kI * v_shift(X, 1);
    rp.prune();
    check_overflow(rp, "gauge_transform");

    FedosovState t = s;
    t.r_by_degree.assign(K + 1, WeylForm(s.geo->chart, s.caps));
    t.r_total = WeylForm(s.geo->chart, s.caps);
    for (auto& [k, c] : rp.terms()) {
        int D = wkey::total(k);
        if (D > K) continue;
        if (D < 2) throw Error("gauge transform produced a connection term of Deg < 2");
        t.r_by_degree[D].add_key(k, c);
        t.r_total.add_key(k, c);
    }
    t.flatness = flatness_check(t);
    return t;
}

MatrixWeyl matrix_weyl(const ChartPtr& chart, const WeylCaps& caps, const std::vector<std::vector<Jet>>& m) {
    MatrixWeyl out;
    out.k = static_cast<int>(m.size());
    for (auto& row : m) {
        if (int(row.size()) != out.k) throw Error("matrix section must be square");
        for (auto& x : row) out.e.push_back(weyl_constant(chart, caps, x));
    }
    return out;
}

MatrixWeyl matrix_product(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K) {
    if (a.k != b.k) throw Error("matrix size mismatch");
    MatrixWeyl out;
    out.k = a.k;
    out.e.assign(a.k * a.k, WeylForm(a.e[0].chart(), a.e[0].caps()));
    for (int i = 0; i < a.k; ++i)
        for (int j = 0; j < a.k; ++j)
            for (int l = 0; l < a.k; ++l) out(i, j) += wick_product(a(i, l), b(l, j), K);
    return out;
}

namespace {

// [G, x] for a matrix of 1-forms G and a matrix x of form degree 0
MatrixWeyl bundle_bracket(const MatrixWeyl& G, const MatrixWeyl& x, const Kernel& K) {
    MatrixWeyl gx = matrix_product(G, x, K), xg = matrix_product(x, G, K);
    for (std::size_t i = 0; i < gx.e.size(); ++i) gx.e[i] -= xg.e[i];
    return gx;
}

}  // namespace

EndomorphismCheck flat_endomorphism_check(const std::vector<std::vector<Jet>>& section, const FedosovState& s,
                                          const MatrixWeyl& bundle_gamma, double tol) {
    EndomorphismCheck out;
    const int K = s.opt.K_max;
    WeylCaps caps = s.caps;
    caps.deg_max = K;
    const ChartPtr& ch = s.geo->chart;
    MatrixWeyl S = matrix_weyl(ch, caps, section);
    const int k = S.k;
    const bool has_gamma = bundle_gamma.k == k && k > 0;

    // chi by degree
    std::vector<MatrixWeyl> comp(K + 1);
    for (auto& c : comp) {
        c.k = k;
        c.e.assign(k * k, WeylForm(ch, caps));
    }
    comp[0] = S;
    for (int D = 1; D <= K; ++D) {
        MatrixWeyl Gx;
        if (has_gamma) Gx = bundle_bracket(bundle_gamma, comp[D - 1], s.kernel);
        for (int e = 0; e < k * k; ++e) {
            WeylForm X = dhat_weyl(comp[D - 1].e[e], *s.conn, *s.geo);
            if (has_gamma) X += Gx.e[e];
            for (int r = 2; r < int(s.r_by_degree.size()); ++r) {
                int j = D + 1 - r;
                if (j < 1) break;
                if (s.r_by_degree[r].empty() || comp[j].e[e].empty()) continue;
                X -= i_over_v(commutator(recap(s.r_by_degree[r], caps), comp[j].e[e], s.kernel));
            }
            comp[D].e[e] = delta_inv(X.total_degree(D - 1));
        }
    }
    for (int e = 0; e < k * k; ++e) {
        WeylForm chi(ch, caps);
        for (int D = 0; D <= K; ++D) chi += comp[D].e[e];
        out.chi_defect = std::max(out.chi_defect, (chi - S.e[e]).norm());
    }
    MatrixWeyl Gs;
    if (has_gamma) Gs = bundle_bracket(bundle_gamma, S, s.kernel);
    for (int e = 0; e < k * k; ++e) {
        WeylForm d = fedosov_d(S.e[e], s);
        if (has_gamma) d += Gs.e[e];
        out.flat_defect = std::max(out.flat_defect, d.norm());
    }
    out.pass = out.chi_defect < tol && out.flat_defect < tol;
    return out;
}

std::vector<StarRow> star_table(const FedosovState& s, int max_mono_degree, int order) {
    const ChartPtr& ch = s.geo->chart;
    const int d = ch->dim();
    struct Basis {
        std::string name;
        Jet f;
    };
    std::vector<Basis> basis{{"1", Jet::constant(ch, 1.0)}};
    std::vector<Mono> monos{Mono{}};
    for (std::size_t i = 0; i < monos.size(); ++i) {
        int deg = 0, last = 0;
        for (int a = 0; a < d; ++a) {
            deg += monos[i][a];
            if (monos[i][a]) last = a;
        }
        if (deg == max_mono_degree) continue;
        for (int a = last; a < d; ++a) {
            Mono m = monos[i];
            ++m[a];
            monos.push_back(m);
            std::string name;
            Jet f = Jet::constant(ch, 1.0);
            for (int b = 0; b < d; ++b) {
                for (int t = 0; t < m[b]; ++t) f = f * Jet::coordinate_offset(ch, b);
                if (m[b] == 0) continue;
                if (!name.empty()) name += "*";
                name += ch->names()[b];
                if (m[b] > 1) name += "^" + std::to_string(m[b]);
            }
            basis.push_back({name, f});
        }
    }
    std::vector<WeylForm> lifts;
    for (auto& b : basis) lifts.push_back(chi_lift(b.f, s, 2 * order));
    std::vector<StarRow> rows;
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) {
            WeylForm p = wick_product(lifts[i], lifts[j], s.kernel);
            std::vector<cplx> val(order + 1, cplx{});
            for (auto& [k, c] : p.terms())
                if (wkey::zdeg(k) == 0 && wkey::form(k) == 0 && wkey::vpow(k) <= order) val[wkey::vpow(k)] += c.value();
            for (int r = 0; r <= order; ++r) rows.push_back({basis[i].name, basis[j].name, r, val[r]});
        }
    return rows;
}

}  // namespace fedq
