#include "fedq/geometry.hpp"

#include <cmath>

namespace fedq {

JetTensor invert_matrix(const JetTensor& m) {
    const int d = m.dims()[0];
    const ChartPtr& chart = m.flat()[0].chart();
    JetTensor a = m;
    JetTensor inv(chart, {d, d});
    for (int i = 0; i < d; ++i) inv(i, i) = Jet::constant(chart, 1.0);
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a(r, c).value()) > std::abs(a(piv, c).value())) piv = r;
        if (std::abs(a(piv, c).value()) <= 1e-14) throw SingularJet("singular matrix at base point");
        if (piv != c)
            for (int k = 0; k < d; ++k) {
                std::swap(a(c, k), a(piv, k));
                std::swap(inv(c, k), inv(piv, k));
            }
        Jet p = invert(a(c, c));
        for (int k = 0; k < d; ++k) {
            a(c, k) = a(c, k) * p;
            inv(c, k) = inv(c, k) * p;
        }
        for (int r = 0; r < d; ++r) {
            if (r == c || a(r, c).is_zero()) continue;
            Jet f = a(r, c);
            for (int k = 0; k < d; ++k) {
                a(r, k).fma(f, a(c, k), -1.0);
                inv(r, k).fma(f, inv(c, k), -1.0);
            }
        }
    }
    return inv;
}

Jet determinant(const JetTensor& m) {
    const int d = m.dims()[0];
    const ChartPtr& chart = m.flat()[0].chart();
    JetTensor a = m;
    Jet det = Jet::constant(chart, 1.0);
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(a(r, c).value()) > std::abs(a(piv, c).value())) piv = r;
        if (std::abs(a(piv, c).value()) <= 1e-300) return Jet::constant(chart, 0.0);
        if (piv != c) {
            for (int k = 0; k < d; ++k) std::swap(a(c, k), a(piv, k));
            det = -det;
        }
        det = det * a(c, c);
        Jet p = invert(a(c, c));
        for (int r = c + 1; r < d; ++r) {
            Jet f = a(r, c) * p;
            for (int k = c; k < d; ++k) a(r, k).fma(f, a(c, k), -1.0);
        }
    }
    return det;
}

Jet GeometryData::frame_derivative(const Jet& f, int alpha) const {
    Jet d = partial(f, alpha);
    if (alpha < n)
        for (int a = 0; a < n; ++a)
            if (!N(a, alpha).is_zero()) d.fma(N(a, alpha), partial(f, n + a), -1.0);
    return d;
}

Jet n_elongated_partial(const Jet& f, int i, const JetTensor& N) {
    const int n = N.dims()[0];
    Jet d = partial(f, i);
    for (int a = 0; a < n; ++a)
        if (!N(a, i).is_zero()) d.fma(N(a, i), partial(f, n + a), -1.0);
    return d;
}

JetTensor hessian(const Jet& L) {
    const ChartPtr& chart = L.chart();
    const int n = chart->n();
    JetTensor g(chart, {n, n});
    for (int a = 0; a < n; ++a) {
        Jet da = partial(L, n + a);
        for (int b = a; b < n; ++b) {
            g(a, b) = partial(da, n + b);
            g(b, a) = g(a, b);
        }
    }
    return g;
}

void check_regular(const JetTensor& gv, double tol) {
    Jet det = determinant(gv);
    if (std::abs(det.value()) < tol)
        throw DegenerateHessian("degenerate Hessian: |det| = " + std::to_string(std::abs(det.value())));
}

JetTensor semispray(const Jet& L, const JetTensor& gv_inv) {
    const ChartPtr& chart = L.chart();
    const int n = chart->n();
    std::vector<Jet> bracket(n);
    for (int j = 0; j < n; ++j) {
        Jet dyj = partial(L, n + j);
        Jet b = -partial(L, j);
        for (int k = 0; k < n; ++k) b.fma(partial(dyj, k), Jet::variable(chart, n + k));
        bracket[j] = b;
    }
    JetTensor G(chart, {n});
    for (int i = 0; i < n; ++i) {
        Jet s(chart);
        for (int j = 0; j < n; ++j) s.fma(gv_inv(i, j), bracket[j], 0.5);
        G(i) = s;
    }
    return G;
}

JetTensor canonical_N(const JetTensor& G) {
    const int n = G.dims()[0];
    const ChartPtr& chart = G(0).chart();
    JetTensor N(chart, {n, n});
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) N(a, i) = partial(G(a), n + i);
    return N;
}

namespace {

bool same_block(const JetTensor& a, const JetTensor& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        if (jet_distance(a.flat()[k], b.flat()[k]) > 0) return false;
    return true;
}

JetTensor congruence(const JetTensor& E, const JetTensor& M) {
    // E^T M E
    const int d = E.dims()[0];
    const ChartPtr& chart = E.flat()[0].chart();
    JetTensor tmp(chart, {d, d}), out(chart, {d, d});
    for (int a = 0; a < d; ++a)
        for (int nu = 0; nu < d; ++nu)
            for (int b = 0; b < d; ++b)
                if (!M(a, b).is_zero() && !E(b, nu).is_zero()) tmp(a, nu).fma(M(a, b), E(b, nu));
    for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu)
            for (int a = 0; a < d; ++a)
                if (!E(a, mu).is_zero() && !tmp(a, nu).is_zero()) out(mu, nu).fma(E(a, mu), tmp(a, nu));
    return out;
}

void finish(GeometryData& geo) {
    const ChartPtr& chart = geo.chart;
    const int n = geo.n, d = 2 * n;
    geo.gh_inv = invert_matrix(geo.gh);
    geo.gv_inv = invert_matrix(geo.gv);
    geo.g = JetTensor(chart, {d, d});
    geo.g_inv = JetTensor(chart, {d, d});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            geo.g(i, j) = geo.gh(i, j);
            geo.g(n + i, n + j) = geo.gv(i, j);
            geo.g_inv(i, j) = geo.gh_inv(i, j);
            geo.g_inv(n + i, n + j) = geo.gv_inv(i, j);
        }
    geo.E = JetTensor(chart, {d, d});
    geo.E_inv = JetTensor(chart, {d, d});
    for (int a = 0; a < d; ++a) {
        geo.E(a, a) = Jet::constant(chart, 1.0);
        geo.E_inv(a, a) = Jet::constant(chart, 1.0);
    }
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
            geo.E(n + a, i) = geo.N(a, i);
            geo.E_inv(n + a, i) = -geo.N(a, i);
        }
    geo.g_coord = congruence(geo.E, geo.g);

    geo.Omega = JetTensor(chart, {n, n, n});
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Jet w = geo.frame_derivative(geo.N(a, i), j) - geo.frame_derivative(geo.N(a, j), i);
                geo.Omega(a, i, j) = w;
                geo.Omega(a, j, i) = -w;
            }
    geo.W = JetTensor(chart, {d, d, d});
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) geo.W(n + a, i, j) = geo.Omega(a, i, j);
            for (int b = 0; b < n; ++b) {
                Jet dn = partial(geo.N(a, i), n + b);
                geo.W(n + a, i, n + b) = dn;
                geo.W(n + a, n + b, i) = -dn;
            }
        }
    geo.J.clear();
    for (int i = 0; i < n; ++i) geo.J.push_back({n + i, -1});
    for (int i = 0; i < n; ++i) geo.J.push_back({i, 1});

    geo.sasaki = same_block(geo.gh, geo.gv);
    if (geo.sasaki) {
        geo.theta = JetTensor(chart, {d, d});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                geo.theta(n + i, j) = geo.gh(i, j);
                geo.theta(j, n + i) = -geo.gh(i, j);
            }
        geo.theta_inv = invert_matrix(geo.theta);
        geo.theta_coord = congruence(geo.E, geo.theta);
    }
}

}  // namespace

GeometryData dmetric_geometry(const ChartPtr& chart, const JetTensor& gh, const JetTensor& gv,
                              const JetTensor& N) {
    GeometryData geo;
    geo.chart = chart;
    geo.n = chart->n();
    geo.gh = gh;
    geo.gv = gv;
    geo.N = N;
    geo.L = Jet(chart);
    geo.G = JetTensor(chart, {geo.n});
    finish(geo);
    return geo;
}

GeometryData lagrange_geometry(const Jet& L, bool verify_closure) {
    GeometryData geo;
    geo.chart = L.chart();
    geo.n = geo.chart->n();
    geo.L = L;
    geo.gv = hessian(L);
    check_regular(geo.gv);
    geo.gh = geo.gv;
    JetTensor gvi = invert_matrix(geo.gv);
    geo.G = semispray(L, gvi);
    geo.N = canonical_N(geo.G);
    finish(geo);
    if (verify_closure) {
        SymplecticCheck sc = check_symplectic(geo);
        if (sc.closure > 1e-8)
            throw ClosureViolation("d(theta) does not vanish: " + std::to_string(sc.closure));
    }
    return geo;
}

JetTensor exterior_derivative2(const JetTensor& f) {
    const int d = f.dims()[0];
    const ChartPtr& chart = f.flat()[0].chart();
    JetTensor out(chart, {d, d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                out(a, b, c) = partial(f(b, c), a) + partial(f(c, a), b) + partial(f(a, b), c);
    return out;
}

SymplecticCheck check_symplectic(const GeometryData& geo) {
    SymplecticCheck sc;
    if (!geo.sasaki) return sc;
    const int n = geo.n, d = 2 * n;
    sc.closure = exterior_derivative2(geo.theta_coord).norm();
    std::vector<Jet> omega(d, Jet(geo.chart));
    for (int i = 0; i < n; ++i) omega[i] = partial(geo.L, n + i);
    double m = 0;
    for (int mu = 0; mu < d; ++mu)
        for (int nu = 0; nu < d; ++nu) {
            Jet dw = partial(omega[nu], mu) - partial(omega[mu], nu);
            m = std::max(m, jet_distance(dw, geo.theta_coord(mu, nu)));
        }
    sc.potential = m;
    return sc;
}

double almost_complex_defect(const GeometryData& geo) {
    const int d = 2 * geo.n;
    double m = 0;
    for (int a = 0; a < d; ++a) {
        auto [t, s] = geo.J[a];
        auto [t2, s2] = geo.J[t];
        if (t2 != a || s * s2 != -1) m = std::max(m, 1.0);
        if (!geo.sasaki) continue;
        for (int b = 0; b < d; ++b) {
            Jet gJ = geo.g(t, b) * cplx(s);
            m = std::max(m, jet_distance(gJ, geo.theta(a, b)));
        }
    }
    return m;
}

Jet frame_commutator(const GeometryData& geo, const Jet& f, int b, int c) {
    return geo.frame_derivative(geo.frame_derivative(f, c), b) -
           geo.frame_derivative(geo.frame_derivative(f, b), c);
}

}  // namespace fedq
