#include <doctest.h>

#include <cmath>

#include "fedq/dconnection.hpp"
#include "support.hpp"

using namespace fedq;
using fedq::testing::jet_of;

namespace {

const char* kLagrangians[] = {
    "exp(2*x1)*(y1^2+y2^2)/2",
    "(1 + x1^2/4)*(y1^2 + y2^2)/2 + x2*y1*y2/5",
    "(y1^2+y2^2)/2 + x1*y1^3/6 + x2*y2^2*y1/4",
    "exp(x1*x2/3)*sqrt(1 + y1^2 + y2^2)",
    "cosh(x1)*y1^2/2 + y2^2/2 + sin(x2)*y1*y2/3 + y1^4/12",
};

const std::vector<double> kBase{0.2, -0.3, 0.4, 0.25};

double rel(double err, const JetTensor& t) { return err / std::max(1.0, t.norm()); }

}  // namespace

TEST_CASE("flat input gives vanishing connection and curvature") {
    auto ch = Chart::make(2, kBase, 5);
    GeometryData geo = lagrange_geometry(jet_of("(y1^2+y2^2)/2", ch));
    DConnectionData c = full_dconnection(geo);
    CHECK(c.Gamma.norm() == 0);
    CHECK(c.T.norm() == 0);
    CHECK(c.R.norm() == 0);
    CHECK(c.Ricci.norm() == 0);
    CHECK(c.scalar.norm() == 0);
    CHECK(distortion(c, geo).norm() == 0);
    EinsteinResidual er = einstein_residual(c, geo, 0, 0);
    CHECK(er.ricci_residual == 0);
    CHECK(er.einstein_residual == 0);
}

TEST_CASE("exponential Lagrangian: nonzero L, vanishing C") {
    auto ch = Chart::make(2, kBase, 5);
    GeometryData geo = lagrange_geometry(jet_of(kLagrangians[0], ch));
    DConnectionData c = normal_dconnection(geo);
    CHECK(c.Lh.norm() > 0.1);
    CHECK(c.Ch.norm() < 1e-12);
    // oracle: g = e^{2 x1} delta, N linear in y; L^i_{jk} = 1/2 g^{ih}(e_k g_jh + e_j g_hk - e_h g_jk) with e_k g = d_k g
    // gives L^1_{11} = 1, L^1_{22} = -1, L^2_{12} = L^2_{21} = 1, others 0
    CHECK(std::abs(c.Lh(0, 0, 0).value() - 1.0) < 1e-13);
    CHECK(std::abs(c.Lh(0, 1, 1).value() + 1.0) < 1e-13);
    CHECK(std::abs(c.Lh(1, 0, 1).value() - 1.0) < 1e-13);
    CHECK(std::abs(c.Lh(1, 1, 0).value() - 1.0) < 1e-13);
    CHECK(std::abs(c.Lh(0, 0, 1).value()) < 1e-13);
}

TEST_CASE("canonical and normal coefficients agree on Lagrange geometries") {
    auto ch = Chart::make(2, kBase, 5);
    for (const char* text : kLagrangians) {
        INFO(std::string(text));
        GeometryData geo = lagrange_geometry(jet_of(text, ch));
        DConnectionData c = normal_dconnection(geo);
        JetTensor Lh, Ch;
        normal_coefficients(geo, Lh, Ch);
        CHECK(rel(tensor_distance(Lh, c.Lh), Lh) < 1e-12);
        CHECK(rel(tensor_distance(Ch, c.Ch), Ch) < 1e-12);
        CHECK(rel(tensor_distance(c.Lv, c.Lh), Lh) < 1e-12);
        CHECK(rel(tensor_distance(c.Cv, c.Ch), Ch) < 1e-12);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    CHECK(jet_distance(c.Lh(i, j, k), c.Lh(i, k, j)) < 1e-12);
                    CHECK(jet_distance(c.Ch(i, j, k), c.Ch(i, k, j)) < 1e-12);
                }
    }
}

TEST_CASE("torsion components") {
    auto ch = Chart::make(2, kBase, 5);
    for (const char* text : kLagrangians) {
        INFO(std::string(text));
        GeometryData geo = lagrange_geometry(jet_of(text, ch));
        DConnectionData c = normal_dconnection(geo);
        compute_torsion(c, geo);
        const int n = 2;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    CHECK(c.T(i, j, k).norm() < 1e-12);
                    CHECK(c.T(n + i, n + j, n + k).norm() < 1e-12);
                    CHECK(jet_distance(c.T(n + i, j, k), geo.Omega(i, j, k)) < 1e-12);
                    CHECK(jet_distance(c.T(i, j, n + k), c.Ch(i, j, k)) < 1e-12);
                    // T^a_{ib} = e_b N^a_i - L^a_{bi}
                    Jet expect = partial(geo.N(i, j), n + k) - c.Lv(i, k, j);
                    CHECK(jet_distance(c.T(n + i, j, n + k), expect) < 1e-12);
                }
        // torsion as D_X Y - D_Y X - [X, Y] applied to test functions through frame commutators
        std::mt19937 rng(1);
        Jet f = fedq::testing::random_jet(ch, rng);
        for (int b = 0; b < 4; ++b)
            for (int g = 0; g < 4; ++g) {
                Jet lhs(ch);  // T(e_g, e_b) f
                for (int a = 0; a < 4; ++a) lhs.fma(c.T(a, b, g), geo.frame_derivative(f, a));
                Jet rhs = -frame_commutator(geo, f, g, b);
                for (int a = 0; a < 4; ++a) {
                    rhs.fma(c.Gamma(a, b, g), geo.frame_derivative(f, a));
                    rhs.fma(c.Gamma(a, g, b), geo.frame_derivative(f, a), -1.0);
                }
                CHECK(jet_distance(lhs, rhs) < 1e-9 * std::max(1.0, rhs.norm()));
            }
    }
}

TEST_CASE("curvature formulas agree with operator composition") {
    auto ch = Chart::make(2, kBase, 6);
    for (const char* text : kLagrangians) {
        INFO(std::string(text));
        GeometryData geo = lagrange_geometry(jet_of(text, ch));
        DConnectionData c = normal_dconnection(geo);
        compute_torsion(c, geo);
        CHECK_NOTHROW(compute_curvature(c, geo));
        CHECK(c.curvature_mismatch < 1e-9);
        for (int i = 0; i < 2; ++i)
            for (int h = 0; h < 2; ++h)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k) CHECK(jet_distance(c.Rh(i, h, j, k), -c.Rh(i, h, k, j)) < 1e-10);

        // direct composition (D_X D_Y - D_Y D_X - D_[X,Y]) e_b on frame fields
        for (int b = 0; b < 4; ++b)
            for (int g = 0; g < 4; ++g)
                for (int d = 0; d < 4; ++d) {
                    // D_{e_d}(D_{e_g} e_b) - D_{e_g}(D_{e_d} e_b) - D_{[e_d, e_g]} e_b
                    for (int a = 0; a < 4; ++a) {
                        Jet v = geo.frame_derivative(c.Gamma(a, b, g), d) - geo.frame_derivative(c.Gamma(a, b, d), g);
                        for (int m = 0; m < 4; ++m) {
                            v.fma(c.Gamma(m, b, g), c.Gamma(a, m, d));
                            v.fma(c.Gamma(m, b, d), c.Gamma(a, m, g), -1.0);
                            v.fma(geo.W(m, d, g), c.Gamma(a, b, m), -1.0);
                        }
                        CHECK(jet_distance(v, c.R(a, b, g, d)) < 1e-10 * std::max(1.0, v.norm()));
                    }
                }
        GeometryData low = lagrange_geometry(jet_of(text, Chart::make(2, kBase, 3)));
        DConnectionData cl = normal_dconnection(low);
        CHECK_THROWS_AS(compute_curvature(cl, low), InsufficientOrder);
    }
}

TEST_CASE("metric and symplectic compatibility") {
    auto ch = Chart::make(2, kBase, 5);
    for (const char* text : kLagrangians) {
        INFO(std::string(text));
        GeometryData geo = lagrange_geometry(jet_of(text, ch));
        DConnectionData c = normal_dconnection(geo);
        CHECK(rel(covariant_derivative2(c, geo, geo.g).norm(), geo.g) < 1e-10);
        CHECK(rel(covariant_derivative2(c, geo, geo.theta).norm(), geo.theta) < 1e-10);
    }
}

TEST_CASE("distortion reproduces the Levi-Civita connection") {
    auto ch = Chart::make(2, kBase, 5);
    for (const char* text : kLagrangians) {
        INFO(std::string(text));
        GeometryData geo = lagrange_geometry(jet_of(text, ch));
        DConnectionData c = normal_dconnection(geo);
        compute_torsion(c, geo);
        JetTensor koszul = levi_civita_koszul(geo);
        JetTensor coord = levi_civita_coordinate(geo);
        CHECK(rel(tensor_distance(koszul, coord), koszul) < 1e-9);
        JetTensor Z = distortion(c, geo);
        JetTensor sum = c.Gamma;
        for (std::size_t k = 0; k < sum.size(); ++k) sum.flat()[k] += Z.flat()[k];
        CHECK(rel(tensor_distance(sum, koszul), koszul) < 1e-9);
        // Z^i_{jk} and Z^a_{bc} vanish
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    CHECK(Z(i, j, k).norm() == 0);
                    CHECK(Z(2 + i, 2 + j, 2 + k).norm() == 0);
                }
    }
}

TEST_CASE("distortion vanishes under the Levi-Civita constraints") {
    // y-independent metric with vanishing N: C = 0, Omega = 0 and L^c_{aj} = e_a N^c_j = 0
    auto ch = Chart::make(2, kBase, 5);
    GeometryData geo = lagrange_geometry(jet_of("(y1^2+y2^2)/2*exp(0*x1)", ch));
    DConnectionData c = normal_dconnection(geo);
    compute_torsion(c, geo);
    CHECK(distortion(c, geo).norm() == 0);

    JetTensor gh(ch, {2, 2}), gv(ch, {2, 2}), N(ch, {2, 2});
    gh(0, 0) = jet_of("exp(x1*x2)", ch);
    gh(1, 1) = jet_of("1 + x1^2", ch);
    gv(0, 0) = Jet::constant(ch, 1.0);
    gv(1, 1) = Jet::constant(ch, -2.0);
    GeometryData g2 = dmetric_geometry(ch, gh, gv, N);
    DConnectionData c2 = normal_dconnection(g2);
    compute_torsion(c2, g2);
    CHECK(distortion(c2, g2).norm() < 1e-14);
    CHECK(rel(tensor_distance(c2.Gamma, levi_civita_koszul(g2)), c2.Gamma) < 1e-12);
}

TEST_CASE("scalar curvature matches finite differences of base-point values") {
    const char* text = kLagrangians[2];
    auto e = parse(text);
    auto scalar_at = [&](std::vector<double> base, int order) {
        auto ch = Chart::make(2, base, order);
        GeometryData geo = lagrange_geometry(eval_jet(e, ch));
        return full_dconnection(geo).scalar;
    };
    Jet s = scalar_at(kBase, 6);
    const double h = 1e-4;
    for (int a = 0; a < 4; ++a) {
        auto p = kBase, m = kBase;
        p[a] += h;
        m[a] -= h;
        double fd = (scalar_at(p, 4).value().real() - scalar_at(m, 4).value().real()) / (2 * h);
        Mono mono{};
        mono[a] = 1;
        CHECK(std::abs(s.coeff(mono).real() - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
    Jet s4 = scalar_at(kBase, 4);
    CHECK(std::abs(s4.value() - s.value()) < 1e-12);
    DConnectionData c = full_dconnection(lagrange_geometry(jet_of(text, Chart::make(2, kBase, 4))));
    CHECK(std::abs((c.scalar_h + c.scalar_v).value() - c.scalar.value()) < 1e-15);
}

TEST_CASE("Einstein residual is linear in the source") {
    auto ch = Chart::make(2, kBase, 4);
    GeometryData geo = lagrange_geometry(jet_of("(y1^2+y2^2)/2", ch));
    DConnectionData c = full_dconnection(geo);
    EinsteinResidual r = einstein_residual(c, geo, 0.7, 0.7);
    CHECK(std::abs(r.ricci_residual - 0.7) < 1e-15);
    CHECK(std::abs(r.einstein_residual - 0.7) < 1e-15);
}
