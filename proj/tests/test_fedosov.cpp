#include <doctest.h>

#include <cmath>
#include <random>

#include "fedq/fedosov.hpp"
#include "support.hpp"

using namespace fedq;
using fedq::testing::jet_of;

namespace {

const cplx I(0.0, 1.0);
const std::vector<double> kBase{0.2, -0.3, 0.4, 0.25};

struct Built {
    std::shared_ptr<const GeometryData> geo;
    std::shared_ptr<const DConnectionData> conn;
    FedosovState state;
};

Built build(const std::string& L, const ChartPtr& ch, FedosovOptions opt = {}) {
    Built b;
    b.geo = std::make_shared<const GeometryData>(lagrange_geometry(jet_of(L, ch)));
    b.conn = std::make_shared<const DConnectionData>(full_dconnection(*b.geo));
    b.state = fedosov_recursion(b.geo, b.conn, opt);
    return b;
}

const Built& curved() {
    static Built b = build("(1 + x1^2/4)*(y1^2 + y2^2)/2 + x2*y1*y2/5", Chart::make(2, kBase, 8));
    return b;
}

const Built& flat(bool moyal = false) {
    auto make = [](bool m) {
        FedosovOptions opt;
        opt.moyal = m;
        return build("(y1^2 + y2^2)/2", Chart::make(2, kBase, 8), opt);
    };
    if (moyal) {
        static Built b = make(true);
        return b;
    }
    static Built b = make(false);
    return b;
}

const Built& curved1() {
    static Built b = build("exp(x1/2)*y1^2/2 + y1^4/12", Chart::make(1, {0.2, 0.4}, 10));
    return b;
}

Jet random_poly(const ChartPtr& ch, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Jet j = Jet::constant(ch, 0.0);
    for (std::size_t k = 0; k < ch->size(); ++k) j.set_coeff(k, cplx(u(rng), u(rng)) / double(1 + ch->degree(k)));
    return j;
}

double series_distance(const VSeries& a, const VSeries& b, int upto) {
    double m = 0;
    for (int k = 0; k <= upto; ++k) m = std::max(m, jet_distance(a.at(k), b.at(k)));
    return m;
}

}  // namespace

TEST_CASE("torsion and curvature lifts") {
    const Built& f = flat();
    CHECK(f.state.T_W.empty());
    CHECK(f.state.R_W.empty());

    const Built& c = curved();
    const GeometryData& geo = *c.geo;
    for (auto& [k, v] : c.state.T_W.terms()) {
        CHECK(wkey::zdeg(k) == 1);
        CHECK(wkey::fdeg(k) == 2);
    }
    for (auto& [k, v] : c.state.R_W.terms()) {
        CHECK(wkey::zdeg(k) == 2);
        CHECK(wkey::fdeg(k) == 2);
    }
    CHECK(c.state.R_W.norm() > 1e-3);
    // theta-lowered curvature is symmetric in its z slots and antisymmetric in its form slots
    const int d = 4;
    double sym = 0, anti = 0;
    for (int k = 0; k < d; ++k)
        for (int nu = 0; nu < d; ++nu)
            for (int g = 0; g < d; ++g)
                for (int e = 0; e < d; ++e) {
                    cplx x = 0, y = 0, z = 0;
                    for (int b = 0; b < d; ++b) {
                        x += geo.theta(k, b).value() * c.conn->R(b, nu, e, g).value();
                        y += geo.theta(nu, b).value() * c.conn->R(b, k, e, g).value();
                        z += geo.theta(k, b).value() * c.conn->R(b, nu, g, e).value();
                    }
                    sym = std::max(sym, std::abs(x - y));
                    anti = std::max(anti, std::abs(x + z));
                }
    CHECK(sym < 1e-12);
    CHECK(anti < 1e-12);

    // the lifts are the covariant derivative of theta_{ab} z^a e^b and the curvature of dhat
    WeylForm dg = dhat_weyl(c.state.gamma0, *c.conn, geo);
    CHECK((dg - c.state.T_W).norm() < 1e-13);
    for (int b = 0; b < d; ++b) {
        WeylForm z = weyl_z(geo.chart, c.state.caps, b);
        WeylForm d2 = dhat_weyl(dhat_weyl(z, *c.conn, geo), *c.conn, geo);
        WeylForm rhs = cplx(-1.0) * i_over_v(commutator(c.state.R_W, z, c.state.kernel));
        CHECK((d2 - rhs).norm() < 1e-13);
    }
}

TEST_CASE("dhat examples") {
    const Built& f = flat();
    const ChartPtr& ch = f.geo->chart;
    Jet u = jet_of("sin(x1)*y2 + x2^2*y1", ch);
    WeylForm du = dhat_weyl(weyl_constant(ch, f.state.caps, u), *f.conn, *f.geo);
    for (int a = 0; a < 4; ++a) CHECK(jet_distance(du.coeff(0, Mono{}, 1u << a), partial(u, a)) < 1e-14);

    const Built& c = curved();
    const GeometryData& geo = *c.geo;
    WeylForm gz(geo.chart, c.state.caps);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Mono m{};
            ++m[a];
            ++m[b];
            gz.add(0, m, 0, geo.g(a, b));
        }
    CHECK(dhat_weyl(gz, *c.conn, geo).norm() < 1e-12);

    // graded Leibniz rule over the Wick product
    std::mt19937 rng(21);
    for (int t = 0; t < 3; ++t) {
        WeylForm a(geo.chart, c.state.caps), b(geo.chart, c.state.caps);
        std::uniform_int_distribution<int> e(0, 2), pick(0, 3);
        for (int k = 0; k < 3; ++k) {
            Mono m{};
            m[pick(rng)] = e(rng);
            a.add(0, m, t == 1 ? 1u << pick(rng) : 0u, fedq::testing::random_jet(geo.chart, rng));
            m[pick(rng)] += 1;
            b.add(0, m, 0, fedq::testing::random_jet(geo.chart, rng));
        }
        double parity = t == 1 ? -1.0 : 1.0;
        const Kernel& K = c.state.kernel;
        WeylForm lhs = dhat_weyl(wick_product(a, b, K), *c.conn, geo);
        WeylForm rhs = wick_product(dhat_weyl(a, *c.conn, geo), b, K) +
                       cplx(parity) * wick_product(a, dhat_weyl(b, *c.conn, geo), K);
        CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("recursion invariants") {
    const Built& f = flat();
    for (auto& r : f.state.r_by_degree) CHECK(r.empty());
    CHECK(f.state.flatness.max_residual == 0.0);
    CHECK(f.state.flatness.pass);

    const Built& c = curved();
    CHECK(c.state.r_by_degree[0].empty());
    CHECK(c.state.r_by_degree[1].empty());
    CHECK(!c.state.r_by_degree[2].empty());
    for (int k = 2; k < int(c.state.r_by_degree.size()); ++k) {
        const WeylForm& r = c.state.r_by_degree[k];
        CHECK(delta_inv(r).norm() < 1e-12);
        for (auto& [key, v] : r.terms()) {
            CHECK(wkey::fdeg(key) == 1);
            CHECK(wkey::total(key) == k);
        }
    }
    CHECK_THROWS_AS(fedosov_recursion(c.geo, c.conn, FedosovOptions{2}), Error);
    FedosovOptions small;
    small.s_max = 3;
    CHECK_THROWS_AS(fedosov_recursion(c.geo, c.conn, small), CapOverflow);
}

TEST_CASE("flatness certificate") {
    const Built& c = curved();
    const FlatnessReport& rep = c.state.flatness;
    CHECK(rep.probes == 175);
    CHECK(rep.verified_through == 5);
    CHECK(rep.min_reliable >= 0);
    for (int k = 0; k <= 5; ++k) CHECK(rep.by_degree[k] < 1e-9);
    CHECK(rep.pass);
    // the truncation boundary is generically nonzero
    CHECK(rep.by_degree[6] > 1e-6);
}

TEST_CASE("flat lifts") {
    const Built& f = flat();
    const ChartPtr& ch = f.geo->chart;
    WeylForm one = chi_lift(Jet::constant(ch, 1.0), f.state, 6);
    CHECK(one.terms().size() == 1);
    CHECK(one.coeff(0, Mono{}, 0).value() == cplx(1.0));

    WeylForm x = chi_lift(Jet::variable(ch, 0), f.state, 6);
    WeylForm expect = weyl_constant(ch, f.state.caps, Jet::variable(ch, 0)) + weyl_z(ch, f.state.caps, 0);
    CHECK((x - expect).norm() < 1e-15);

    const Built& c = curved();
    std::mt19937 rng(3);
    for (int t = 0; t < 3; ++t) {
        Jet u = random_poly(c.geo->chart, rng);
        WeylForm chi = chi_lift(u, c.state, 5);
        CHECK(jet_distance(sigma(chi).coeff(0, Mono{}, 0), u) == 0);
        WeylForm d = fedosov_d(chi, c.state).filter([](std::uint64_t k) { return wkey::total(k) <= 3; });
        CHECK(d.norm() < 1e-9);
    }
}

TEST_CASE("star product") {
    const Built& c = curved();
    const ChartPtr& ch = c.geo->chart;
    std::mt19937 rng(5);
    Jet f = random_poly(ch, rng), g = random_poly(ch, rng), h = random_poly(ch, rng);

    VSeries one_f = star(Jet::constant(ch, 1.0), f, c.state, 3);
    CHECK(jet_distance(one_f[0], f) == 0);
    for (int k = 1; k <= 3; ++k) CHECK(one_f[k].norm() == 0);

    VSeries fg = star(f, g, c.state, 3), gf = star(g, f, c.state, 3);
    CHECK(jet_distance(fg[0], f * g) < 1e-14);
    // v^1 antisymmetric part is i times the theta Poisson bracket
    Jet pb(ch);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            pb.fma(c.geo->theta_inv(a, b), c.geo->frame_derivative(f, a) * c.geo->frame_derivative(g, b));
    CHECK(jet_distance(fg[1] - gf[1], pb * I) < 1e-9);

    VSeries gh = star(g, h, c.state, 3);
    VSeries left = star(fg, VSeries{h}, c.state, 3), right = star(VSeries{f}, gh, c.state, 3);
    CHECK(series_distance(left, right, 3) < 1e-8);
    CHECK(left[3].reliable() >= 0);
}

TEST_CASE("flat star product equals the Moyal-Wick formula") {
    for (bool moyal : {false, true}) {
        const Built& f = flat(moyal);
        const ChartPtr& ch = f.geo->chart;
        // closed form: theta = [[0, -1], [1, 0]] blocks, g = 1
        auto kernel = [&](int a, int b) {
            cplx th = (a < 2 && b == a + 2) ? 1.0 : (a >= 2 && b == a - 2) ? -1.0 : 0.0;
            return th - (moyal ? 0.0 : 1.0) * I * (a == b ? 1.0 : 0.0);
        };
        std::mt19937 rng(8);
        Jet u = random_poly(ch, rng), w = random_poly(ch, rng);
        VSeries s = star(u, w, f.state, 3);
        // order by order: sum over index tuples of the kernel products
        double fact = 1;
        for (int m = 0; m <= 3; ++m) {
            if (m > 0) fact *= m;
            Jet expect(ch);
            int total = 1;
            for (int t = 0; t < 2 * m; ++t) total *= 4;
            for (int code = 0; code < total; ++code) {
                int idx[6], c = code;
                for (int t = 0; t < 2 * m; ++t) {
                    idx[t] = c % 4;
                    c /= 4;
                }
                cplx kprod = 1.0;
                Jet a = u, b = w;
                for (int t = 0; t < m; ++t) {
                    kprod *= kernel(idx[t], idx[m + t]);
                    a = partial(a, idx[t]);
                    b = partial(b, idx[m + t]);
                }
                if (kprod == cplx{}) continue;
                expect.fma(a, b, kprod);
            }
            expect *= std::pow(I / 2.0, m) / fact;
            CHECK(jet_distance(s[m], expect) < 1e-12);
        }
    }
}

TEST_CASE("Fedosov-Weyl curvature") {
    const Built& f = flat();
    CurvatureReport fr = weyl_curvature(f.state);
    CHECK(fr.omega_v.norm() == 0);
    CHECK(fr.central_defect == 0);

    const Built& c = curved();
    CurvatureReport cr = weyl_curvature(c.state);
    CHECK(cr.central_defect < 1e-9);
    CHECK(cr.omega_v.norm() < 1e-9);
    CHECK(cr.closure < 1e-8);
    // centrality: C commutes with probes through the verified degrees
    WeylForm C = cr.C.filter([](std::uint64_t k) { return wkey::total(k) <= 5; });
    for (int a = 0; a < 4; ++a) {
        WeylForm z = weyl_z(c.geo->chart, c.state.caps, a);
        WeylForm com = commutator(C, z, c.state.kernel).filter([](std::uint64_t k) { return wkey::total(k) <= 6; });
        CHECK(com.norm() < 1e-9);
    }
}

TEST_CASE("gauge equivalent states") {
    const Built& c = curved1();
    const FedosovState& s = c.state;
    CHECK(s.flatness.pass);
    const ChartPtr& ch = c.geo->chart;

    WeylForm unit = weyl_constant(ch, s.caps, Jet::constant(ch, 1.0));
    FedosovState same = gauge_transform(s, unit);
    CHECK((same.r_total - s.r_total).norm() < 1e-15);

    WeylForm B = unit + v_shift(weyl_z(ch, s.caps, 0), 1);
    FedosovState t = gauge_transform(s, B);
    CHECK(t.flatness.pass);
    CHECK((t.r_total - s.r_total).norm() > 1e-6);

    auto a = star_table(s, 2, 2), b = star_table(t, 2, 2);
    REQUIRE(a.size() == b.size());
    double diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i].value - b[i].value));
    CHECK(diff < 1e-8);

    CurvatureReport ca = weyl_curvature(s), cb = weyl_curvature(t);
    CHECK((ca.omega_v - cb.omega_v).norm() < 1e-9);

    // conjugated flat sections are flat for the new connection
    Jet u = jet_of("x1*y1 + y1^2", ch);
    WeylForm chi = chi_lift(u, s, 6);
    WeylForm Bc = B.filter([](std::uint64_t k) { return wkey::total(k) <= 6; });
    WeylForm conj = wick_product(wick_product(Bc, chi, s.kernel), weyl_inverse(Bc, s.kernel, 6), s.kernel);
    WeylForm d = fedosov_d(conj, t).filter([](std::uint64_t k) { return wkey::total(k) <= 3; });
    CHECK(d.norm() < 1e-9);
}

TEST_CASE("weyl inverse") {
    const Built& c = curved1();
    const ChartPtr& ch = c.geo->chart;
    WeylForm unit = weyl_constant(ch, c.state.caps, Jet::constant(ch, 1.0));
    WeylForm B = unit + weyl_z(ch, c.state.caps, 1, 0.5) + v_shift(weyl_z(ch, c.state.caps, 0), 1);
    WeylForm inv = weyl_inverse(B, c.state.kernel, 5);
    WeylForm p = wick_product(B, inv, c.state.kernel).filter([](std::uint64_t k) { return wkey::total(k) <= 5; });
    CHECK((p - unit).norm() < 1e-13);
    CHECK_THROWS_AS(weyl_inverse(cplx(2.0) * unit, c.state.kernel, 5), Error);
}

TEST_CASE("flat endomorphisms") {
    const Built& c = curved();
    const ChartPtr& ch = c.geo->chart;
    Jet one = Jet::constant(ch, 1.0), zero = Jet::constant(ch, 0.0);
    auto id = flat_endomorphism_check({{one, zero}, {zero, one}}, c.state);
    CHECK(id.pass);
    auto proj = flat_endomorphism_check({{one, zero}, {zero, zero}}, c.state);
    CHECK(proj.pass);
    CHECK(proj.chi_defect < 1e-10);
    CHECK(proj.flat_defect < 1e-10);
    auto moving = flat_endomorphism_check({{Jet::variable(ch, 0), zero}, {zero, one}}, c.state);
    CHECK_FALSE(moving.pass);
    CHECK(moving.flat_defect > 0.5);
}
