#include <doctest.h>

#include <cmath>
#include <random>

#include "fedq/weyl.hpp"
#include "support.hpp"

using namespace fedq;

namespace {

const cplx I(0.0, 1.0);

Mono mono(std::initializer_list<int> m) {
    Mono out{};
    int a = 0;
    for (int v : m) out[a++] = static_cast<std::uint8_t>(v);
    return out;
}

Kernel standard_kernel(const ChartPtr& ch) {
    // b^{12} = 1 on a 2-dimensional fiber
    std::vector<std::vector<cplx>> b(ch->dim(), std::vector<cplx>(ch->dim(), 0.0));
    b[0][1] = 1.0;
    b[1][0] = -1.0;
    return Kernel(ch, b);
}

Kernel random_kernel(const ChartPtr& ch, std::mt19937& rng, bool constant) {
    const int d = ch->dim();
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Jet> k(d * d, Jet(ch));
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) {
            Jet t = constant ? Jet::constant(ch, u(rng)) : fedq::testing::random_jet(ch, rng);
            k[a * d + b] = t;
            k[b * d + a] = -t;
        }
    // symmetric part, as in theta - i g
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            Jet s = Jet::constant(ch, cplx(0, u(rng)));
            k[a * d + b] += s;
            if (b != a) k[b * d + a] += s;
        }
    return Kernel(ch, k);
}

WeylForm random_form(const ChartPtr& ch, const WeylCaps& caps, std::mt19937& rng, int terms, int max_z,
                     int max_forms, int max_v = 1) {
    std::uniform_int_distribution<int> zd(0, max_z), vd(0, max_v), fd(0, (1 << ch->dim()) - 1);
    WeylForm w(ch, caps);
    for (int t = 0; t < terms; ++t) {
        Mono m{};
        int deg = zd(rng);
        std::uniform_int_distribution<int> pick(0, ch->dim() - 1);
        for (int k = 0; k < deg; ++k) ++m[pick(rng)];
        unsigned A = fd(rng);
        while (__builtin_popcount(A) > max_forms) A &= A - 1;
        w.add(vd(rng), m, A, fedq::testing::random_jet(ch, rng));
    }
    return w;
}

double distance(const WeylForm& a, const WeylForm& b) {
    WeylForm d = a - b;
    return d.norm();
}

}  // namespace

TEST_CASE("wick product examples") {
    auto ch = Chart::make(1, {0, 0}, 2);
    WeylCaps caps;
    Kernel K = standard_kernel(ch);
    WeylForm z1 = weyl_z(ch, caps, 0), z2 = weyl_z(ch, caps, 1);
    WeylForm p = wick_product(z1, z2, K);
    CHECK(p.terms().size() == 2);
    CHECK(std::abs(p.coeff(0, mono({1, 1}), 0).value() - 1.0) < 1e-15);
    CHECK(std::abs(p.coeff(1, Mono{}, 0).value() - I / 2.0) < 1e-15);

    WeylForm c = p - wick_product(z2, z1, K);
    c.prune();
    CHECK(c.terms().size() == 1);
    CHECK(std::abs(c.coeff(1, Mono{}, 0).value() - I) < 1e-15);
    CHECK(distance(commutator(z1, z2, K), c) < 1e-15);

    std::mt19937 rng(1);
    WeylForm a = random_form(ch, caps, rng, 6, 3, 2);
    WeylForm one = weyl_constant(ch, caps, Jet::constant(ch, 1.0));
    CHECK(distance(wick_product(a, one, K), a) < 1e-15);
    CHECK(distance(wick_product(one, a, K), a) < 1e-15);
}

TEST_CASE("delta, delta inverse and sigma examples") {
    auto ch = Chart::make(1, {0, 0}, 2);
    WeylCaps caps;
    WeylForm z1 = weyl_z(ch, caps, 0), z2 = weyl_z(ch, caps, 1);
    Kernel K = standard_kernel(ch);
    CHECK(distance(delta(z1), weyl_form1(ch, caps, 0)) == 0);
    CHECK(delta(weyl_constant(ch, caps, Jet::variable(ch, 0))).empty());

    WeylForm z12 = z_multiply(z2, 0);
    WeylForm expect = form_multiply(0, z2) + form_multiply(1, z1);
    CHECK(distance(delta(z12), expect) < 1e-15);

    CHECK(distance(delta_inv(weyl_form1(ch, caps, 0)), z1) < 1e-15);
    CHECK(delta_inv(weyl_constant(ch, caps, Jet::constant(ch, 2.0))).empty());
    CHECK(distance(delta_inv(delta(z12)) + delta(delta_inv(z12)), z12) < 1e-15);

    WeylForm mixed = weyl_constant(ch, caps, Jet::variable(ch, 1)) + z_multiply(weyl_constant(ch, caps, Jet::variable(ch, 0)), 0) +
                     form_multiply(1, weyl_constant(ch, caps, Jet::constant(ch, 3.0)));
    CHECK(distance(sigma(mixed), weyl_constant(ch, caps, Jet::variable(ch, 1))) == 0);
    std::mt19937 rng(2);
    CHECK(sigma(delta_inv(random_form(ch, caps, rng, 8, 3, 2))).empty());
}

TEST_CASE("homotopy identity and nilpotency on random elements") {
    std::mt19937 rng(3);
    for (int n : {1, 2}) {
        auto ch = Chart::make(n, std::vector<double>(2 * n, 0.1), 2);
        WeylCaps caps{3, 10, 1 << 20};
        for (int t = 0; t < 10; ++t) {
            WeylForm a = random_form(ch, caps, rng, 10, 4, 2 * n);
            WeylForm h = sigma(a) + delta(delta_inv(a)) + delta_inv(delta(a));
            CHECK(distance(h, a) < 1e-13);
            CHECK(delta(delta(a)).norm() < 1e-13);
            CHECK(delta_inv(delta_inv(a)).norm() < 1e-13);
        }
    }
}

TEST_CASE("wick product is associative") {
    std::mt19937 rng(4);
    for (int n : {1, 2}) {
        auto ch = Chart::make(n, std::vector<double>(2 * n, 0.0), 2);
        WeylCaps caps{12, 16, 1 << 20};
        for (bool constant : {true, false}) {
            Kernel K = random_kernel(ch, rng, constant);
            for (int t = 0; t < 4; ++t) {
                WeylForm a = random_form(ch, caps, rng, 4, 3, 2);
                WeylForm b = random_form(ch, caps, rng, 4, 3, 2);
                WeylForm c = random_form(ch, caps, rng, 4, 3, 2);
                WeylForm l = wick_product(wick_product(a, b, K), c, K);
                WeylForm r = wick_product(a, wick_product(b, c, K), K);
                CHECK(l.overflow() == 0);
                CHECK(distance(l, r) < 1e-9);
            }
        }
    }
}

TEST_CASE("delta is a graded derivation of the wick product") {
    std::mt19937 rng(5);
    auto ch = Chart::make(2, std::vector<double>(4, 0.0), 2);
    WeylCaps caps{12, 16, 1 << 20};
    Kernel K = random_kernel(ch, rng, false);
    for (int t = 0; t < 5; ++t) {
        WeylForm a = random_form(ch, caps, rng, 4, 3, 0);
        WeylForm b = random_form(ch, caps, rng, 4, 3, 2);
        // a has form degree 1 after wedging a one-form
        WeylForm a1 = form_multiply(t % 4, a);
        for (const WeylForm* x : {&a, &a1}) {
            int parity = x == &a1 ? -1 : 1;
            WeylForm lhs = delta(wick_product(*x, b, K));
            WeylForm rhs = wick_product(delta(*x), b, K) + cplx(parity) * wick_product(*x, delta(b), K);
            CHECK(distance(lhs, rhs) < 1e-10);
        }
    }
}

TEST_CASE("filtration: total degree is additive") {
    std::mt19937 rng(6);
    auto ch = Chart::make(2, std::vector<double>(4, 0.0), 1);
    WeylCaps caps{12, 16, 1 << 20};
    Kernel K = random_kernel(ch, rng, true);
    for (int t = 0; t < 20; ++t) {
        WeylForm a = random_form(ch, caps, rng, 1, 4, 1);
        WeylForm b = random_form(ch, caps, rng, 1, 4, 1);
        if (a.empty() || b.empty()) continue;
        WeylForm p = wick_product(a, b, K);
        int expect = a.min_total_degree() + b.min_total_degree();
        for (auto& [k, c] : p.terms()) CHECK(wkey::total(k) == expect);
        // the bound is realized: contracting all z of the lower factor
        int zmin = std::min(wkey::zdeg(a.terms().begin()->first), wkey::zdeg(b.terms().begin()->first));
        int vmax = 0;
        for (auto& [k, c] : p.terms()) vmax = std::max(vmax, wkey::vpow(k) - wkey::vpow(a.terms().begin()->first) - wkey::vpow(b.terms().begin()->first));
        CHECK(vmax <= zmin);
    }
}

TEST_CASE("block-diagonal kernel keeps horizontal elements horizontal") {
    std::mt19937 rng(7);
    auto ch = Chart::make(2, std::vector<double>(4, 0.0), 1);
    WeylCaps caps{12, 16, 1 << 20};
    std::vector<std::vector<cplx>> b(4, std::vector<cplx>(4, 0.0));
    b[0][1] = 1.0;
    b[1][0] = -1.0;
    b[2][3] = 2.0;
    b[3][2] = -2.0;
    Kernel K(ch, b);
    auto horizontal = [&](int terms) {
        WeylForm w(ch, caps);
        std::uniform_int_distribution<int> e(0, 3);
        for (int t = 0; t < terms; ++t) w.add(0, mono({e(rng), e(rng)}), 0, fedq::testing::random_jet(ch, rng));
        return w;
    };
    WeylForm p = wick_product(horizontal(4), horizontal(4), K);
    for (auto& [k, c] : p.terms()) {
        Mono z = wkey::zeta(k);
        CHECK(z[2] == 0);
        CHECK(z[3] == 0);
    }
}

TEST_CASE("cap overflow is counted") {
    auto ch = Chart::make(1, {0, 0}, 1);
    WeylCaps caps{3, 2, 1 << 20};
    Kernel K = standard_kernel(ch);
    WeylForm z1 = weyl_z(ch, caps, 0);
    WeylForm p = wick_product(z1, wick_product(z1, z1, K), K);
    CHECK(p.overflow() > 0);
}

TEST_CASE("wedge signs") {
    CHECK(wedge_sign(0b01, 0b10) == 1);
    CHECK(wedge_sign(0b10, 0b01) == -1);
    CHECK(wedge_sign(0b11, 0b01) == 0);
    CHECK(wedge_sign(0b100, 0b011) == 1);
    CHECK(wedge_sign(0b010, 0b101) == -1);
}
