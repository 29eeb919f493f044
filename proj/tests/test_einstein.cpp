#include <doctest.h>

#include <cmath>

#include "fedq/einstein.hpp"
#include "support.hpp"

using namespace fedq;
using fedq::testing::jet_of;

namespace {

const std::vector<double> kBase{0.1, -0.2, 0.3, 0.5};

struct CorpusItem {
    const char* phi;
    const char* lambda_v;
    const char* lambda_h;
    const char* n1[2];
    const char* n2[2];
};

const CorpusItem kCorpus[] = {
    {"t", "1", "0", {"0", "0"}, {"0", "0"}},
    {"t + x1", "-1", "1", {"3/10", "0"}, {"0", "0"}},
    {"t + x1*t/2 + x2^2", "-1", "1/2", {"3/10", "x1/5"}, {"7/10", "2/5"}},
    {"sin(t) + x1*x2", "2", "-1/2", {"x2", "x1"}, {"1", "0"}},
    {"log(1 + t^2) + x1*t", "-1 - x1*t/4", "0", {"0", "0"}, {"1/2", "-1/2"}},
    {"t + exp(x1)*t^2/3", "-2", "1/4", {"1", "-1"}, {"0", "1/3"}},
};

AnsatzData generate(const CorpusItem& c, const ChartPtr& ch) {
    GeneratorInput in;
    in.phi = jet_of(c.phi, ch);
    in.lambda_v = jet_of(c.lambda_v, ch);
    in.lambda_h = jet_of(c.lambda_h, ch);
    for (int i = 0; i < 2; ++i) {
        in.n1[i] = jet_of(c.n1[i], ch);
        in.n2[i] = jet_of(c.n2[i], ch);
    }
    return generate_solution(in);
}

double value_of(const std::vector<ResidualEntry>& v, const std::string& name) {
    for (auto& e : v)
        if (e.name == name) return e.value;
    FAIL("missing residual " << name);
    return 0;
}

}  // namespace

TEST_CASE("Minkowski data") {
    auto ch = einstein_chart(kBase, 4);
    AnsatzData d = minkowski_ansatz(ch);
    GeometryData geo = build_ansatz(d);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double expect = a == b ? (a == 2 ? -1.0 : 1.0) : 0.0;
            CHECK(std::abs(geo.g_coord(a, b).value() - expect) == 0);
            CHECK(geo.g_coord(a, b).norm() == doctest::Approx(std::abs(expect)));
        }
    EinsteinReport rep = residual_full(d);
    CHECK(rep.reduced_max == 0);
    CHECK(rep.pipeline_max == 0);
    CHECK(rep.pass());
    LcReport lc = lc_check(d);
    CHECK(lc.levi_civita());
    CHECK(lc.distortion == 0);
}

TEST_CASE("coordinate metric of the off-diagonal ansatz") {
    auto ch = einstein_chart(kBase, 4);
    AnsatzData d = minkowski_ansatz(ch);
    d.psi = jet_of("x1*x2/3", ch);
    d.h3 = jet_of("-(2 + t*x1)", ch);
    d.h4 = jet_of("1 + t^2", ch);
    d.w[0] = jet_of("x2 + t/2", ch);
    d.n[1] = jet_of("x1*t", ch);
    GeometryData geo = build_ansatz(d);
    // expand e3 = dt + w_i dx^i, e4 = dy4 + n_i dx^i
    CHECK(jet_distance(geo.g_coord(0, 2), d.h3 * d.w[0]) < 1e-13);
    CHECK(jet_distance(geo.g_coord(1, 3), d.h4 * d.n[1]) < 1e-13);
    CHECK(geo.g_coord(1, 2).norm() < 1e-14);
    CHECK(jet_distance(geo.g_coord(0, 0), jet_exp(d.psi) + d.h3 * d.w[0] * d.w[0]) < 1e-13);
    CHECK(jet_distance(geo.g_coord(1, 1), jet_exp(d.psi) + d.h4 * d.n[1] * d.n[1]) < 1e-13);
    CHECK(jet_distance(geo.g_coord(2, 2), d.h3) < 1e-14);

    d.h3 = jet_of("1 + t", ch);
    CHECK_THROWS_AS(build_ansatz(d), SignatureViolation);
}

TEST_CASE("horizontal equation") {
    auto ch = einstein_chart(kBase, 6);
    HorizontalSolution zero = solve_horizontal(jet_of("0", ch));
    CHECK(zero.psi.norm() == 0);
    CHECK(zero.residual.norm() == 0);

    HorizontalSolution one = solve_horizontal(jet_of("1", ch));
    CHECK(one.residual.norm() < 1e-12);
    // psi = -2 log(1 - r^2/4) = r^2/2 + r^4/16 + ...
    for (double hx : {0.0, 0.05, -0.03})
        for (double hy : {0.0, 0.04}) {
            double x = kBase[0] + hx, y = kBase[1] + hy;
            double exact = -2.0 * std::log(1.0 - (x * x + y * y) / 4.0);
            CHECK(std::abs(one.psi.evaluate({hx, hy, 0, 0}) - exact) < 1e-9);
        }
    HorizontalSolution origin = solve_horizontal(jet_of("1", einstein_chart({0, 0, 0.3, 0.5}, 4)));
    CHECK(std::abs(origin.linear_residual.value()) < 1e-14);
    CHECK(std::abs(one.linear_residual.value()) > 1e-3);

    HorizontalSolution harmonic = solve_horizontal(jet_of("0", ch), jet_of("x1*x2", ch));
    CHECK(harmonic.residual.norm() < 1e-14);
    CHECK_THROWS_AS(solve_horizontal(jet_of("1 + x1", ch)), DomainError);

    // Gaussian curvature of e^psi |dx|^2 is -lambda_h
    for (double lh : {1.0, -0.5}) {
        AnsatzData d = minkowski_ansatz(ch);
        d.lambda_h = Jet::constant(ch, lh);
        d.psi = solve_horizontal(d.lambda_h).psi;
        EinsteinReport rep = residual_full(d);
        CHECK(value_of(rep.pipeline, "ricci_hh") < 1e-12);
        CHECK(value_of(rep.reduced, "horizontal") < 1e-12);
    }
}

TEST_CASE("generated solution for phi = t") {
    auto ch = einstein_chart(kBase, 6);
    AnsatzData d = generate(kCorpus[0], ch);
    CHECK(d.w[0].norm() == 0);
    CHECK(d.w[1].norm() == 0);
    CHECK(d.sign_h3 == -1);
    CHECK(d.sign_h4 == 1);
    const double t0 = kBase[2];
    for (double dt : {0.0, 0.02, -0.05}) {
        double t = t0 + dt;
        double h4 = 1.0 - (std::exp(2 * t) - std::exp(2 * t0)) / 4.0;
        double h3 = -std::exp(2 * t) / (4.0 * h4);
        CHECK(std::abs(d.h4.evaluate({0, 0, dt, 0}) - h4) < 1e-9);
        CHECK(std::abs(d.h3.evaluate({0, 0, dt, 0}) - h3) < 1e-6);
    }
    EinsteinReport rep = residual_full(d);
    CHECK(value_of(rep.reduced, "vertical") < 1e-12);
    CHECK(value_of(rep.reduced, "phi") < 1e-12);
    CHECK(rep.pass());
}

TEST_CASE("generated solution for phi = t + x1") {
    auto ch = einstein_chart(kBase, 5);
    AnsatzData d = generate(kCorpus[1], ch);
    CHECK(std::abs(d.w[0].value() - 1.0) < 1e-14);
    CHECK(d.w[0].norm() == doctest::Approx(1.0));
    CHECK(d.w[1].norm() < 1e-14);
    EinsteinReport rep = residual_full(d);
    CHECK(value_of(rep.reduced, "w1") < 1e-12);
    CHECK(rep.pass());
    // the opposite sign of w is not a solution
    AnsatzData flipped = d;
    flipped.w[0] *= -1.0;
    EinsteinReport bad = residual_full(flipped);
    CHECK(value_of(bad.pipeline, "ricci_vh") > 0.1);
    CHECK(value_of(bad.reduced, "w1") > 0.1);
}

TEST_CASE("n with constant integration data has vanishing t-derivative") {
    auto ch = einstein_chart(kBase, 5);
    CorpusItem c{"t + x1*x2", "1", "0", {"x1", "x2"}, {"0", "0"}};
    AnsatzData d = generate(c, ch);
    for (int i = 0; i < 2; ++i) CHECK(partial(d.n[i], kT).norm() == 0);
    CHECK(value_of(residual_full(d).reduced, "n1") == 0);
}

TEST_CASE("generator-verifier closure on the corpus") {
    auto ch = einstein_chart(kBase, 5);
    for (const auto& c : kCorpus) {
        CAPTURE(std::string(c.phi));
        AnsatzData d = generate(c, ch);
        EinsteinReport rep = residual_full(d);
        CHECK(rep.reduced_max < 1e-8);
        CHECK(rep.pipeline_max < 1e-8);
        CHECK(rep.reduced_pass == rep.pipeline_pass);
    }
}

TEST_CASE("ten percent corruption flips the verdict") {
    auto ch = einstein_chart(kBase, 5);
    for (const auto& c : kCorpus) {
        AnsatzData d = generate(c, ch);
        for (const auto& name : ansatz_function_names()) {
            AnsatzData bad = corrupt(d, name);
            EinsteinReport rep = residual_full(bad);
            CAPTURE(std::string(c.phi));
            CAPTURE(name);
            REQUIRE(residual_full(corrupt(d, name, 0.0)).pass());
            double size = 0;
            if (name == "psi") size = d.psi.norm();
            else if (name == "h3") size = d.h3.norm();
            else if (name == "h4") size = d.h4.norm();
            else if (name[0] == 'w') size = d.w[name[1] - '1'].norm();
            else size = d.n[name[1] - '1'].norm();
            if (size == 0) continue;
            CHECK_FALSE(rep.pass());
            // constant rescalings of h4 and n_i map solutions to solutions
            if (name == "h4" || name[0] == 'n') CHECK(rep.pipeline_pass);
            if (name == "h3") CHECK_FALSE(rep.pipeline_pass);
        }
    }
}

TEST_CASE("corruption scale in the reduced residuals") {
    auto ch = einstein_chart(kBase, 5);
    AnsatzData d = generate(kCorpus[2], ch);
    AnsatzData bad = corrupt(d, "h3");
    double h4t = std::abs(partial(d.h4, kT).value());
    double r = value_of(residual_full(bad).reduced, "vertical");
    CHECK(r > 0.01 * h4t);
    CHECK(r < 10 * h4t);
    AnsatzData scaled = corrupt(d, "h4");
    CHECK(value_of(residual_full(scaled).reduced, "h4_integration") ==
          doctest::Approx(0.1 * d.h4.norm()));
}

TEST_CASE("omega factor") {
    auto ch = einstein_chart(kBase, 5);
    CorpusItem c{"t", "-1", "0", {"3/10", "1/5"}, {"0", "0"}};
    AnsatzData d = generate(c, ch);
    d.omega = jet_of("exp((y4 + 3*x1/10 + x2/5)/5)", ch);
    EinsteinReport good = residual_full(d);
    CHECK(value_of(good.reduced, "omega1") < 1e-14);
    CHECK(value_of(good.reduced, "omega2") < 1e-14);
    CHECK(good.pass());

    d.omega = jet_of("1 + y4/5", ch);
    EinsteinReport bad = residual_full(d);
    CHECK(value_of(bad.reduced, "omega1") == doctest::Approx(0.3 / 5));
    CHECK_FALSE(bad.pass());
}

TEST_CASE("wrong source sign doubles the residual") {
    auto ch = einstein_chart(kBase, 5);
    AnsatzData d = generate(kCorpus[0], ch);
    d.lambda_v *= -1.0;
    EinsteinReport rep = residual_full(d);
    CHECK(value_of(rep.pipeline, "ricci_vv") == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("generator input errors") {
    auto ch = einstein_chart(kBase, 4);
    CorpusItem flat{"x1", "1", "0", {"0", "0"}, {"0", "0"}};
    CHECK_THROWS_AS(generate(flat, ch), DomainError);
    CorpusItem nolambda{"t", "0", "0", {"0", "0"}, {"0", "0"}};
    CHECK_THROWS_AS(generate(nolambda, ch), DomainError);
    GeneratorInput in;
    in.phi = jet_of("t", ch);
    in.lambda_v = jet_of("1", ch);
    in.sign_h3h4 = 1;
    CHECK_THROWS_AS(generate_solution(in), SignatureViolation);
}

TEST_CASE("Levi-Civita subclass") {
    auto ch = einstein_chart(kBase, 5);
    CorpusItem c{"t", "1", "1", {"1/3", "-1/4"}, {"0", "0"}};
    AnsatzData d = generate(c, ch);
    REQUIRE(residual_full(d).pass());
    LcReport lc = lc_check(d);
    CHECK(lc.l_constraint < 1e-9);
    CHECK(lc.c_constraint < 1e-9);
    CHECK(lc.omega_constraint < 1e-9);
    CHECK(lc.aux_w < 1e-9);
    CHECK(lc.aux_curl < 1e-9);
    CHECK(lc.distortion < 1e-9);
    CHECK(lc.classification() == "general relativity subclass");

    AnsatzData finsler = generate(kCorpus[2], ch);
    LcReport fl = lc_check(finsler);
    CHECK_FALSE(fl.levi_civita());
    CHECK(fl.distortion > 1e-3);
    CHECK(fl.classification() == "Einstein-Finsler");

    // constraints satisfied but different sources
    CorpusItem split{"t", "1", "0", {"0", "0"}, {"0", "0"}};
    LcReport sp = lc_check(generate(split, ch));
    CHECK(sp.constraints_pass);
    CHECK_FALSE(sp.levi_civita());
}

TEST_CASE("whenever the constraints hold the distortion vanishes") {
    auto ch = einstein_chart(kBase, 5);
    for (const auto& c : kCorpus) {
        LcReport lc = lc_check(generate(c, ch));
        if (lc.constraints_pass) CHECK(lc.distortion < 1e-9);
        else CHECK(lc.distortion > 1e-9);
    }
}

TEST_CASE("Finsler variables") {
    auto ch = einstein_chart(kBase, 5);
    AnsatzData d = generate(kCorpus[2], ch);
    auto fmetric = [&](double scale, const std::array<Jet, 2>& cw, const std::array<Jet, 2>& cn) {
        JetTensor gh(ch, {2, 2}), gv(ch, {2, 2}), N(ch, {2, 2});
        Jet ep = jet_exp(d.psi);
        gh(0, 0) = scale * ep;
        gh(1, 1) = scale * ep;
        gv(0, 0) = scale * d.h3;
        gv(1, 1) = scale * d.h4;
        for (int i = 0; i < 2; ++i) {
            N(0, i) = cw[i];
            N(1, i) = cn[i];
        }
        return dmetric_geometry(ch, gh, gv, N);
    };

    FinslerVariables same = finsler_variables(d, fmetric(1.0, d.w, d.n));
    for (int a = 0; a < 4; ++a) CHECK(jet_distance(same.vierbein[a], Jet::constant(ch, 1.0)) < 1e-12);
    for (int i = 0; i < 2; ++i) {
        CHECK(jet_distance(same.w0[i], d.w[i]) < 1e-12);
        CHECK(jet_distance(same.n0[i], d.n[i]) < 1e-12);
    }
    CHECK(same.metric_roundtrip < 1e-9);
    CHECK(same.connection_roundtrip < 1e-9);

    std::array<Jet, 2> cw = {jet_of("x2/3", ch), jet_of("t", ch)};
    std::array<Jet, 2> cn = {jet_of("1/2", ch), jet_of("x1*y4", ch)};
    FinslerVariables four = finsler_variables(d, fmetric(4.0, cw, cn));
    for (int a = 0; a < 4; ++a) CHECK(jet_distance(four.vierbein[a], Jet::constant(ch, 2.0)) < 1e-12);
    for (int i = 0; i < 2; ++i) CHECK(jet_distance(four.w0[i], cw[i]) < 1e-12);
    CHECK(four.metric_roundtrip < 1e-9);

    FinslerVariables flip = finsler_variables(d, fmetric(4.0, cw, cn), {1, 1, 1, -1});
    for (int a = 0; a < 3; ++a) CHECK(jet_distance(flip.vierbein[a], four.vierbein[a]) == 0);
    CHECK(jet_distance(flip.vierbein[3], -1.0 * four.vierbein[3]) == 0);
    for (int i = 0; i < 2; ++i) CHECK(jet_distance(flip.n0[i], -1.0 * four.n0[i]) < 1e-14);
    CHECK(flip.metric_roundtrip < 1e-9);

    // anisotropic rescaling: radical formulas against direct ratios
    JetTensor gh(ch, {2, 2}), gv(ch, {2, 2}), N(ch, {2, 2});
    Jet f1 = jet_of("2 + x1^2", ch), f2 = jet_of("3", ch), f3 = jet_of("-(1 + t^2)", ch), f4 = jet_of("5", ch);
    gh(0, 0) = f1;
    gh(1, 1) = f2;
    gv(0, 0) = f3;
    gv(1, 1) = f4;
    for (int i = 0; i < 2; ++i) {
        N(0, i) = cw[i];
        N(1, i) = cn[i];
    }
    FinslerVariables aniso = finsler_variables(d, dmetric_geometry(ch, gh, gv, N));
    Jet ep = jet_exp(d.psi);
    Jet expect = jet_sqrt(jet_abs(ep * f3 / (d.h3 * f1))) * cw[0];
    CHECK(jet_distance(aniso.w0[0], expect) < 1e-10);
    CHECK(aniso.metric_roundtrip < 1e-9);
    CHECK(aniso.connection_roundtrip < 1e-9);

    gh(0, 1) = jet_of("1/10", ch);
    gh(1, 0) = gh(0, 1);
    CHECK_THROWS_AS(finsler_variables(d, dmetric_geometry(ch, gh, gv, N)), DomainError);
}
