#include "fedq/einstein.hpp"

#include <algorithm>
#include <cmath>

namespace fedq {

namespace {

Jet constant(const ChartPtr& ch, double v) { return Jet::constant(ch, v); }

double at_base(const Jet& j) { return std::abs(j.value()); }

Jet abs_pow(const Jet& a, long num, long den) { return jet_pow(jet_abs(a), num, den); }

int sign_at_base(const Jet& j) { return j.value().real() < 0 ? -1 : 1; }

Jet laplacian_x(const Jet& f) { return partial(partial(f, 0), 0) + partial(partial(f, 1), 1); }

Jet n_integrand(const Jet& h3, const Jet& h4) { return abs_pow(h3, 1, 2) / abs_pow(h4, 3, 2); }

Jet h4_integral(const Jet& phi, const Jet& lambda_v, int s) {
    Jet e2 = jet_exp(2.0 * phi);
    return antiderivative(partial(e2, kT) / lambda_v, kT) * (0.25 * s);
}

void push(std::vector<ResidualEntry>& v, std::string name, std::string tag, const Jet& r) {
    v.push_back({std::move(name), std::move(tag), r.norm()});
}

double max_value(const std::vector<ResidualEntry>& v) {
    double m = 0;
    for (auto& e : v) m = std::max(m, e.value);
    return m;
}

bool is_constant(const Jet& j) {
    for (std::size_t k = 1; k < j.coeffs().size(); ++k)
        if (std::abs(j.coeff(k)) > 0) return false;
    return true;
}

}  // namespace

ChartPtr einstein_chart(std::vector<double> base, int order) {
    return Chart::make(2, {"x1", "x2", "t", "y4"}, std::move(base), order);
}

AnsatzData minkowski_ansatz(const ChartPtr& chart) {
    AnsatzData d;
    d.chart = chart;
    d.psi = constant(chart, 0);
    d.h3 = constant(chart, -1);
    d.h4 = constant(chart, 1);
    for (int i = 0; i < 2; ++i) {
        d.w[i] = constant(chart, 0);
        d.n[i] = constant(chart, 0);
    }
    d.omega = constant(chart, 1);
    d.lambda_h = constant(chart, 0);
    d.lambda_v = constant(chart, 0);
    return d;
}

void check_signature(const AnsatzData& d) {
    double h3 = d.h3.value().real();
    double h4 = (d.omega * d.omega * d.h4).value().real();
    if (!(h3 < 0) || !(h4 > 0))
        throw SignatureViolation("signature (+,+,-,+) violated: h3 = " + std::to_string(h3) +
                                 ", omega^2 h4 = " + std::to_string(h4));
}

GeometryData build_ansatz(const AnsatzData& d) {
    check_signature(d);
    const ChartPtr& ch = d.chart;
    JetTensor gh(ch, {2, 2}), gv(ch, {2, 2}), N(ch, {2, 2});
    Jet ep = jet_exp(d.psi);
    gh(0, 0) = ep;
    gh(1, 1) = ep;
    gv(0, 0) = d.h3;
    gv(1, 1) = d.omega * d.omega * d.h4;
    for (int i = 0; i < 2; ++i) {
        N(0, i) = d.w[i];
        N(1, i) = d.n[i];
    }
    return dmetric_geometry(ch, gh, gv, N);
}

HorizontalSolution solve_horizontal(const Jet& lambda_h, const Jet& psi) {
    HorizontalSolution s;
    s.psi = psi;
    Jet lap = laplacian_x(psi);
    s.residual = lap - 2.0 * lambda_h * jet_exp(psi);
    s.linear_residual = lap - 2.0 * lambda_h;
    return s;
}

HorizontalSolution solve_horizontal(const Jet& lambda_h) {
    if (!is_constant(lambda_h))
        throw DomainError("closed-form horizontal solution needs a constant lambda_h; supply psi");
    const ChartPtr& ch = lambda_h.chart();
    Jet r2 = Jet::variable(ch, 0) * Jet::variable(ch, 0) + Jet::variable(ch, 1) * Jet::variable(ch, 1);
    Jet q = constant(ch, 1) - 0.25 * lambda_h * r2;
    if (q.value().real() <= 0) throw DomainError("base point outside the horizontal solution domain");
    return solve_horizontal(lambda_h, -2.0 * jet_log(q));
}

AnsatzData generate_solution(const GeneratorInput& in) {
    const ChartPtr& ch = in.phi.chart();
    AnsatzData d;
    d.chart = ch;
    d.phi = in.phi;
    d.lambda_v = in.lambda_v;
    d.lambda_h = in.lambda_h.valid() ? in.lambda_h : constant(ch, 0);
    Jet phi_t = partial(in.phi, kT);
    if (at_base(phi_t) < 1e-12) throw DomainError("phi^* vanishes at the base point");
    if (at_base(in.lambda_v) < 1e-12) throw DomainError("lambda_v vanishes at the base point");
    const int s = in.sign_h3h4 < 0 ? -1 : 1;

    d.h4_0 = in.h4_0.valid() ? in.h4_0 : constant(ch, 1);
    d.h4 = d.h4_0 + h4_integral(in.phi, in.lambda_v, s);
    Jet h4t = partial(d.h4, kT);
    d.h3 = double(s) * h4t * h4t * jet_exp(-2.0 * in.phi) / d.h4;

    Jet integ = antiderivative(n_integrand(d.h3, d.h4), kT);
    for (int i = 0; i < 2; ++i) {
        d.w[i] = partial(in.phi, i) / phi_t;
        d.n1[i] = in.n1[i].valid() ? in.n1[i] : constant(ch, 0);
        d.n2[i] = in.n2[i].valid() ? in.n2[i] : constant(ch, 0);
        d.n[i] = d.n1[i] + d.n2[i] * integ;
    }
    d.psi = in.psi.valid() ? in.psi : solve_horizontal(d.lambda_h).psi;
    d.omega = in.omega.valid() ? in.omega : constant(ch, 1);

    d.sign_phi_t = sign_at_base(phi_t);
    d.sign_h3 = sign_at_base(d.h3);
    d.sign_h4 = sign_at_base(d.h4);
    check_signature(d);
    return d;
}

const ResidualEntry* EinsteinReport::worst() const {
    const ResidualEntry* w = nullptr;
    for (auto* v : {&reduced, &pipeline})
        for (auto& e : *v)
            if (!w || e.value > w->value) w = &e;
    return w;
}

EinsteinReport residual_full(const AnsatzData& d, double tol) {
    EinsteinReport rep;
    rep.tolerance = tol;
    auto& red = rep.reduced;

    push(red, "horizontal", "h-block field equation", solve_horizontal(d.lambda_h, d.psi).residual);

    const Jet& h3 = d.h3;
    const Jet& h4 = d.h4;
    Jet h3t = partial(h3, kT), h4t = partial(h4, kT), h4tt = partial(h4t, kT);
    Jet lh3 = h3t / h3, lh4 = h4t / h4;
    // beta = h4^* phi^*, alpha_i = h4^* d_i phi for phi = log|h4^* / sqrt|h3 h4||
    Jet beta = h4tt - 0.5 * h4t * (lh3 + lh4);
    push(red, "vertical", "v-block field equation", beta - 2.0 * d.lambda_v * h3 * h4);
    for (int i = 0; i < 2; ++i) {
        Jet alpha = partial(h4t, i) - 0.5 * h4t * (partial(h3, i) / h3 + partial(h4, i) / h4);
        push(red, "w" + std::to_string(i + 1), "w constraint", beta * d.w[i] - alpha);
    }
    Jet gamma = 1.5 * lh4 - 0.5 * lh3;
    for (int i = 0; i < 2; ++i) {
        Jet nt = partial(d.n[i], kT);
        push(red, "n" + std::to_string(i + 1), "n equation", partial(nt, kT) + gamma * nt);
    }
    for (int k = 0; k < 2; ++k) {
        Jet ek = partial(d.omega, k) - d.w[k] * partial(d.omega, kT) - d.n[k] * partial(d.omega, kY4);
        push(red, "omega" + std::to_string(k + 1), "omega constraint", ek);
    }
    if (d.generated()) {
        Jet phi_h = jet_log(jet_abs(h4t)) - 0.5 * jet_log(jet_abs(h3 * h4));
        push(red, "phi", "generating function", d.phi - phi_h);
        push(red, "h4_integration", "integration data", h4 - d.h4_0 - h4_integral(d.phi, d.lambda_v, d.sign_h3 * d.sign_h4));
        Jet integ = antiderivative(n_integrand(h3, h4), kT);
        for (int i = 0; i < 2; ++i)
            push(red, "n" + std::to_string(i + 1) + "_integration", "integration data", d.n[i] - d.n1[i] - d.n2[i] * integ);
    }

    GeometryData geo = build_ansatz(d);
    DConnectionData c = full_dconnection(geo);
    double lh = d.lambda_h.value().real(), lv = d.lambda_v.value().real();
    EinsteinResidual er = einstein_residual(c, geo, lh, lv);
    double blocks[2][2] = {{0, 0}, {0, 0}};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double target = a == b ? (a < 2 ? -lh : -lv) : 0.0;
            double r = std::abs(er.ricci_mixed(a, b).value() - target);
            double& m = blocks[a / 2][b / 2];
            m = std::max(m, r);
        }
    rep.pipeline.push_back({"ricci_hh", "Ricci source equation", blocks[0][0]});
    rep.pipeline.push_back({"ricci_hv", "Ricci source equation", blocks[0][1]});
    rep.pipeline.push_back({"ricci_vh", "Ricci source equation", blocks[1][0]});
    rep.pipeline.push_back({"ricci_vv", "Ricci source equation", blocks[1][1]});
    rep.pipeline.push_back({"einstein", "Einstein tensor equation", er.einstein_residual});

    rep.reduced_max = max_value(rep.reduced);
    rep.pipeline_max = max_value(rep.pipeline);
    rep.reduced_pass = rep.reduced_max < tol;
    rep.pipeline_pass = rep.pipeline_max < tol;
    return rep;
}

std::string LcReport::classification() const {
    return levi_civita() ? "general relativity subclass" : "Einstein-Finsler";
}

LcReport lc_check(const AnsatzData& d, double tol) {
    LcReport rep;
    rep.tolerance = tol;
    GeometryData geo = build_ansatz(d);
    DConnectionData c = full_dconnection(geo);
    for (int cc = 0; cc < 2; ++cc)
        for (int a = 0; a < 2; ++a)
            for (int j = 0; j < 2; ++j)
                rep.l_constraint =
                    std::max(rep.l_constraint, (c.Lv(cc, a, j) - partial(geo.N(cc, j), 2 + a)).norm());
    rep.c_constraint = c.Ch.norm();
    rep.omega_constraint = geo.Omega.norm();
    Jet h4t = partial(d.h4, kT);
    for (int i = 0; i < 2; ++i)
        rep.aux_w = std::max(rep.aux_w, (partial(d.w[i], kT) + d.w[i] * h4t + partial(d.h4, i)).norm());
    rep.aux_curl = (partial(d.w[1], 0) - partial(d.w[0], 1)).norm();
    rep.distortion = distortion(c, geo).norm();
    rep.constraints_pass = rep.l_constraint < tol && rep.c_constraint < tol && rep.omega_constraint < tol;
    rep.constant_sources = is_constant(d.lambda_h) && is_constant(d.lambda_v) &&
                           std::abs(d.lambda_h.value() - d.lambda_v.value()) < tol;
    return rep;
}

FinslerVariables finsler_variables(const AnsatzData& d, const GeometryData& f, std::array<int, 4> signs) {
    if (f.g.dims() != std::vector<int>{4, 4}) throw DomainError("Finsler metric must be 4-dimensional");
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b && f.g(a, b).norm() > 1e-12) throw DomainError("Finsler metric is not diagonal");
    Jet ep = jet_exp(d.psi);
    std::array<Jet, 4> g0 = {ep, ep, d.h3, d.omega * d.omega * d.h4};
    FinslerVariables out;
    for (int a = 0; a < 4; ++a) {
        if (at_base(g0[a]) < 1e-14 || at_base(f.g(a, a)) < 1e-14)
            throw DomainError("zero diagonal metric entry");
        out.vierbein[a] = double(signs[a] < 0 ? -1 : 1) * jet_sqrt(jet_abs(f.g(a, a) / g0[a]));
    }
    const auto& e = out.vierbein;
    for (int i = 0; i < 2; ++i) {
        out.w0[i] = e[2] / e[i] * f.N(0, i);
        out.n0[i] = e[3] / e[i] * f.N(1, i);
        out.wc[i] = e[i] / e[2] * d.w[i];
        out.nc[i] = e[i] / e[3] * d.n[i];
    }
    for (int a = 0; a < 4; ++a)
        out.metric_roundtrip = std::max(out.metric_roundtrip, jet_distance(f.g(a, a), e[a] * e[a] * g0[a]));
    for (int i = 0; i < 2; ++i) {
        out.connection_roundtrip =
            std::max(out.connection_roundtrip, jet_distance(f.N(0, i), e[i] / e[2] * out.w0[i]));
        out.connection_roundtrip =
            std::max(out.connection_roundtrip, jet_distance(f.N(1, i), e[i] / e[3] * out.n0[i]));
    }
    return out;
}

std::vector<std::string> ansatz_function_names() { return {"psi", "h3", "h4", "w1", "w2", "n1", "n2"}; }

AnsatzData corrupt(const AnsatzData& d, const std::string& which, double eps) {
    AnsatzData c = d;
    const cplx f = 1.0 + eps;
    if (which == "psi") c.psi *= f;
    else if (which == "h3") c.h3 *= f;
    else if (which == "h4") c.h4 *= f;
    else if (which == "w1") c.w[0] *= f;
    else if (which == "w2") c.w[1] *= f;
    else if (which == "n1") c.n[0] *= f;
    else if (which == "n2") c.n[1] *= f;
    else throw DomainError("unknown ansatz function " + which);
    return c;
}

}  // namespace fedq
