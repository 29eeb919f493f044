#include "fedq/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedq/exprlang.hpp"

namespace fedq {

double round_sig(double x) {
    if (x == 0 || !std::isfinite(x)) return x == 0 ? 0.0 : x;
    char buf[40];
    for (int p = 1; p <= 15; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, x);
        double y = std::strtod(buf, nullptr);
        if (y == x) return y;
    }
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", round_sig(x));
    return buf;
}

Json number(double x) { return round_sig(x); }

Json complex_pair(cplx z) { return Json::array({number(z.real()), number(z.imag())}); }

Json jet_json(const Jet& f, int max_degree) {
    Json out = Json::array();
    const ChartPtr& ch = f.chart();
    int top = max_degree < 0 ? f.stored() : std::min(max_degree, f.stored());
    if (top < 0) return out;
    std::size_t lim = ch->size_upto(top);
    for (std::size_t k = 0; k < lim; ++k) {
        cplx c = f.coeff(k);
        if (c == cplx{}) continue;
        Json m = Json::array();
        for (int a = 0; a < ch->dim(); ++a) m.push_back(int(ch->mono(k)[a]));
        out.push_back(Json::array({m, complex_pair(c)}));
    }
    return out;
}

Json tensor_values(const JetTensor& t) {
    const auto& dims = t.dims();
    Json out = Json::array();
    if (t.rank() == 1) {
        for (int i = 0; i < dims[0]; ++i) out.push_back(complex_pair(t(i).value()));
    } else if (t.rank() == 2) {
        for (int i = 0; i < dims[0]; ++i) {
            Json row = Json::array();
            for (int j = 0; j < dims[1]; ++j) row.push_back(complex_pair(t(i, j).value()));
            out.push_back(row);
        }
    } else if (t.rank() == 3) {
        for (int i = 0; i < dims[0]; ++i) {
            Json m = Json::array();
            for (int j = 0; j < dims[1]; ++j) {
                Json row = Json::array();
                for (int k = 0; k < dims[2]; ++k) row.push_back(complex_pair(t(i, j, k).value()));
                m.push_back(row);
            }
            out.push_back(m);
        }
    } else {
        throw Error("tensor_values supports rank 1 to 3");
    }
    return out;
}

namespace {

// x as an exact decimal quotient without exponent notation
std::string decimal_literal(double x) {
    double r = round_sig(x);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.14e", std::abs(r));
    std::string s(buf);
    std::size_t e = s.find('e');
    int exponent = std::atoi(s.c_str() + e + 1);
    std::string digits;
    for (std::size_t i = 0; i < e; ++i)
        if (s[i] != '.') digits += s[i];
    int shift = exponent - 14;
    while (shift < 0 && digits.size() > 1 && digits.back() == '0') {
        digits.pop_back();
        ++shift;
    }
    std::string body = digits;
    if (shift > 0) body += "*10^" + std::to_string(shift);
    else if (shift < 0) body += "/10^" + std::to_string(-shift);
    return r < 0 ? "-" + body : body;
}

}  // namespace

std::string jet_expression(const Jet& f) {
    const ChartPtr& ch = f.chart();
    std::string out;
    if (f.stored() >= 0) {
        std::size_t lim = ch->size_upto(f.stored());
        for (std::size_t k = 0; k < lim; ++k) {
            cplx c = f.coeff(k);
            if (c.imag() != 0) throw DomainError("complex coefficient in an ansatz function");
            if (c.real() == 0 || round_sig(c.real()) == 0) continue;
            std::string term = "(" + decimal_literal(c.real()) + ")";
            for (int a = 0; a < ch->dim(); ++a) {
                int p = ch->mono(k)[a];
                if (!p) continue;
                double u0 = ch->base_point()[a];
                std::string off = u0 == 0 ? ch->names()[a] : "(" + ch->names()[a] + " - (" + decimal_literal(u0) + "))";
                term += "*" + off;
                if (p > 1) term += "^" + std::to_string(p);
            }
            out += out.empty() ? term : " + " + term;
        }
    }
    return out.empty() ? "0" : out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << text;
}

Json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DomainError("cannot read " + path);
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(path + ": " + e.what());
    }
}

Json geometry_json(const GeometryData& geo, const SymplecticCheck& sc) {
    Json j;
    j["n"] = geo.n;
    Json base = Json::array();
    for (double b : geo.chart->base_point()) base.push_back(number(b));
    j["base_point"] = base;
    j["N"] = tensor_values(geo.N);
    j["g_h"] = tensor_values(geo.gh);
    j["g_v"] = tensor_values(geo.gv);
    if (!geo.theta.empty()) j["theta"] = tensor_values(geo.theta);
    j["anholonomy"] = tensor_values(geo.Omega);
    j["d_theta_residual"] = number(sc.closure);
    j["potential_residual"] = number(sc.potential);
    return j;
}

Json flatness_json(const FlatnessReport& r) {
    Json j;
    Json by = Json::array();
    for (double x : r.by_degree) by.push_back(number(x));
    j["by_degree"] = by;
    j["verified_through"] = r.verified_through;
    j["probes"] = r.probes;
    j["max_residual"] = number(r.max_residual);
    j["pass"] = r.pass;
    return j;
}

namespace {

Json entries_json(const std::vector<ResidualEntry>& v) {
    Json out = Json::array();
    for (auto& e : v) out.push_back({{"name", e.name}, {"equation", e.tag}, {"value", number(e.value)}});
    return out;
}

}  // namespace

Json einstein_json(const EinsteinReport& r) {
    Json j;
    j["tolerance"] = number(r.tolerance);
    j["reduced"] = entries_json(r.reduced);
    j["pipeline"] = entries_json(r.pipeline);
    j["reduced_max"] = number(r.reduced_max);
    j["pipeline_max"] = number(r.pipeline_max);
    j["pass"] = r.pass();
    return j;
}

Json lc_json(const LcReport& r) {
    Json j;
    j["l_constraint"] = number(r.l_constraint);
    j["c_constraint"] = number(r.c_constraint);
    j["omega_constraint"] = number(r.omega_constraint);
    j["aux_w"] = number(r.aux_w);
    j["aux_curl"] = number(r.aux_curl);
    j["distortion"] = number(r.distortion);
    j["classification"] = r.classification();
    return j;
}

Json fingerprint_to_json(const Fingerprint& f) { return Json::parse(fingerprint_json(f)); }

EinsteinSpec einstein_spec_from_json(const Json& j) {
    EinsteinSpec s;
    try {
        s.phi = j.value("phi", s.phi);
        s.lambda_v = j.value("lambda_v", s.lambda_v);
        s.lambda_h = j.value("lambda_h", s.lambda_h);
        s.psi = j.value("psi", s.psi);
        s.h4_0 = j.value("h4_0", s.h4_0);
        s.omega = j.value("omega", s.omega);
        if (j.contains("n1")) s.n1 = j["n1"].get<std::array<std::string, 2>>();
        if (j.contains("n2")) s.n2 = j["n2"].get<std::array<std::string, 2>>();
        s.sign_h3h4 = j.value("sign_h3h4", s.sign_h3h4);
        if (j.contains("base")) s.base = j["base"].get<std::vector<double>>();
        s.order = j.value("order", s.order);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("einstein spec: ") + e.what());
    }
    if (s.base.size() != 4) throw DomainError("einstein spec: base point needs 4 coordinates");
    if (s.order < 3) throw DomainError("einstein spec: order must be at least 3");
    return s;
}

Json einstein_spec_json(const EinsteinSpec& s) {
    Json j;
    j["phi"] = s.phi;
    j["lambda_v"] = s.lambda_v;
    j["lambda_h"] = s.lambda_h;
    if (!s.psi.empty()) j["psi"] = s.psi;
    j["h4_0"] = s.h4_0;
    if (!s.omega.empty()) j["omega"] = s.omega;
    j["n1"] = s.n1;
    j["n2"] = s.n2;
    j["sign_h3h4"] = s.sign_h3h4;
    Json base = Json::array();
    for (double b : s.base) base.push_back(number(b));
    j["base"] = base;
    j["order"] = s.order;
    return j;
}

namespace {

Jet expr_jet(const std::string& text, const ChartPtr& ch) { return eval_jet(parse(text), ch); }

}  // namespace

AnsatzData generate_from_spec(const EinsteinSpec& s) {
    ChartPtr ch = einstein_chart(s.base, s.order);
    GeneratorInput in;
    in.phi = expr_jet(s.phi, ch);
    in.lambda_v = expr_jet(s.lambda_v, ch);
    in.lambda_h = expr_jet(s.lambda_h, ch);
    if (!s.psi.empty()) in.psi = expr_jet(s.psi, ch);
    in.h4_0 = expr_jet(s.h4_0, ch);
    if (!s.omega.empty()) in.omega = expr_jet(s.omega, ch);
    for (int i = 0; i < 2; ++i) {
        in.n1[i] = expr_jet(s.n1[i], ch);
        in.n2[i] = expr_jet(s.n2[i], ch);
    }
    in.sign_h3h4 = s.sign_h3h4;
    return generate_solution(in);
}

Json solution_bundle(const EinsteinSpec& spec, const AnsatzData& d, const EinsteinReport& rep, const LcReport& lc,
                     const Fingerprint& fp) {
    Json j;
    j["inputs"] = einstein_spec_json(spec);
    j["branch"] = {{"sign_phi_t", d.sign_phi_t}, {"sign_h3", d.sign_h3}, {"sign_h4", d.sign_h4}};
    Json a;
    a["psi"] = jet_expression(d.psi);
    a["h3"] = jet_expression(d.h3);
    a["h4"] = jet_expression(d.h4);
    a["w1"] = jet_expression(d.w[0]);
    a["w2"] = jet_expression(d.w[1]);
    a["n1"] = jet_expression(d.n[0]);
    a["n2"] = jet_expression(d.n[1]);
    a["omega"] = jet_expression(d.omega);
    j["ansatz"] = a;
    j["residuals"] = einstein_json(rep);
    j["levi_civita"] = lc_json(lc);
    j["fingerprint"] = fingerprint_to_json(fp);
    return j;
}

AnsatzData ansatz_from_bundle(const Json& bundle) {
    if (!bundle.contains("inputs") || !bundle.contains("ansatz")) throw DomainError("bundle needs inputs and ansatz");
    EinsteinSpec spec = einstein_spec_from_json(bundle["inputs"]);
    AnsatzData d = generate_from_spec(spec);
    const Json& a = bundle["ansatz"];
    ChartPtr ch = d.chart;
    auto get = [&](const char* key) {
        if (!a.contains(key) || !a[key].is_string()) throw DomainError(std::string("bundle misses ansatz ") + key);
        return expr_jet(a[key].get<std::string>(), ch);
    };
    d.psi = get("psi");
    d.h3 = get("h3");
    d.h4 = get("h4");
    d.w = {get("w1"), get("w2")};
    d.n = {get("n1"), get("n2")};
    d.omega = get("omega");
    if (bundle.contains("branch")) {
        const Json& b = bundle["branch"];
        d.sign_phi_t = b.value("sign_phi_t", d.sign_phi_t);
        d.sign_h3 = b.value("sign_h3", d.sign_h3);
        d.sign_h4 = b.value("sign_h4", d.sign_h4);
    }
    return d;
}

}  // namespace fedq
