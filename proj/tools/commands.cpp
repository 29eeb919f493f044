#include "commands.hpp"

#include <filesystem>
#include <future>

#include <fedq/exprlang.hpp>

namespace fedq::cli {

namespace {

std::string out_path(const std::string& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

Jet expr(const std::string& text, const ChartPtr& ch) { return eval_jet(parse(text), ch); }

GeometryData geometry_of(const RunConfig& cfg) {
    if (cfg.lagrangian.empty()) throw InputError("config has no lagrangian");
    ChartPtr ch = make_chart(cfg.chart);
    return lagrange_geometry(expr(cfg.lagrangian, ch), false);
}

void require_quantizable(const RunConfig& cfg) {
    if (cfg.chart.n != 1 && cfg.chart.n != 2) throw InputError("quantize and index need n = 1 or 2");
}

FedosovState quantize(const RunConfig& cfg) {
    require_quantizable(cfg);
    auto geo = std::make_shared<const GeometryData>(geometry_of(cfg));
    auto conn = std::make_shared<const DConnectionData>(full_dconnection(*geo));
    return fedosov_recursion(geo, conn, cfg.weyl);
}

Json form_series_json(const FormSeries& f) {
    Json out = Json::array();
    for (auto& [key, c] : f.terms()) {
        cplx v = c.value();
        if (v == cplx{}) continue;
        Json form = Json::array();
        for (int a = 0; a < f.dim(); ++a)
            if (key.second & (1u << a)) form.push_back(a);
        out.push_back({{"v", key.first}, {"form", form}, {"value", complex_pair(v)}});
    }
    return out;
}

int fail(std::ostream& log, const std::string& invariant, const std::string& label, double value, double tol) {
    log << "invariant failure: " << invariant << " (" << label << ") = " << format_number(value)
        << " exceeds tolerance " << format_number(tol) << "\n";
    return kInvariantFailure;
}

MatrixFormSeries bundle_connection(const RunConfig& cfg, const GeometryData& geo) {
    const int k = cfg.bundle_rank, d = 2 * geo.n;
    MatrixFormSeries G;
    G.k = k;
    G.e.assign(k * k, FormSeries(geo.chart, d));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int a = 0; a < d; ++a) G(i, j).add(0, 1u << a, expr(cfg.bundle_gamma[i][j][a], geo.chart));
    return G;
}

WeylForm gauge_element(const RunConfig& cfg, const FedosovState& s) {
    const ChartPtr& ch = s.geo->chart;
    WeylForm B = weyl_constant(ch, s.caps, Jet::constant(ch, 1.0));
    for (const GaugeTerm& t : cfg.gauge) {
        WeylForm term = weyl_constant(ch, s.caps, expr(t.coeff, ch));
        for (int a = 0; a < int(t.z.size()); ++a)
            for (int p = 0; p < t.z[a]; ++p) term = z_multiply(term, a);
        B += v_shift(term, t.v);
    }
    return B;
}

struct EinsteinResult {
    Json bundle;
    bool pass = false;
    std::string worst;
    double worst_value = 0;
    std::string classification;
};

EinsteinResult run_einstein(const EinsteinSpec& spec, double tol) {
    AnsatzData d;
    try {
        d = generate_from_spec(spec);
    } catch (const SignatureViolation& e) {
        throw InputError(e.what());
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    EinsteinReport rep = residual_full(d, tol);
    LcReport lc = lc_check(d);
    GeometryData geo = build_ansatz(d);
    DConnectionData conn = full_dconnection(geo);
    EinsteinResult r;
    r.bundle = solution_bundle(spec, d, rep, lc, solution_fingerprint(geo, conn));
    r.pass = rep.pass();
    if (const ResidualEntry* w = rep.worst()) {
        r.worst = w->name + " (" + w->tag + ")";
        r.worst_value = w->value;
    }
    r.classification = lc.classification();
    return r;
}

}  // namespace

int cmd_geometry(const RunConfig& cfg, std::ostream& log) {
    GeometryData geo = geometry_of(cfg);
    SymplecticCheck sc = check_symplectic(geo);
    Json j = geometry_json(geo, sc);
    j["tolerance"] = number(cfg.tolerance);
    bool pass = sc.closure < cfg.tolerance;
    j["pass"] = pass;
    write_text(out_path(cfg.output, "geometry.json"), dump(j));
    if (!pass) return fail(log, "closure of theta", "d theta", sc.closure, cfg.tolerance);
    log << "geometry: d theta residual " << format_number(sc.closure) << "\n";
    return kPass;
}

int cmd_quantize(const RunConfig& cfg, std::ostream& log) {
    FedosovState s = quantize(cfg);
    Json j;
    j["K_max"] = s.opt.K_max;
    j["moyal"] = s.opt.moyal;
    Json rn = Json::array();
    for (const WeylForm& r : s.r_by_degree) rn.push_back(number(r.norm()));
    j["r_by_degree"] = rn;
    j["flatness"] = flatness_json(s.flatness);
    Json table = Json::array();
    for (const StarRow& row : star_table(s, cfg.star_mono_degree, cfg.star_order))
        table.push_back({{"f", row.f}, {"g", row.g}, {"order", row.order}, {"value", complex_pair(row.value)}});
    j["star_table"] = table;
    write_text(out_path(cfg.output, "quantize.json"), dump(j));
    if (!s.flatness.pass) return fail(log, "flatness of the Fedosov connection", "D_r^2", s.flatness.max_residual, cfg.tolerance);
    log << "quantize: flatness residual " << format_number(s.flatness.max_residual) << " through Deg "
        << s.flatness.verified_through << "\n";
    return kPass;
}

int cmd_index(const RunConfig& cfg, std::ostream& log) {
    FedosovState s = quantize(cfg);
    if (!cfg.gauge.empty()) s = gauge_transform(s, gauge_element(cfg, s));
    const GeometryData& geo = *s.geo;
    MatrixFormSeries Rv;
    if (cfg.bundle_gamma.empty()) {
        Rv.k = cfg.bundle_rank;
        Rv.e.assign(Rv.k * Rv.k, FormSeries(geo.chart, 2 * geo.n));
    } else {
        Rv = bundle_curvature(bundle_connection(cfg, geo), geo);
    }
    FormSeries ahat = ahat_genus(curvature_forms(*s.conn, geo));
    FormSeries ch = chern_character(Rv);
    FormSeries C = fedosov_weyl_class(s);
    Json j;
    j["ahat"] = form_series_json(ahat);
    j["chern_character"] = form_series_json(ch);
    j["weyl_curvature"] = form_series_json(C);
    Json cl = Json::array();
    for (auto& [k, c] : index_class(C, ahat, ch)) cl.push_back({{"v", k}, {"value", complex_pair(c.value())}});
    j["index_class"] = cl;
    j["fingerprint"] = fingerprint_to_json(solution_fingerprint(s));
    write_text(out_path(cfg.output, "index.json"), dump(j));
    write_text(out_path(cfg.output, "fingerprint.json"), fingerprint_json(solution_fingerprint(s)) + "\n");
    if (!s.flatness.pass) return fail(log, "flatness of the Fedosov connection", "D_r^2", s.flatness.max_residual, cfg.tolerance);
    log << "index: top component written for " << cl.size() << " powers of v\n";
    return kPass;
}

int cmd_einstein(const RunConfig& cfg, std::ostream& log) {
    if (cfg.einstein.empty()) throw InputError("config has no einstein spec");
    if (cfg.chart.n != 2) throw InputError("einstein needs n = 2");
    const std::size_t m = cfg.einstein.size();
    std::vector<EinsteinResult> results(m);
    for (std::size_t start = 0; start < m; start += cfg.jobs) {
        std::vector<std::future<EinsteinResult>> batch;
        for (std::size_t i = start; i < std::min(m, start + cfg.jobs); ++i)
            batch.push_back(std::async(cfg.jobs > 1 ? std::launch::async : std::launch::deferred, run_einstein,
                                       cfg.einstein[i], cfg.tolerance));
        for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
    }
    Json summary = Json::array();
    int code = kPass;
    for (std::size_t i = 0; i < m; ++i) {
        const EinsteinResult& r = results[i];
        std::string file = m == 1 ? "solution.json" : "solution_" + std::to_string(i) + ".json";
        write_text(out_path(cfg.output, file), dump(r.bundle));
        summary.push_back({{"bundle", file}, {"pass", r.pass}, {"classification", r.classification}});
        if (!r.pass) code = fail(log, "Einstein residual of item " + std::to_string(i), r.worst, r.worst_value, cfg.tolerance);
        else log << "einstein[" << i << "]: pass, " << r.classification << "\n";
    }
    write_text(out_path(cfg.output, "einstein.json"), dump(summary));
    return code;
}

int cmd_verify(const std::string& bundle_path, const Overrides& o, std::ostream& log) {
    Json bundle;
    AnsatzData d;
    try {
        bundle = read_json_file(bundle_path);
        d = ansatz_from_bundle(bundle);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    } catch (const SignatureViolation& e) {
        throw InputError(e.what());
    }
    const double tol = o.tolerance.value_or(1e-8);
    EinsteinReport rep;
    try {
        rep = residual_full(d, tol);
    } catch (const SignatureViolation& e) {
        log << "invariant failure: signature (+,+,-,+): " << e.what() << "\n";
        return kInvariantFailure;
    }
    LcReport lc = lc_check(d);
    Json j;
    j["residuals"] = einstein_json(rep);
    j["levi_civita"] = lc_json(lc);
    write_text(out_path(o.output.value_or("."), "verify.json"), dump(j));
    if (!rep.pass()) {
        const ResidualEntry* w = rep.worst();
        return fail(log, "Einstein residual", w->name + " (" + w->tag + ")", w->value, tol);
    }
    log << "verify: pass, " << lc.classification() << "\n";
    return kPass;
}

int run_command(const std::string& name, const std::string& config_path, const Overrides& o, std::ostream& log) {
    try {
        if (name == "verify") return cmd_verify(config_path, o, log);
        RunConfig cfg = load_config(config_path, o);
        if (name == "geometry") return cmd_geometry(cfg, log);
        if (name == "quantize") return cmd_quantize(cfg, log);
        if (name == "einstein") return cmd_einstein(cfg, log);
        if (name == "index") return cmd_index(cfg, log);
        throw InputError("unknown command " + name);
    } catch (const InputError& e) {
        log << "input error: " << e.what() << "\n";
    } catch (const ParseError& e) {
        log << "input error: " << e.what() << "\n";
    } catch (const DegenerateHessian& e) {
        log << "input error: " << e.what() << "\n";
    } catch (const CapOverflow& e) {
        log << "input error: " << e.what() << "\n";
    } catch (const InsufficientOrder& e) {
        log << "input error: " << e.what() << "; raise the chart order\n";
    } catch (const DomainError& e) {
        log << "input error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        log << "invariant failure: " << e.what() << "\n";
        return kInvariantFailure;
    }
    return kInputError;
}

}  // namespace fedq::cli
