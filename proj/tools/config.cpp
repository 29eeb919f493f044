#include "config.hpp"

#include <fedq/exprlang.hpp>

namespace fedq::cli {

namespace {

void check_expression(const std::string& text, const std::string& where) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        throw InputError(where + ": " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InputError(std::string("config field '") + key + "' has the wrong type");
    }
}

ChartSpec parse_chart(const Json& j) {
    ChartSpec c;
    c.n = get_or(j, "n", c.n);
    c.names = get_or(j, "names", c.names);
    c.order = get_or(j, "order", c.order);
    c.base = get_or(j, "base", std::vector<double>(2 * c.n, 0.0));
    if (c.n < 1 || c.n > 3) throw InputError("chart dimension n must be 1, 2 or 3");
    if (int(c.base.size()) != 2 * c.n) throw InputError("base point needs 2n coordinates");
    if (!c.names.empty() && int(c.names.size()) != 2 * c.n) throw InputError("names needs 2n entries");
    if (c.order < 2) throw InputError("jet order must be at least 2");
    return c;
}

}  // namespace

ChartPtr make_chart(const ChartSpec& c) {
    if (c.names.empty()) return Chart::make(c.n, c.base, c.order);
    return Chart::make(c.n, c.names, c.base, c.order);
}

RunConfig parse_config(const Json& j, const Overrides& o) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    RunConfig r;
    if (j.contains("chart")) r.chart = parse_chart(j["chart"]);
    else r.chart.base.assign(2 * r.chart.n, 0.0);

    r.lagrangian = get_or(j, "lagrangian", std::string());
    if (!r.lagrangian.empty()) check_expression(r.lagrangian, "lagrangian");

    if (j.contains("weyl")) {
        const Json& w = j["weyl"];
        r.weyl.K_max = get_or(w, "K_max", r.weyl.K_max);
        r.weyl.v_max = get_or(w, "v_max", r.weyl.v_max);
        r.weyl.s_max = get_or(w, "s_max", r.weyl.s_max);
        r.weyl.moyal = get_or(w, "moyal", r.weyl.moyal);
    }
    if (j.contains("star")) {
        r.star_mono_degree = get_or(j["star"], "max_mono_degree", r.star_mono_degree);
        r.star_order = get_or(j["star"], "order", r.star_order);
    }
    if (j.contains("bundle")) {
        const Json& b = j["bundle"];
        r.bundle_rank = get_or(b, "rank", r.bundle_rank);
        r.bundle_gamma = get_or(b, "gamma", r.bundle_gamma);
        if (r.bundle_rank < 1) throw InputError("bundle rank must be positive");
        if (!r.bundle_gamma.empty()) {
            if (int(r.bundle_gamma.size()) != r.bundle_rank) throw InputError("bundle gamma must be rank x rank");
            for (auto& row : r.bundle_gamma) {
                if (int(row.size()) != r.bundle_rank) throw InputError("bundle gamma must be rank x rank");
                for (auto& entry : row) {
                    if (int(entry.size()) != 2 * r.chart.n) throw InputError("bundle gamma entries need 2n coefficients");
                    for (auto& e : entry) check_expression(e, "bundle gamma");
                }
            }
        }
    }
    if (j.contains("gauge")) {
        for (const Json& t : j["gauge"]) {
            GaugeTerm g;
            g.coeff = get_or(t, "coeff", std::string("0"));
            g.z = get_or(t, "z", std::vector<int>(2 * r.chart.n, 0));
            g.v = get_or(t, "v", 0);
            check_expression(g.coeff, "gauge coefficient");
            if (int(g.z.size()) != 2 * r.chart.n) throw InputError("gauge z exponents need 2n entries");
            int deg = 2 * g.v;
            for (int e : g.z) deg += e;
            if (deg < 1) throw InputError("gauge terms must have positive total degree");
            r.gauge.push_back(g);
        }
    }
    if (j.contains("einstein")) {
        const Json& e = j["einstein"];
        try {
            if (e.is_array()) {
                for (const Json& item : e) r.einstein.push_back(einstein_spec_from_json(item));
            } else {
                r.einstein.push_back(einstein_spec_from_json(e));
            }
        } catch (const DomainError& err) {
            throw InputError(err.what());
        }
        for (auto& s : r.einstein) {
            for (const std::string* t : {&s.phi, &s.lambda_v, &s.lambda_h, &s.h4_0, &s.n1[0], &s.n1[1], &s.n2[0], &s.n2[1]})
                check_expression(*t, "einstein spec");
            if (!s.psi.empty()) check_expression(s.psi, "einstein psi");
            if (!s.omega.empty()) check_expression(s.omega, "einstein omega");
        }
    }
    r.tolerance = get_or(j, "tolerance", r.tolerance);
    r.output = get_or(j, "output", r.output);

    if (o.output) r.output = *o.output;
    if (o.tolerance) r.tolerance = *o.tolerance;
    if (o.deg) r.weyl.K_max = *o.deg;
    if (o.jobs) r.jobs = std::max(1, *o.jobs);
    if (!(r.tolerance > 0)) throw InputError("tolerance must be positive");
    r.weyl.tol = r.tolerance;
    return r;
}

RunConfig load_config(const std::string& path, const Overrides& o) {
    Json j;
    try {
        j = read_json_file(path);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    return parse_config(j, o);
}

}  // namespace fedq::cli
