#pragma once

#include <optional>
#include <string>
#include <vector>

#include <fedq/report.hpp>

namespace fedq::cli {

// exit code 2
class InputError : public Error {
public:
    using Error::Error;
};

struct ChartSpec {
    int n = 2;
    std::vector<std::string> names;  // empty: x1.., y1..
    std::vector<double> base;
    int order = 6;
};

struct GaugeTerm {
    std::string coeff;
    std::vector<int> z;
    int v = 0;
};

struct RunConfig {
    ChartSpec chart;
    std::string lagrangian;
    FedosovOptions weyl;
    int star_mono_degree = 1;
    int star_order = 3;
    int bundle_rank = 1;
    // gamma[i][j][alpha]: coefficient of e^alpha in the (i, j) entry of the bundle connection
    std::vector<std::vector<std::vector<std::string>>> bundle_gamma;
    std::vector<GaugeTerm> gauge;
    std::vector<EinsteinSpec> einstein;
    double tolerance = 1e-8;
    std::string output = ".";
    int jobs = 1;
};

struct Overrides {
    std::optional<std::string> output;
    std::optional<double> tolerance;
    std::optional<int> deg;
    std::optional<int> jobs;
};

// parses and validates; every expression is parsed once here
RunConfig parse_config(const Json& j, const Overrides& o = {});
RunConfig load_config(const std::string& path, const Overrides& o = {});

ChartPtr make_chart(const ChartSpec& c);

}  // namespace fedq::cli
