#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedq/einstein.hpp"
#include "fedq/fedosov.hpp"
#include "fedq/index.hpp"

namespace fedq {

using Json = nlohmann::ordered_json;

// shortest decimal that round-trips, capped at 15 significant digits
double round_sig(double x);
std::string format_number(double x);
Json number(double x);
Json complex_pair(cplx z);

// Taylor coefficients up to max_degree (-1: all stored) as [exponents, [re, im]] pairs
Json jet_json(const Jet& f, int max_degree = -1);
// base-point values of a tensor as nested [re, im] arrays
Json tensor_values(const JetTensor& t);
// polynomial in the offsets (u - u0), parseable by the expression language
std::string jet_expression(const Jet& f);

std::string dump(const Json& j);
void write_text(const std::string& path, const std::string& text);
Json read_json_file(const std::string& path);

Json geometry_json(const GeometryData& geo, const SymplecticCheck& sc);
Json flatness_json(const FlatnessReport& r);
Json einstein_json(const EinsteinReport& r);
Json lc_json(const LcReport& r);
Json fingerprint_to_json(const Fingerprint& f);

// Einstein generator input with expression strings
struct EinsteinSpec {
    std::string phi = "t";
    std::string lambda_v = "1";
    std::string lambda_h = "0";
    std::string psi;    // empty: solved from constant lambda_h
    std::string h4_0 = "1";
    std::string omega;  // empty: 1
    std::array<std::string, 2> n1{"0", "0"};
    std::array<std::string, 2> n2{"0", "0"};
    int sign_h3h4 = -1;
    std::vector<double> base{0.1, -0.2, 0.3, 0.5};
    int order = 5;
};
EinsteinSpec einstein_spec_from_json(const Json& j);
Json einstein_spec_json(const EinsteinSpec& s);
AnsatzData generate_from_spec(const EinsteinSpec& s);

// bundle: chart, inputs, branch flags, ansatz functions as expressions, residual report
Json solution_bundle(const EinsteinSpec& spec, const AnsatzData& d, const EinsteinReport& rep, const LcReport& lc,
                     const Fingerprint& fp);
AnsatzData ansatz_from_bundle(const Json& bundle);

}  // namespace fedq
