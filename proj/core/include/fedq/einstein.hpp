#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "fedq/dconnection.hpp"

namespace fedq {

// 4-d chart with coordinates x1, x2 (horizontal), t, y4 (vertical); t is timelike.
inline constexpr int kT = 2;
inline constexpr int kY4 = 3;
ChartPtr einstein_chart(std::vector<double> base, int order);

class SignatureViolation : public Error {
public:
    using Error::Error;
};

struct AnsatzData {
    ChartPtr chart;
    Jet psi;
    Jet h3, h4;
    std::array<Jet, 2> w, n;
    Jet omega;
    Jet phi;       // generating function; invalid when the data was not generated
    Jet lambda_h;
    Jet lambda_v;
    // integration data
    Jet h4_0;
    std::array<Jet, 2> n1, n2;
    // branch flags fixed at the base point
    int sign_phi_t = 1;
    int sign_h3 = -1;
    int sign_h4 = 1;

    bool generated() const { return phi.valid(); }
};

// trivial data: psi = 0, h3 = -1, h4 = 1, w = n = 0, omega = 1, sources 0
AnsatzData minkowski_ansatz(const ChartPtr& chart);

// g = e^psi dx.dx + h3 e3.e3 + omega^2 h4 e4.e4, e3 = dt + w_i dx^i, e4 = dy4 + n_i dx^i
GeometryData build_ansatz(const AnsatzData& d);
void check_signature(const AnsatzData& d);

struct HorizontalSolution {
    Jet psi;
    Jet residual;          // psi_11 + psi_22 - 2 lambda_h e^psi
    Jet linear_residual;   // psi_11 + psi_22 - 2 lambda_h
};
// constant lambda_h: psi = -2 log(1 - lambda_h |x|^2 / 4), whose quadratic part is lambda_h |x|^2 / 2
HorizontalSolution solve_horizontal(const Jet& lambda_h);
HorizontalSolution solve_horizontal(const Jet& lambda_h, const Jet& psi);

struct GeneratorInput {
    Jet phi;
    Jet lambda_v;
    Jet lambda_h;   // invalid: zero
    Jet psi;        // invalid: solved from constant lambda_h
    Jet h4_0;
    std::array<Jet, 2> n1, n2;
    Jet omega;      // invalid: 1
    int sign_h3h4 = -1;
};
// h4 = h4_0 + s Int (e^{2 phi})^* / (4 lambda_v) dt, h3 = s (h4^*)^2 e^{-2 phi} / h4,
// w_i = d_i phi / phi^*, n_i = n1_i + n2_i Int |h3|^{1/2} / |h4|^{3/2} dt, s = sign(h3 h4)
AnsatzData generate_solution(const GeneratorInput& in);

struct ResidualEntry {
    std::string name;
    std::string tag;  // equation or constraint label
    double value = 0;  // reduced: max reliable coefficient; pipeline: |residual| at the base point
};

struct EinsteinReport {
    std::vector<ResidualEntry> reduced;
    std::vector<ResidualEntry> pipeline;
    double reduced_max = 0;
    double pipeline_max = 0;
    double tolerance = 1e-8;
    bool reduced_pass = false;
    bool pipeline_pass = false;
    bool pass() const { return reduced_pass && pipeline_pass; }
    const ResidualEntry* worst() const;
};
EinsteinReport residual_full(const AnsatzData& d, double tol = 1e-8);

struct LcReport {
    double l_constraint = 0;     // L^c_{aj} - d_a N^c_j
    double c_constraint = 0;     // C^i_{jb}
    double omega_constraint = 0; // Omega^a_{ji}
    double aux_w = 0;            // (w_i)^* + w_i (h4)^* + d_i h4
    double aux_curl = 0;         // d_i w_k - d_k w_i
    double distortion = 0;       // max |Z|
    double tolerance = 1e-9;
    bool constraints_pass = false;
    bool constant_sources = false;
    bool levi_civita() const { return constraints_pass && constant_sources; }
    std::string classification() const;
};
LcReport lc_check(const AnsatzData& d, double tol = 1e-9);

struct FinslerVariables {
    std::array<Jet, 4> vierbein;          // diagonal e^{a'}_a
    std::array<Jet, 2> w0, n0;            // N of the solution from the Finsler N
    std::array<Jet, 2> wc, nc;            // Finsler N from the solution N
    double metric_roundtrip = 0;
    double connection_roundtrip = 0;
};
// f: a diagonal d-metric on the same chart; signs chooses the branch of each vierbein entry
FinslerVariables finsler_variables(const AnsatzData& d, const GeometryData& f,
                                   std::array<int, 4> signs = {1, 1, 1, 1});

// generated data with one function scaled by (1 + eps); names: psi h3 h4 w1 w2 n1 n2
AnsatzData corrupt(const AnsatzData& d, const std::string& which, double eps = 0.1);
std::vector<std::string> ansatz_function_names();

}  // namespace fedq
