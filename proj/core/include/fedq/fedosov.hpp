#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fedq/dconnection.hpp"
#include "fedq/weyl.hpp"

namespace fedq {

class CapOverflow : public Error {
public:
    using Error::Error;
};

struct FedosovOptions {
    int K_max = 6;
    bool moyal = false;  // pure theta kernel instead of theta - i g
    int v_max = 0;       // 0: derived from K_max
    int s_max = 0;
    double tol = 1e-8;
};

struct FlatnessReport {
    std::vector<double> by_degree;  // index k: terms of D_r^2(p) at Deg(p) + k - 2
    int verified_through = 0;       // k <= verified_through are checked; K_max is unverified
    int min_reliable = 0;
    int probes = 0;
    double max_residual = 0;
    bool pass = false;
};

struct FedosovState {
    std::shared_ptr<const GeometryData> geo;
    std::shared_ptr<const DConnectionData> conn;
    FedosovOptions opt;
    WeylCaps caps;
    Kernel kernel;
    WeylForm gamma0;                   // theta_{ab} z^a e^b
    WeylForm T_W, R_W;
    std::vector<WeylForm> r_by_degree; // index = Deg
    WeylForm r_total;
    FlatnessReport flatness;
};

// Lambda^{ab} = theta^{ab} - i g^{ab}, or theta^{ab} alone in Moyal mode
Kernel fedosov_kernel(const GeometryData& geo, bool moyal);

struct TorsionCurvatureLift {
    WeylForm T_W;  // theta_{am} z^a T^m, T^m the torsion 2-form
    WeylForm R_W;  // 1/2 theta_{am} z^a z^n R^m_n, R^m_n the curvature 2-form
};
TorsionCurvatureLift lift_torsion_curvature(const DConnectionData& conn, const GeometryData& geo, const WeylCaps& caps);

// e^c ^ (e_c a - Gamma^a_{bc} z^b d_a a) plus the exterior derivative of the form part
WeylForm dhat_weyl(const WeylForm& a, const DConnectionData& conn, const GeometryData& geo);
// exterior derivative of a z-independent form in the adapted coframe
WeylForm exterior_d(const WeylForm& a, const GeometryData& geo);

// (i/v) x for x whose terms all carry v^1 or higher
WeylForm i_over_v(const WeylForm& x);
// shifts all v powers by k
WeylForm v_shift(const WeylForm& x, int k);

FedosovState fedosov_recursion(const GeometryData& geo, const DConnectionData& conn, const FedosovOptions& opt = {});
FedosovState fedosov_recursion(std::shared_ptr<const GeometryData> geo, std::shared_ptr<const DConnectionData> conn,
                               const FedosovOptions& opt = {});

// D_r a = -delta a + dhat a - (i/v)[r, a]
WeylForm fedosov_d(const WeylForm& a, const FedosovState& s);
FlatnessReport flatness_check(const FedosovState& s);

// flat section with sigma(chi) = f, components up to Deg max_deg
WeylForm chi_lift(const Jet& f, const FedosovState& s, int max_deg);
WeylForm chi_lift(const VSeries& f, const FedosovState& s, int max_deg);

// f * g = sigma(chi(f) o chi(g)) through v^order
VSeries star(const Jet& f, const Jet& g, const FedosovState& s, int order);
VSeries star(const VSeries& f, const VSeries& g, const FedosovState& s, int order);

struct CurvatureReport {
    WeylForm C;            // full Fedosov-Weyl curvature
    WeylForm omega_v;      // C + theta, z-free part
    double central_defect = 0;  // z-dependent remainder through the verified degrees
    double closure = 0;         // |d omega_v|
    int verified_through = 0;
};
CurvatureReport weyl_curvature(const FedosovState& s);

// inverse of B = 1 + B1 by the geometric series, Deg-truncated
WeylForm weyl_inverse(const WeylForm& B, const Kernel& K, int max_deg);
// state with D' = Ad(B) D Ad(B)^{-1}, i.e. r' = r - i v (D_r B) o B^{-1}
FedosovState gauge_transform(const FedosovState& s, const WeylForm& B);

// k x k matrices over the Weyl algebra
struct MatrixWeyl {
    int k = 0;
    std::vector<WeylForm> e;
    WeylForm& operator()(int i, int j) { return e[i * k + j]; }
    const WeylForm& operator()(int i, int j) const { return e[i * k + j]; }
};
MatrixWeyl matrix_weyl(const ChartPtr& chart, const WeylCaps& caps, const std::vector<std::vector<Jet>>& m);
MatrixWeyl matrix_product(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K);

struct EndomorphismCheck {
    double chi_defect = 0;  // |chi(s) - s|
    double flat_defect = 0; // |D_r s|
    bool pass = false;
};
// bundle_gamma: k x k matrix of 1-forms (may be empty for the trivial connection)
EndomorphismCheck flat_endomorphism_check(const std::vector<std::vector<Jet>>& section, const FedosovState& s,
                                          const MatrixWeyl& bundle_gamma = {}, double tol = 1e-10);

struct StarRow {
    std::string f, g;
    int order = 0;
    cplx value;
};
// star-product coefficients at the base point for all pairs of basis monomials in the coordinate offsets
std::vector<StarRow> star_table(const FedosovState& s, int max_mono_degree, int order);

}  // namespace fedq
