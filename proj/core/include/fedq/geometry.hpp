#pragma once

#include <utility>
#include <vector>

#include "fedq/jets.hpp"
#include "fedq/tensor.hpp"

namespace fedq {

class DegenerateHessian : public Error {
public:
    using Error::Error;
};

class ClosureViolation : public Error {
public:
    using Error::Error;
};

// Index layout: frame index alpha in [0, 2n); alpha < n horizontal (i), alpha = n + a vertical.
// Vertical-block tensors use a in [0, n).
struct GeometryData {
    ChartPtr chart;
    int n = 0;
    bool sasaki = false;  // horizontal block equals vertical block

    Jet L;
    JetTensor gh;      // g_ij
    JetTensor gv;      // g_ab
    JetTensor gh_inv;
    JetTensor gv_inv;
    JetTensor G;       // semi-spray G^i
    JetTensor N;       // N(a, i) = N^a_i
    JetTensor g;       // d-metric in the N-adapted frame, 2n x 2n
    JetTensor g_inv;
    JetTensor g_coord; // coordinate-basis metric
    JetTensor E;       // coframe matrix: e^alpha = E(alpha, mu) du^mu
    JetTensor E_inv;   // frame matrix: e_beta = E_inv(mu, beta) d_mu
    JetTensor theta;   // theta_{alpha beta} in the N-adapted frame
    JetTensor theta_inv;
    JetTensor theta_coord;
    JetTensor Omega;   // Omega(a, i, j) = Omega^a_{ij}
    JetTensor W;       // [e_b, e_c] = W(a, b, c) e_a
    std::vector<std::pair<int, int>> J;  // J(e_alpha) = sign * e_target as {target, sign}

    // N-elongated derivative e_alpha(f)
    Jet frame_derivative(const Jet& f, int alpha) const;
};

// g_ab = d^2 L / dy^a dy^b
JetTensor hessian(const Jet& L);
void check_regular(const JetTensor& gv, double tol = 1e-10);
// G^i = 1/2 g^{ij} (d^2L/dy^j dx^k y^k - dL/dx^j)
JetTensor semispray(const Jet& L, const JetTensor& gv_inv);
// N^a_i = dG^a/dy^i
JetTensor canonical_N(const JetTensor& G);
Jet n_elongated_partial(const Jet& f, int i, const JetTensor& N);

// Full pipeline from a regular Lagrangian. Throws DegenerateHessian / ClosureViolation.
GeometryData lagrange_geometry(const Jet& L, bool verify_closure = true);
// Geometry of a d-metric g = gh dx dx + gv e^a e^b with given N; theta only for gh == gv.
GeometryData dmetric_geometry(const ChartPtr& chart, const JetTensor& gh, const JetTensor& gv,
                              const JetTensor& N);

struct SymplecticCheck {
    double closure = 0;       // max |d theta| coefficient
    double potential = 0;     // max |d omega - theta| coefficient
};
// theta = d omega with omega = dL/dy^{n+i} dx^i
SymplecticCheck check_symplectic(const GeometryData& geo);
// exterior derivative of a coordinate 2-form given as an antisymmetric matrix
JetTensor exterior_derivative2(const JetTensor& form2);

// max |theta(X, Y) - g(JX, Y)| over frame pairs, and |J^2 + Id|
double almost_complex_defect(const GeometryData& geo);

// frame commutator [e_b, e_c] applied to f, computed by direct differentiation
Jet frame_commutator(const GeometryData& geo, const Jet& f, int b, int c);

}  // namespace fedq
