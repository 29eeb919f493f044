#pragma once

#include "fedq/geometry.hpp"

namespace fedq {

class InsufficientOrder : public Error {
public:
    using Error::Error;
};

// Frame convention: D_{e_c} e_b = Gamma(a, b, c) e_a.
// Torsion T(a, b, c) = component a of T(e_c, e_b); curvature R(a, b, c, d) = component a of R(e_d, e_c) e_b.
struct DConnectionData {
    int n = 0;
    JetTensor Lh;  // L^i_{jk}
    JetTensor Lv;  // L^a_{bk}
    JetTensor Ch;  // C^i_{jc}
    JetTensor Cv;  // C^a_{bc}
    JetTensor Gamma;
    JetTensor T;
    JetTensor R;      // operator composition
    JetTensor Rh;     // R^i_{hjk}
    JetTensor P;      // P^i_{jka}
    JetTensor S;      // S^a_{bcd}
    JetTensor Ricci;  // R_{ab} = R^t_{abt}
    Jet scalar;
    Jet scalar_h;     // g^{ij} R_ij
    Jet scalar_v;     // h^{ab} R_ab
    double curvature_mismatch = 0;
};

// Canonical d-connection of a d-metric; for Lagrange geometries it coincides with the normal one.
DConnectionData normal_dconnection(const GeometryData& geo);
// The normal d-connection written with h-indices only (L^i_{jk}, C^i_{jk} Christoffel form).
void normal_coefficients(const GeometryData& geo, JetTensor& Lh, JetTensor& Ch);

void compute_torsion(DConnectionData& c, const GeometryData& geo);
// Throws InsufficientOrder when the curvature has no reliable coefficient, Error on a mismatch above tol.
void compute_curvature(DConnectionData& c, const GeometryData& geo, double tol = 1e-9);
void compute_ricci(DConnectionData& c, const GeometryData& geo, bool alternate_contraction = false);

// all of the above
DConnectionData full_dconnection(const GeometryData& geo);

// covariant derivative D_c of a (0,2) frame tensor: out(a, b, c)
JetTensor covariant_derivative2(const DConnectionData& c, const GeometryData& geo, const JetTensor& t);

// Levi-Civita connection in N-adapted frames by the Koszul formula
JetTensor levi_civita_koszul(const GeometryData& geo);
// Levi-Civita from the coordinate Christoffel symbols of g_coord, pushed to N-adapted frames
JetTensor levi_civita_coordinate(const GeometryData& geo);
// distortion Z = LC - Gamma from the closed-form block formulas
JetTensor distortion(const DConnectionData& c, const GeometryData& geo);

struct EinsteinResidual {
    JetTensor ricci_mixed;    // R^a_b
    JetTensor einstein_mixed; // R^a_b - 1/2 delta R
    double ricci_residual = 0;     // max |R^a_b - diag(-lh, .., -lv, ..)| at the base point
    double einstein_residual = 0;  // max |E^a_b - diag(lv, .., lh, ..)| at the base point
};
EinsteinResidual einstein_residual(const DConnectionData& c, const GeometryData& geo, double lambda_h,
                                   double lambda_v);

}  // namespace fedq
