#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fedq/fedosov.hpp"

namespace fedq {

// Exterior-form valued Laurent series in v; keys are (power of v, form mask).
class FormSeries {
public:
    using Key = std::pair<int, unsigned>;

    FormSeries() = default;
    FormSeries(ChartPtr chart, int dim) : chart_(std::move(chart)), dim_(dim) {}
    static FormSeries scalar(ChartPtr chart, int dim, const Jet& c, int vpow = 0);

    const ChartPtr& chart() const { return chart_; }
    int dim() const { return dim_; }
    const std::map<Key, Jet>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add(int vpow, unsigned A, const Jet& c, cplx s = 1.0);
    Jet coeff(int vpow, unsigned A) const;

    FormSeries& operator+=(const FormSeries& o);
    FormSeries& operator-=(const FormSeries& o);
    FormSeries& operator*=(cplx s);
    friend FormSeries operator+(FormSeries a, const FormSeries& b) { return a += b; }
    friend FormSeries operator-(FormSeries a, const FormSeries& b) { return a -= b; }
    friend FormSeries operator*(cplx s, FormSeries a) { return a *= s; }

    FormSeries form_degree(int p) const;
    FormSeries v_shift(int k) const;
    // coefficient of e^0 ^ ... ^ e^{dim-1} by power of v
    std::map<int, Jet> top() const;
    double norm() const;
    void prune(double tol = 0.0);

private:
    ChartPtr chart_;
    int dim_ = 0;
    std::map<Key, Jet> terms_;
};

FormSeries wedge(const FormSeries& a, const FormSeries& b);
// exp(x) for x without a 0-form part; the series terminates by form degree
FormSeries form_exp(const FormSeries& x);
// z-independent Weyl form to a form series
FormSeries to_form_series(const WeylForm& w);

struct MatrixFormSeries {
    int k = 0;
    std::vector<FormSeries> e;
    FormSeries& operator()(int i, int j) { return e[i * k + j]; }
    const FormSeries& operator()(int i, int j) const { return e[i * k + j]; }
};
MatrixFormSeries matrix_wedge(const MatrixFormSeries& a, const MatrixFormSeries& b);
FormSeries trace(const MatrixFormSeries& m);
MatrixFormSeries direct_sum(const MatrixFormSeries& a, const MatrixFormSeries& b);

// curvature 2-forms R^a_b of the d-connection in the adapted coframe
MatrixFormSeries curvature_forms(const DConnectionData& conn, const GeometryData& geo);
// d G + G ^ G for a matrix of 1-forms
MatrixFormSeries bundle_curvature(const MatrixFormSeries& G, const GeometryData& geo);

// power series helpers in one variable t
std::vector<double> series_t_over_sinh(int order);
std::vector<double> series_log(const std::vector<double>& a);  // a[0] = 1

// A-hat as a polynomial in the power traces p_m = tr F^m; key: multiplicity of p_2, p_4, ...
std::map<std::vector<int>, double> ahat_trace_expansion(int max_degree);
FormSeries ahat_genus(const MatrixFormSeries& F, int order = -1);
FormSeries chern_character(const MatrixFormSeries& Rv, int order = -1);

// top component of A ^ exp(-C / v) ^ ch
std::map<int, Jet> index_class(const FormSeries& C, const FormSeries& ahat, const FormSeries& ch);
// Fedosov-Weyl curvature -theta + omega_v of a state as a form series
FormSeries fedosov_weyl_class(const FedosovState& s);
std::map<int, Jet> index_class(const FedosovState& s, const MatrixFormSeries& Rv);

using MatrixSeries = std::vector<std::vector<VSeries>>;
MatrixSeries matrix_star(const MatrixSeries& a, const MatrixSeries& b, const FedosovState& s, int order);
// star-idempotent with the given classical idempotent as v^0 part
MatrixSeries idempotent_lift(const std::vector<std::vector<Jet>>& p0, const FedosovState& s, int order);
// v = 0 part; throws when zeta * zeta - zeta exceeds tol
std::vector<std::vector<Jet>> principal_symbol(const MatrixSeries& zeta, const FedosovState& s, int order,
                                               double tol = 1e-8);

// projection onto scalar z-quadratic plus z-constant matrix parts (all powers of v);
// the image is closed under the Wick commutator
MatrixWeyl project_rho(const MatrixWeyl& x);
MatrixWeyl matrix_commutator(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K);
// C(a, b) = [pr a, pr b] - pr [a, b]
MatrixWeyl projection_curvature(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K);

using ScalarSeries = std::map<int, cplx>;  // power of v -> coefficient
using MultilinearForm = std::function<ScalarSeries(const std::vector<MatrixWeyl>&)>;
// (1/(2r)!) sum_s sgn(s) A(C(x_s1, x_s2), ..., C(x_s(2r-1), x_s(2r)))
ScalarSeries chern_weil_cocycle(const MultilinearForm& A, const std::vector<MatrixWeyl>& x, const Kernel& K);
// degree-1 part of A-hat(X1) tr exp(X2 / v): tr(X2) / v at the base point
ScalarSeries trace_form(const std::vector<MatrixWeyl>& x);

// exact integral of p1^a p2^b over 0 <= p1 <= p2 <= 1
std::pair<long long, long long> simplex_integral(int a, int b);

// tau_2 on a 2-dimensional fiber; slots are z-polynomials, b pairs slots through i K^{ab}
ScalarSeries ffs_cocycle_2(const WeylForm& q0, const WeylForm& q1, const WeylForm& q2,
                           const std::vector<std::vector<cplx>>& K);

using Cochain = std::function<ScalarSeries(const std::vector<WeylForm>&, const WeylForm&)>;
struct Decorated {
    std::vector<std::vector<cplx>> A;
    WeylForm a;
};
ScalarSeries chain_map_extension(const Cochain& psi, const std::vector<Decorated>& args, const Decorated& a0);

// v^{-1} Theta_2(r, chi(a)) as the coefficient of e^0 ^ e^1 at the base point, n = 1
ScalarSeries trace_density_2(const FedosovState& s, const std::vector<std::vector<Jet>>& a, int max_deg = 4);

struct Fingerprint {
    std::string geometry_hash;
    int v_order = 2;
    std::vector<std::pair<std::string, cplx>> values;  // fixed order
};
Fingerprint solution_fingerprint(const FedosovState& s);
Fingerprint solution_fingerprint(const GeometryData& geo, const DConnectionData& conn);
std::string fingerprint_json(const Fingerprint& f);
bool fingerprints_equal(const Fingerprint& a, const Fingerprint& b, double tol = 1e-7);

}  // namespace fedq
