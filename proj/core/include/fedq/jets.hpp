#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedq {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 6;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChartMismatch : public Error {
public:
    ChartMismatch() : Error("chart mismatch") {}
};

class SingularJet : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

using Mono = std::array<std::uint8_t, kMaxDim>;

// Coordinates u^0..u^{2n-1}; the first n are horizontal, the last n vertical.
class Chart {
public:
    Chart(int n, std::vector<std::string> names, std::vector<double> base, int order);

    static std::shared_ptr<const Chart> make(int n, std::vector<double> base, int order);
    static std::shared_ptr<const Chart> make(int n, std::vector<std::string> names,
                                             std::vector<double> base, int order);

    int n() const { return n_; }
    int dim() const { return dim_; }
    int order() const { return order_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& base_point() const { return base_; }
    int index_of(const std::string& name) const;

    std::size_t size() const { return monos_.size(); }
    std::size_t size_upto(int p) const;
    const Mono& mono(std::size_t k) const { return monos_[k]; }
    int degree(std::size_t k) const { return degs_[k]; }
    std::size_t index(const Mono& m) const;
    // index of mono(k) + e_a, or -1 when the degree would exceed the order
    long up(std::size_t k, int a) const { return up_[k * dim_ + a]; }
    long down(std::size_t k, int a) const { return down_[k * dim_ + a]; }

    struct Pair {
        std::uint32_t j;
        std::uint32_t k;
    };
    // for monomial i: all (j, i+j) with deg j <= order - deg i, sorted by deg j
    const std::vector<Pair>& pairs(std::size_t i) const { return pairs_[i]; }
    // pairs(i)[0 .. pair_count(i, d)) have deg j <= d
    std::size_t pair_count(std::size_t i, int d) const;

    bool same_as(const Chart& o) const;

private:
    static std::uint64_t key(const Mono& m);

    int n_;
    int dim_;
    int order_;
    std::vector<std::string> names_;
    std::vector<double> base_;
    std::vector<Mono> monos_;
    std::vector<int> degs_;
    std::vector<std::size_t> count_upto_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
    std::vector<long> up_;
    std::vector<long> down_;
    std::vector<std::vector<Pair>> pairs_;
};

using ChartPtr = std::shared_ptr<const Chart>;

// Truncated Taylor expansion f(u0+h) = sum c_mu h^mu.  Coefficients are stored up to
// the stored degree; everything above it up to the reliable order is zero, and nothing
// is known above the reliable order.
class Jet {
public:
    Jet() = default;
    explicit Jet(ChartPtr chart);
    static Jet constant(ChartPtr chart, cplx value);
    static Jet variable(ChartPtr chart, int a);  // u^a as a function (base value included)
    static Jet coordinate_offset(ChartPtr chart, int a);  // u^a - u0^a

    const ChartPtr& chart() const { return chart_; }
    bool valid() const { return chart_ != nullptr; }
    int reliable() const { return reliable_; }
    int stored() const { return stored_; }
    const std::vector<cplx>& coeffs() const { return c_; }

    cplx value() const { return c_.empty() ? cplx{} : c_[0]; }
    cplx coeff(std::size_t k) const { return k < c_.size() ? c_[k] : cplx{}; }
    cplx coeff(const Mono& m) const;
    void set_coeff(std::size_t k, cplx v);

    Jet& set_reliable(int r);
    bool is_zero() const;
    double norm() const;  // max abs over reliable coefficients

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(cplx s);
    Jet operator-() const;
    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }
    friend Jet operator*(const Jet& a, const Jet& b) { return multiply(a, b); }
    friend Jet operator/(const Jet& a, const Jet& b) { return multiply(a, invert(b)); }

    static Jet multiply(const Jet& a, const Jet& b);
    // a += s * b * c without temporaries
    void fma(const Jet& b, const Jet& c, cplx s = 1.0);
    // a += s * b
    void axpy(cplx s, const Jet& b);

    friend Jet partial(const Jet& a, int alpha);
    friend Jet invert(const Jet& a);
    friend Jet antiderivative(const Jet& a, int alpha);

    // evaluate the stored polynomial at a displacement h from the base point
    cplx evaluate(const std::vector<double>& h) const;

private:
    void check(const Jet& o) const;
    void resize_stored(int s);
    void trim();

    ChartPtr chart_;
    int reliable_ = 0;
    int stored_ = -1;
    std::vector<cplx> c_;
};

Jet partial(const Jet& a, int alpha);
Jet invert(const Jet& a);
Jet antiderivative(const Jet& a, int alpha);

// elementary function composition by truncated Taylor series
Jet jet_exp(const Jet& a);
Jet jet_log(const Jet& a);
Jet jet_sin(const Jet& a);
Jet jet_cos(const Jet& a);
Jet jet_sinh(const Jet& a);
Jet jet_cosh(const Jet& a);
Jet jet_sqrt(const Jet& a);
Jet jet_abs(const Jet& a);
Jet jet_pow(const Jet& a, long num, long den);
// compose with f given the derivatives f^(k)(a0), k = 0..
Jet compose(const Jet& a, const std::vector<cplx>& derivs);

bool approx_equal(const Jet& a, const Jet& b, double tol);

// Series in v with jet coefficients; index is the power of v.
using VSeries = std::vector<Jet>;

}  // namespace fedq
