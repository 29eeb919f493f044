#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "fedq/jets.hpp"

namespace fedq {

struct WeylCaps {
    int v_max = 3;
    int s_max = 8;
    int deg_max = 1 << 20;  // total degree 2k + |zeta|
};

// Term key: form mask A (bits 0..5), v power k (bits 6..11), zeta exponents (8 bits each from bit 12).
namespace wkey {
inline std::uint64_t make(int k, const Mono& zeta, unsigned A) {
    std::uint64_t key = (A & 0x3Fu) | (std::uint64_t(k & 0x3F) << 6);
    for (int a = 0; a < kMaxDim; ++a) key |= std::uint64_t(zeta[a]) << (12 + 8 * a);
    return key;
}
inline unsigned form(std::uint64_t key) { return unsigned(key & 0x3F); }
inline int vpow(std::uint64_t key) { return int((key >> 6) & 0x3F); }
inline Mono zeta(std::uint64_t key) {
    Mono m{};
    for (int a = 0; a < kMaxDim; ++a) m[a] = std::uint8_t((key >> (12 + 8 * a)) & 0xFF);
    return m;
}
inline int zdeg(std::uint64_t key) {
    int d = 0;
    for (int a = 0; a < kMaxDim; ++a) d += int((key >> (12 + 8 * a)) & 0xFF);
    return d;
}
inline int fdeg(std::uint64_t key) { return __builtin_popcount(form(key)); }
inline int total(std::uint64_t key) { return 2 * vpow(key) + zdeg(key); }
}  // namespace wkey

// sign of e^A ^ e^B after sorting, 0 when they overlap
int wedge_sign(unsigned A, unsigned B);

// Weyl-algebra kernel K^{ab}; entries may depend on the base coordinates.
class Kernel {
public:
    Kernel() = default;
    Kernel(ChartPtr chart, const std::vector<std::vector<cplx>>& constant);
    Kernel(ChartPtr chart, std::vector<Jet> entries);  // row-major, dim*dim
    int dim() const { return dim_; }
    const Jet& at(int a, int b) const { return k_[a * dim_ + b]; }
    bool zero(int a, int b) const { return zero_[a * dim_ + b]; }
    const ChartPtr& chart() const { return chart_; }

private:
    ChartPtr chart_;
    int dim_ = 0;
    std::vector<Jet> k_;
    std::vector<bool> zero_;
};

class WeylForm {
public:
    using Terms = std::map<std::uint64_t, Jet>;

    WeylForm() = default;
    WeylForm(ChartPtr chart, WeylCaps caps);

    const ChartPtr& chart() const { return chart_; }
    const WeylCaps& caps() const { return caps_; }
    const Terms& terms() const { return terms_; }
    long overflow() const { return overflow_; }
    void note_overflow(long n) { overflow_ += n; }
    bool empty() const { return terms_.empty(); }

    // Adds s*c to the term (k, zeta, A); returns false when the term lies outside the caps.
    bool add(int k, const Mono& zeta, unsigned A, const Jet& c, cplx s = 1.0);
    bool add_key(std::uint64_t key, const Jet& c, cplx s = 1.0);
    Jet coeff(int k, const Mono& zeta, unsigned A) const;

    WeylForm& operator+=(const WeylForm& o);
    WeylForm& operator-=(const WeylForm& o);
    WeylForm& operator*=(cplx s);
    friend WeylForm operator+(WeylForm a, const WeylForm& b) { return a += b; }
    friend WeylForm operator-(WeylForm a, const WeylForm& b) { return a -= b; }
    friend WeylForm operator*(cplx s, WeylForm a) { return a *= s; }
    WeylForm times(const Jet& f) const;

    WeylForm filter(const std::function<bool(std::uint64_t)>& keep) const;
    WeylForm total_degree(int D) const;
    WeylForm bidegree(int p, int q) const;
    int min_total_degree() const;  // -1 when empty
    int max_total_degree() const;

    // max over terms of the max abs reliable coefficient
    double norm() const;
    // drops terms whose coefficients are all below tol
    void prune(double tol = 0.0);
    // lowers reliable orders of all coefficients to at most r
    void limit_reliable(int r);
    int min_reliable() const;

private:
    ChartPtr chart_;
    WeylCaps caps_;
    Terms terms_;
    long overflow_ = 0;
};

WeylForm weyl_constant(const ChartPtr& chart, const WeylCaps& caps, const Jet& f);
WeylForm weyl_z(const ChartPtr& chart, const WeylCaps& caps, int a, cplx s = 1.0);
WeylForm weyl_form1(const ChartPtr& chart, const WeylCaps& caps, int a, cplx s = 1.0);

// a o b = sum_m (i v/2)^m / m! K^{a1 b1}..K^{am bm} d_{a1..am} a d_{b1..bm} b, forms wedged.
// Terms with m < min_order are skipped.
WeylForm wick_product(const WeylForm& a, const WeylForm& b, const Kernel& K, int min_order = 0);
// graded commutator a o b - (-1)^{|a||b|} b o a (form degrees)
WeylForm commutator(const WeylForm& a, const WeylForm& b, const Kernel& K);

WeylForm delta(const WeylForm& a);
WeylForm delta_inv(const WeylForm& a);
WeylForm sigma(const WeylForm& a);

// d/dz^a
WeylForm z_derivative(const WeylForm& a, int alpha);
// z^a * x
WeylForm z_multiply(const WeylForm& a, int alpha);
// e^a ^ x
WeylForm form_multiply(int alpha, const WeylForm& a);

}  // namespace fedq
