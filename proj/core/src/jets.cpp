#include "fedq/jets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fedq {

namespace {

void enumerate(int dim, int deg, int pos, Mono& cur, std::vector<Mono>& out) {
    if (pos == dim - 1) {
        cur[pos] = static_cast<std::uint8_t>(deg);
        out.push_back(cur);
        cur[pos] = 0;
        return;
    }
    for (int k = deg; k >= 0; --k) {
        cur[pos] = static_cast<std::uint8_t>(k);
        enumerate(dim, deg - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

std::vector<std::string> default_names(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    for (int i = 1; i <= n; ++i) names.push_back("y" + std::to_string(i));
    return names;
}

}  // namespace

Chart::Chart(int n, std::vector<std::string> names, std::vector<double> base, int order)
    : n_(n), dim_(2 * n), order_(order), names_(std::move(names)), base_(std::move(base)) {
    if (n < 1 || 2 * n > kMaxDim) throw Error("chart dimension must satisfy 1 <= n <= 3");
    if (order < 0 || order > 40) throw Error("jet order out of range");
    if (static_cast<int>(names_.size()) != dim_) throw Error("chart needs 2n coordinate names");
    if (static_cast<int>(base_.size()) != dim_) throw Error("chart needs 2n base values");
    std::set<std::string> uniq(names_.begin(), names_.end());
    if (static_cast<int>(uniq.size()) != dim_) throw Error("coordinate names must be distinct");

    count_upto_.clear();
    for (int d = 0; d <= order_; ++d) {
        Mono cur{};
        std::size_t before = monos_.size();
        enumerate(dim_, d, 0, cur, monos_);
        for (std::size_t k = before; k < monos_.size(); ++k) degs_.push_back(d);
        count_upto_.push_back(monos_.size());
    }
    for (std::size_t k = 0; k < monos_.size(); ++k) lookup_.emplace(key(monos_[k]), k);

    up_.assign(monos_.size() * dim_, -1);
    down_.assign(monos_.size() * dim_, -1);
    for (std::size_t k = 0; k < monos_.size(); ++k) {
        for (int a = 0; a < dim_; ++a) {
            Mono m = monos_[k];
            if (degs_[k] < order_) {
                ++m[a];
                up_[k * dim_ + a] = static_cast<long>(lookup_.at(key(m)));
                --m[a];
            }
            if (m[a] > 0) {
                --m[a];
                down_[k * dim_ + a] = static_cast<long>(lookup_.at(key(m)));
            }
        }
    }

    pairs_.resize(monos_.size());
    for (std::size_t i = 0; i < monos_.size(); ++i) {
        std::size_t lim = count_upto_[order_ - degs_[i]];
        auto& pv = pairs_[i];
        pv.reserve(lim);
        for (std::size_t j = 0; j < lim; ++j) {
            Mono m;
            for (int a = 0; a < kMaxDim; ++a)
                m[a] = static_cast<std::uint8_t>(monos_[i][a] + monos_[j][a]);
            pv.push_back({static_cast<std::uint32_t>(j),
                          static_cast<std::uint32_t>(lookup_.at(key(m)))});
        }
    }
}

ChartPtr Chart::make(int n, std::vector<double> base, int order) {
    return std::make_shared<const Chart>(n, default_names(n), std::move(base), order);
}

ChartPtr Chart::make(int n, std::vector<std::string> names, std::vector<double> base, int order) {
    return std::make_shared<const Chart>(n, std::move(names), std::move(base), order);
}

int Chart::index_of(const std::string& name) const {
    for (int a = 0; a < dim_; ++a)
        if (names_[a] == name) return a;
    // vertical coordinates may also be addressed by their frame index: y_{n+i} for y_i
    for (int i = 0; i < n_; ++i)
        if (name == "y" + std::to_string(n_ + i + 1) && names_[n_ + i] == "y" + std::to_string(i + 1))
            return n_ + i;
    return -1;
}

std::size_t Chart::size_upto(int p) const {
    if (p < 0) return 0;
    if (p > order_) p = order_;
    return count_upto_[p];
}

std::uint64_t Chart::key(const Mono& m) {
    std::uint64_t k = 0;
    for (int a = 0; a < kMaxDim; ++a) k = (k << 8) | m[a];
    return k;
}

std::size_t Chart::index(const Mono& m) const {
    auto it = lookup_.find(key(m));
    if (it == lookup_.end()) throw Error("multi-index beyond jet order");
    return it->second;
}

std::size_t Chart::pair_count(std::size_t i, int d) const {
    if (d < 0) return 0;
    return std::min(size_upto(d), pairs_[i].size());
}

bool Chart::same_as(const Chart& o) const {
    if (this == &o) return true;
    return n_ == o.n_ && order_ == o.order_ && names_ == o.names_ && base_ == o.base_;
}

Jet::Jet(ChartPtr chart) : chart_(std::move(chart)) {
    if (!chart_) throw Error("jet without chart");
    reliable_ = chart_->order();
    stored_ = -1;
}

Jet Jet::constant(ChartPtr chart, cplx value) {
    Jet j(std::move(chart));
    j.resize_stored(0);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(ChartPtr chart, int a) {
    double b = chart->base_point().at(a);
    Jet j = coordinate_offset(std::move(chart), a);
    j.c_[0] = b;
    return j;
}

Jet Jet::coordinate_offset(ChartPtr chart, int a) {
    if (a < 0 || a >= chart->dim()) throw Error("coordinate index out of range");
    Jet j(std::move(chart));
    if (j.chart_->order() == 0) return j;
    j.resize_stored(1);
    Mono m{};
    m[a] = 1;
    j.c_[j.chart_->index(m)] = 1.0;
    return j;
}

cplx Jet::coeff(const Mono& m) const {
    int d = 0;
    for (auto v : m) d += v;
    if (d > stored_) return {};
    return c_[chart_->index(m)];
}

void Jet::set_coeff(std::size_t k, cplx v) {
    int d = chart_->degree(k);
    if (d > reliable_) throw Error("coefficient above reliable order");
    if (d > stored_) resize_stored(d);
    c_[k] = v;
}

void Jet::resize_stored(int s) {
    if (s > reliable_) s = reliable_;
    stored_ = s;
    c_.resize(chart_->size_upto(s));
}

Jet& Jet::set_reliable(int r) {
    if (r > chart_->order()) r = chart_->order();
    reliable_ = r;
    if (stored_ > r) resize_stored(r);
    return *this;
}

void Jet::trim() {
    while (stored_ >= 0) {
        std::size_t lo = chart_->size_upto(stored_ - 1);
        bool zero = true;
        for (std::size_t k = lo; k < c_.size(); ++k)
            if (c_[k] != cplx{}) {
                zero = false;
                break;
            }
        if (!zero) break;
        resize_stored(stored_ - 1);
    }
}

bool Jet::is_zero() const {
    for (auto& v : c_)
        if (v != cplx{}) return false;
    return true;
}

double Jet::norm() const {
    double m = 0;
    for (auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

void Jet::check(const Jet& o) const {
    if (!chart_ || !o.chart_) throw Error("operation on empty jet");
    if (chart_ != o.chart_ && !chart_->same_as(*o.chart_)) throw ChartMismatch();
}

Jet& Jet::operator+=(const Jet& o) {
    axpy(1.0, o);
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    axpy(-1.0, o);
    return *this;
}

void Jet::axpy(cplx s, const Jet& o) {
    if (!chart_) {
        *this = o;
        *this *= s;
        return;
    }
    check(o);
    int r = std::min(reliable_, o.reliable_);
    set_reliable(r);
    int os = std::min(o.stored_, r);
    if (os > stored_) resize_stored(os);
    std::size_t lim = chart_->size_upto(os);
    for (std::size_t k = 0; k < lim; ++k) c_[k] += s * o.c_[k];
}

Jet& Jet::operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
}

Jet Jet::operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
}

Jet Jet::multiply(const Jet& a, const Jet& b) {
    a.check(b);
    Jet out(a.chart_);
    out.reliable_ = std::min(a.reliable_, b.reliable_);
    out.fma(a, b, 1.0);
    return out;
}

void Jet::fma(const Jet& a, const Jet& b, cplx s) {
    if (!chart_) *this = Jet(a.chart_);
    check(a);
    check(b);
    int r = std::min({reliable_, a.reliable_, b.reliable_});
    set_reliable(r);
    if (a.stored_ < 0 || b.stored_ < 0 || r < 0) return;
    int top = std::min(a.stored_ + b.stored_, r);
    if (top > stored_) resize_stored(top);
    const Chart& ch = *chart_;
    std::size_t na = ch.size_upto(std::min(a.stored_, top));
    for (std::size_t i = 0; i < na; ++i) {
        cplx ai = a.c_[i];
        if (ai == cplx{}) continue;
        ai *= s;
        int di = ch.degree(i);
        const auto& pv = ch.pairs(i);
        std::size_t cnt = ch.pair_count(i, std::min(b.stored_, top - di));
        const cplx* bp = b.c_.data();
        cplx* cp = c_.data();
        for (std::size_t p = 0; p < cnt; ++p) cp[pv[p].k] += ai * bp[pv[p].j];
    }
}

Jet partial(const Jet& a, int alpha) {
    if (!a.chart_) throw Error("operation on empty jet");
    const Chart& ch = *a.chart_;
    if (alpha < 0 || alpha >= ch.dim()) throw Error("coordinate index out of range");
    Jet out(a.chart_);
    out.reliable_ = a.reliable_ - 1;
    if (a.stored_ <= 0 || out.reliable_ < 0) {
        out.stored_ = -1;
        return out;
    }
    out.resize_stored(a.stored_ - 1);
    for (std::size_t k = 0; k < out.c_.size(); ++k) {
        long u = ch.up(k, alpha);
        out.c_[k] = a.c_[u] * double(ch.mono(k)[alpha] + 1);
    }
    return out;
}

Jet antiderivative(const Jet& a, int alpha) {
    if (!a.chart_) throw Error("operation on empty jet");
    const Chart& ch = *a.chart_;
    Jet out(a.chart_);
    out.reliable_ = std::min(a.reliable_ + 1, ch.order());
    if (a.stored_ < 0) return out;
    out.resize_stored(std::min(a.stored_ + 1, out.reliable_));
    std::size_t lim = ch.size_upto(out.stored_ - 1);
    for (std::size_t k = 0; k < lim; ++k) {
        long u = ch.up(k, alpha);
        if (u < 0) continue;
        out.c_[u] = a.c_[k] / double(ch.mono(k)[alpha] + 1);
    }
    return out;
}

Jet compose(const Jet& a, const std::vector<cplx>& derivs) {
    if (!a.valid()) throw Error("operation on empty jet");
    int r = a.reliable();
    Jet b = a;
    if (!b.coeffs().empty()) b.set_coeff(0, 0.0);
    int m = std::min<int>(r, static_cast<int>(derivs.size()) - 1);
    if (b.stored() <= 0) m = 0;
    std::vector<double> fact(m + 1, 1.0);
    for (int k = 1; k <= m; ++k) fact[k] = fact[k - 1] * k;
    Jet res = Jet::constant(a.chart(), derivs[m] / fact[m]);
    res.set_reliable(r);
    for (int k = m - 1; k >= 0; --k) {
        res = res * b;
        res += Jet::constant(a.chart(), derivs[k] / fact[k]);
    }
    res.set_reliable(r);
    return res;
}

Jet invert(const Jet& a) {
    cplx a0 = a.value();
    if (std::abs(a0) <= 1e-12) throw SingularJet("jet has vanishing constant term");
    int r = std::max(a.reliable(), 0);
    std::vector<cplx> d(r + 1);
    cplx p = 1.0 / a0;
    for (int k = 0; k <= r; ++k) {
        d[k] = p;
        p *= -double(k + 1) / a0;
    }
    return compose(a, d);
}

namespace {

bool real_nonpositive(cplx z) {
    return std::abs(z.imag()) <= 1e-14 && z.real() <= 1e-12;
}

std::vector<cplx> periodic(cplx f0, cplx f1, int r, double sign) {
    // derivative sequence of sin/cos (sign -1) or sinh/cosh (sign +1)
    std::vector<cplx> d(r + 1);
    for (int k = 0; k <= r; ++k) {
        cplx base = (k % 2 == 0) ? f0 : f1;
        double s = 1.0;
        if (sign < 0 && ((k / 2) % 2 == 1)) s = -1.0;
        d[k] = s * base;
    }
    return d;
}

int order_of(const Jet& a) { return std::max(a.reliable(), 0); }

}  // namespace

Jet jet_exp(const Jet& a) {
    std::vector<cplx> d(order_of(a) + 1, std::exp(a.value()));
    return compose(a, d);
}

Jet jet_log(const Jet& a) {
    cplx a0 = a.value();
    if (real_nonpositive(a0)) throw DomainError("log of non-positive value");
    int r = order_of(a);
    std::vector<cplx> d(r + 1);
    d[0] = std::log(a0);
    cplx p = 1.0 / a0;
    for (int k = 1; k <= r; ++k) {
        d[k] = p;
        p *= -double(k) / a0;
    }
    return compose(a, d);
}

Jet jet_sin(const Jet& a) {
    cplx z = a.value();
    return compose(a, periodic(std::sin(z), std::cos(z), order_of(a), -1));
}

Jet jet_cos(const Jet& a) {
    cplx z = a.value();
    return compose(a, periodic(std::cos(z), -std::sin(z), order_of(a), -1));
}

Jet jet_sinh(const Jet& a) {
    cplx z = a.value();
    return compose(a, periodic(std::sinh(z), std::cosh(z), order_of(a), 1));
}

Jet jet_cosh(const Jet& a) {
    cplx z = a.value();
    return compose(a, periodic(std::cosh(z), std::sinh(z), order_of(a), 1));
}

Jet jet_pow(const Jet& a, long num, long den) {
    if (den <= 0) throw Error("bad rational exponent");
    cplx a0 = a.value();
    if (den == 1 && num >= 0) {
        Jet r = Jet::constant(a.chart(), 1.0);
        r.set_reliable(a.reliable());
        Jet base = a;
        long e = num;
        while (e > 0) {
            if (e & 1) r = r * base;
            e >>= 1;
            if (e) base = base * base;
        }
        return r;
    }
    if (std::abs(a0) <= 1e-12) throw DomainError("power with negative or fractional exponent at zero");
    double p = double(num) / double(den);
    if (den != 1 && real_nonpositive(a0)) throw DomainError("fractional power of non-positive value");
    int r = order_of(a);
    std::vector<cplx> d(r + 1);
    for (int k = 0; k <= r; ++k) {
        double c = 1.0;
        for (int i = 0; i < k; ++i) c *= (p - i);
        d[k] = c * std::pow(a0, p - k);
    }
    return compose(a, d);
}

Jet jet_sqrt(const Jet& a) {
    if (real_nonpositive(a.value())) throw DomainError("sqrt of non-positive value");
    return jet_pow(a, 1, 2);
}

Jet jet_abs(const Jet& a) {
    cplx a0 = a.value();
    if (std::abs(a0.imag()) > 1e-14) throw DomainError("abs of complex value");
    if (std::abs(a0.real()) <= 1e-12) throw DomainError("abs at zero is not smooth");
    return a0.real() > 0 ? a : -a;
}

cplx Jet::evaluate(const std::vector<double>& h) const {
    cplx s{};
    for (std::size_t k = 0; k < c_.size(); ++k) {
        if (c_[k] == cplx{}) continue;
        double t = 1.0;
        const Mono& m = chart_->mono(k);
        for (int a = 0; a < chart_->dim(); ++a)
            for (int e = 0; e < m[a]; ++e) t *= h[a];
        s += c_[k] * t;
    }
    return s;
}

bool approx_equal(const Jet& a, const Jet& b, double tol) {
    int r = std::min(a.reliable(), b.reliable());
    std::size_t lim = a.chart()->size_upto(r);
    for (std::size_t k = 0; k < lim; ++k)
        if (std::abs(a.coeff(k) - b.coeff(k)) > tol) return false;
    return true;
}

}  // namespace fedq
