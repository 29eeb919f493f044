#include "fedq/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace fedq {

int wedge_sign(unsigned A, unsigned B) {
    if (A & B) return 0;
    int count = 0;
    for (unsigned b = B; b; b &= b - 1) {
        int j = __builtin_ctz(b);
        count += __builtin_popcount(A >> (j + 1));
    }
    return (count & 1) ? -1 : 1;
}

Kernel::Kernel(ChartPtr chart, const std::vector<std::vector<cplx>>& constant)
    : chart_(std::move(chart)), dim_(static_cast<int>(constant.size())) {
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) {
            cplx v = constant[a].at(b);
            k_.push_back(Jet::constant(chart_, v));
            zero_.push_back(v == cplx{});
        }
}

Kernel::Kernel(ChartPtr chart, std::vector<Jet> entries) : chart_(std::move(chart)), k_(std::move(entries)) {
    dim_ = static_cast<int>(std::lround(std::sqrt(double(k_.size()))));
    if (dim_ * dim_ != static_cast<int>(k_.size())) throw Error("kernel must be square");
    for (auto& j : k_) zero_.push_back(j.is_zero());
}

WeylForm::WeylForm(ChartPtr chart, WeylCaps caps) : chart_(std::move(chart)), caps_(caps) {}

bool WeylForm::add_key(std::uint64_t key, const Jet& c, cplx s) {
    if (wkey::total(key) > caps_.deg_max) return false;
    if (wkey::vpow(key) > caps_.v_max || wkey::zdeg(key) > caps_.s_max) {
        ++overflow_;
        return false;
    }
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        Jet j = c;
        if (s != cplx(1.0)) j *= s;
        terms_.emplace(key, std::move(j));
    } else {
        it->second.axpy(s, c);
    }
    return true;
}

bool WeylForm::add(int k, const Mono& zeta, unsigned A, const Jet& c, cplx s) {
    return add_key(wkey::make(k, zeta, A), c, s);
}

Jet WeylForm::coeff(int k, const Mono& zeta, unsigned A) const {
    auto it = terms_.find(wkey::make(k, zeta, A));
    if (it == terms_.end()) return Jet(chart_);
    return it->second;
}

WeylForm& WeylForm::operator+=(const WeylForm& o) {
    if (!chart_) {
        chart_ = o.chart_;
        caps_ = o.caps_;
    }
    for (auto& [k, c] : o.terms_) add_key(k, c);
    overflow_ += o.overflow_;
    return *this;
}

WeylForm& WeylForm::operator-=(const WeylForm& o) {
    if (!chart_) {
        chart_ = o.chart_;
        caps_ = o.caps_;
    }
    for (auto& [k, c] : o.terms_) add_key(k, c, -1.0);
    overflow_ += o.overflow_;
    return *this;
}

WeylForm& WeylForm::operator*=(cplx s) {
    for (auto& [k, c] : terms_) c *= s;
    return *this;
}

WeylForm WeylForm::times(const Jet& f) const {
    WeylForm out(chart_, caps_);
    for (auto& [k, c] : terms_) out.terms_.emplace(k, c * f);
    return out;
}

WeylForm WeylForm::filter(const std::function<bool(std::uint64_t)>& keep) const {
    WeylForm out(chart_, caps_);
    for (auto& [k, c] : terms_)
        if (keep(k)) out.terms_.emplace(k, c);
    return out;
}

WeylForm WeylForm::total_degree(int D) const {
    return filter([D](std::uint64_t k) { return wkey::total(k) == D; });
}

WeylForm WeylForm::bidegree(int p, int q) const {
    return filter([p, q](std::uint64_t k) { return wkey::zdeg(k) == p && wkey::fdeg(k) == q; });
}

int WeylForm::min_total_degree() const {
    int m = -1;
    for (auto& [k, c] : terms_)
        if (m < 0 || wkey::total(k) < m) m = wkey::total(k);
    return m;
}

int WeylForm::max_total_degree() const {
    int m = -1;
    for (auto& [k, c] : terms_) m = std::max(m, wkey::total(k));
    return m;
}

double WeylForm::norm() const {
    double m = 0;
    for (auto& [k, c] : terms_) m = std::max(m, c.norm());
    return m;
}

void WeylForm::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second.norm() <= tol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

void WeylForm::limit_reliable(int r) {
    for (auto& [k, c] : terms_)
        if (c.reliable() > r) c.set_reliable(r);
}

int WeylForm::min_reliable() const {
    int r = chart_ ? chart_->order() : 0;
    for (auto& [k, c] : terms_) r = std::min(r, c.reliable());
    return r;
}

WeylForm weyl_constant(const ChartPtr& chart, const WeylCaps& caps, const Jet& f) {
    WeylForm w(chart, caps);
    w.add(0, Mono{}, 0, f);
    return w;
}

WeylForm weyl_z(const ChartPtr& chart, const WeylCaps& caps, int a, cplx s) {
    WeylForm w(chart, caps);
    Mono m{};
    m[a] = 1;
    w.add(0, m, 0, Jet::constant(chart, s));
    return w;
}

WeylForm weyl_form1(const ChartPtr& chart, const WeylCaps& caps, int a, cplx s) {
    WeylForm w(chart, caps);
    w.add(0, Mono{}, 1u << a, Jet::constant(chart, s));
    return w;
}

namespace {

using Poly = std::vector<std::pair<std::uint64_t, Jet>>;

void check_same(const WeylForm& a, const WeylForm& b) {
    if (!a.chart() || !b.chart()) throw Error("operation on empty Weyl form");
    if (a.chart() != b.chart() && !a.chart()->same_as(*b.chart())) throw ChartMismatch();
}

std::uint64_t shift_z(std::uint64_t key, int alpha, int delta) {
    return std::uint64_t(std::int64_t(key) + std::int64_t(delta) * (std::int64_t(1) << (12 + 8 * alpha)));
}

void sort_by_degree(Poly& p) {
    std::sort(p.begin(), p.end(), [](auto& x, auto& y) {
        int dx = wkey::total(x.first), dy = wkey::total(y.first);
        return dx != dy ? dx < dy : x.first < y.first;
    });
}

// contracts one z index with the kernel: sum_al e_al K^{al beta} (or K^{beta al}) z^{zeta - al}
Poly apply_P(const Poly& p, int beta, const Kernel& K, int dim, bool transpose) {
    std::unordered_map<std::uint64_t, Jet> acc;
    for (auto& [key, c] : p) {
        for (int al = 0; al < dim; ++al) {
            int e = int((key >> (12 + 8 * al)) & 0xFF);
            if (e == 0) continue;
            int r = transpose ? beta : al, s = transpose ? al : beta;
            if (K.zero(r, s)) continue;
            Jet& slot = acc[shift_z(key, al, -1)];
            slot.fma(K.at(r, s), c, double(e));
        }
    }
    Poly out(acc.begin(), acc.end());
    sort_by_degree(out);
    return out;
}

struct Group {
    std::vector<std::pair<std::uint64_t, const Jet*>> items;
    int max_z = 0;
    int min_deg = 1 << 20;
};

std::map<unsigned, Group> group_by_form(const WeylForm& w, int max_total) {
    std::map<unsigned, Group> g;
    for (auto& [k, c] : w.terms()) {
        if (wkey::total(k) > max_total) continue;
        Group& gr = g[wkey::form(k)];
        gr.items.emplace_back(k & ~std::uint64_t(0x3F), &c);
        gr.max_z = std::max(gr.max_z, wkey::zdeg(k));
        gr.min_deg = std::min(gr.min_deg, wkey::total(k));
    }
    return g;
}

// P^lambda applied to one form group, built lazily from the parent multi-index
class Contractions {
public:
    Contractions(const Group& g, const Kernel& K, int dim, bool transpose)
        : K_(K), dim_(dim), transpose_(transpose) {
        Poly base;
        for (auto& [k, c] : g.items) base.emplace_back(k, *c);
        sort_by_degree(base);
        cache_.emplace(Mono{}, std::move(base));
    }
    // nullptr when P^lambda vanishes
    const Poly* get(const Mono& lam) {
        auto it = cache_.find(lam);
        if (it != cache_.end()) return it->second.empty() ? nullptr : &it->second;
        int beta = 0;
        while (lam[beta] == 0) ++beta;
        Mono prev = lam;
        --prev[beta];
        const Poly* parent = get(prev);
        Poly next;
        if (parent) next = apply_P(*parent, beta, K_, dim_, transpose_);
        auto& slot = cache_.emplace(lam, std::move(next)).first->second;
        return slot.empty() ? nullptr : &slot;
    }

private:
    const Kernel& K_;
    int dim_;
    bool transpose_;
    std::map<Mono, Poly> cache_;
};

}  // namespace

WeylForm wick_product(const WeylForm& a, const WeylForm& b, const Kernel& K, int min_order) {
    check_same(a, b);
    WeylCaps caps = a.caps();
    caps.v_max = std::min(caps.v_max, b.caps().v_max);
    caps.s_max = std::min(caps.s_max, b.caps().s_max);
    caps.deg_max = std::min(caps.deg_max, b.caps().deg_max);
    WeylForm out(a.chart(), caps);
    const int dim = a.chart()->dim();
    // Deg is additive, so terms that can only produce Deg > deg_max are skipped up front
    int amin = a.min_total_degree(), bmin = b.min_total_degree();
    if (amin < 0 || bmin < 0) return out;
    auto ga = group_by_form(a, caps.deg_max - bmin);
    auto gb = group_by_form(b, caps.deg_max - amin);
    const cplx half_i(0.0, 0.5);
    double fact[32];
    fact[0] = 1;
    for (int i = 1; i < 32; ++i) fact[i] = fact[i - 1] * i;

    std::map<unsigned, Contractions> ca, cb;
    std::unordered_map<std::uint64_t, Jet> acc;
    cplx pow_half_i[64];
    pow_half_i[0] = 1.0;
    for (int i = 1; i < 64; ++i) pow_half_i[i] = pow_half_i[i - 1] * half_i;

    for (auto& [A, grA] : ga) {
        for (auto& [B, grB] : gb) {
            int sgn = wedge_sign(A, B);
            if (sgn == 0) continue;
            if (grA.min_deg + grB.min_deg > caps.deg_max) continue;
            unsigned AB = A | B;
            int L = std::min(grA.max_z, grB.max_z);
            // the kernel is applied to the smaller side: sum (P^lam a)(d^lam b) = sum (d^lam a)(Q^lam b)
            const bool on_a = grA.items.size() <= grB.items.size();
            const Group& plain = on_a ? grB : grA;
            Contractions* con;
            if (on_a) {
                auto it = ca.find(A);
                if (it == ca.end()) it = ca.emplace(A, Contractions(grA, K, dim, false)).first;
                con = &it->second;
            } else {
                auto it = cb.find(B);
                if (it == cb.end()) it = cb.emplace(B, Contractions(grB, K, dim, true)).first;
                con = &it->second;
            }
            acc.clear();
            for (auto& [kb, cbj] : plain.items) {
                const Mono zb = wkey::zeta(kb);
                const int tb = wkey::total(kb);
                // all lambda <= zb with min_order <= |lambda| <= L
                Mono lam{};
                while (true) {
                    int order = 0;
                    for (int x = 0; x < dim; ++x) order += lam[x];
                    if (order >= min_order && order <= L) {
                        const Poly* pa = con->get(lam);
                        if (pa) {
                            double ff = 1.0, lamfact = 1.0;
                            std::uint64_t kbl = kb;
                            for (int x = 0; x < dim; ++x) {
                                lamfact *= fact[lam[x]];
                                for (int t = 0; t < lam[x]; ++t) ff *= double(zb[x] - t);
                                if (lam[x]) kbl = shift_z(kbl, x, -lam[x]);
                            }
                            const cplx pref = pow_half_i[order] / lamfact * double(sgn) * ff;
                            const int limit = caps.deg_max - tb - order;
                            for (auto& [ka, caj] : *pa) {
                                if (wkey::total(ka) > limit) break;
                                // keys without form bits add componentwise in v power and zeta
                                std::uint64_t key = ka + kbl + (std::uint64_t(order) << 6);
                                if (wkey::vpow(key) > caps.v_max || wkey::zdeg(key) > caps.s_max) {
                                    out.note_overflow(1);
                                    continue;
                                }
                                acc[key].fma(caj, *cbj, pref);
                            }
                        }
                    }
                    // next multi-index below zb
                    int x = 0;
                    while (x < dim && lam[x] == zb[x]) lam[x++] = 0;
                    if (x == dim) break;
                    ++lam[x];
                }
            }
            for (auto& [key, c] : acc) out.add_key(key | AB, c);
        }
    }
    return out;
}

WeylForm commutator(const WeylForm& a, const WeylForm& b, const Kernel& K) {
    auto odd = [](std::uint64_t k) { return wkey::fdeg(k) % 2 == 1; };
    auto even = [](std::uint64_t k) { return wkey::fdeg(k) % 2 == 0; };
    WeylForm ao = a.filter(odd), ae = a.filter(even);
    WeylForm bo = b.filter(odd), be = b.filter(even);
    WeylForm out = wick_product(a, b, K, 1);
    if (!ae.empty()) out -= wick_product(b, ae, K, 1);
    if (!ao.empty()) {
        if (!be.empty()) out -= wick_product(be, ao, K, 1);
        if (!bo.empty()) out += wick_product(bo, ao, K, 1);
    }
    return out;
}

WeylForm delta(const WeylForm& a) {
    WeylForm out(a.chart(), a.caps());
    const int dim = a.chart()->dim();
    for (auto& [k, c] : a.terms()) {
        unsigned A = wkey::form(k);
        for (int al = 0; al < dim; ++al) {
            int e = int((k >> (12 + 8 * al)) & 0xFF);
            if (e == 0) continue;
            int s = wedge_sign(1u << al, A);
            if (s == 0) continue;
            std::uint64_t nk = (shift_z(k, al, -1) & ~std::uint64_t(0x3F)) | (A | (1u << al));
            out.add_key(nk, c, double(s * e));
        }
    }
    return out;
}

WeylForm delta_inv(const WeylForm& a) {
    WeylForm out(a.chart(), a.caps());
    for (auto& [k, c] : a.terms()) {
        int p = wkey::zdeg(k), q = wkey::fdeg(k);
        if (p + q == 0) continue;
        unsigned A = wkey::form(k);
        int j = 0;
        for (unsigned rest = A; rest; rest &= rest - 1, ++j) {
            int al = __builtin_ctz(rest);
            std::uint64_t nk = (shift_z(k, al, +1) & ~std::uint64_t(0x3F)) | (A & ~(1u << al));
            out.add_key(nk, c, ((j & 1) ? -1.0 : 1.0) / double(p + q));
        }
    }
    return out;
}

WeylForm sigma(const WeylForm& a) {
    return a.filter([](std::uint64_t k) { return wkey::zdeg(k) == 0 && wkey::fdeg(k) == 0; });
}

WeylForm z_derivative(const WeylForm& a, int alpha) {
    WeylForm out(a.chart(), a.caps());
    for (auto& [k, c] : a.terms()) {
        int e = int((k >> (12 + 8 * alpha)) & 0xFF);
        if (e) out.add_key(shift_z(k, alpha, -1), c, double(e));
    }
    return out;
}

WeylForm z_multiply(const WeylForm& a, int alpha) {
    WeylForm out(a.chart(), a.caps());
    for (auto& [k, c] : a.terms()) out.add_key(shift_z(k, alpha, +1), c);
    return out;
}

WeylForm form_multiply(int alpha, const WeylForm& a) {
    WeylForm out(a.chart(), a.caps());
    for (auto& [k, c] : a.terms()) {
        unsigned A = wkey::form(k);
        int s = wedge_sign(1u << alpha, A);
        if (s == 0) continue;
        out.add_key(k | (1u << alpha), c, double(s));
    }
    return out;
}

}  // namespace fedq
