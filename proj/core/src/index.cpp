#include "fedq/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

namespace fedq {

namespace {

const cplx kI(0.0, 1.0);

int popcount(unsigned A) { return __builtin_popcount(A); }

}  // namespace

// ---------------------------------------------------------------- FormSeries

FormSeries FormSeries::scalar(ChartPtr chart, int dim, const Jet& c, int vpow) {
    FormSeries f(std::move(chart), dim);
    f.add(vpow, 0, c);
    return f;
}

void FormSeries::add(int vpow, unsigned A, const Jet& c, cplx s) {
    if (popcount(A) > dim_) return;
    auto it = terms_.find({vpow, A});
    if (it == terms_.end())
        terms_.emplace(Key{vpow, A}, c * s);
    else
        it->second.axpy(s, c);
}

Jet FormSeries::coeff(int vpow, unsigned A) const {
    auto it = terms_.find({vpow, A});
    return it == terms_.end() ? Jet::constant(chart_, 0.0) : it->second;
}

FormSeries& FormSeries::operator+=(const FormSeries& o) {
    if (!chart_) {
        chart_ = o.chart_;
        dim_ = o.dim_;
    }
    for (auto& [k, c] : o.terms_) add(k.first, k.second, c);
    return *this;
}

FormSeries& FormSeries::operator-=(const FormSeries& o) {
    if (!chart_) {
        chart_ = o.chart_;
        dim_ = o.dim_;
    }
    for (auto& [k, c] : o.terms_) add(k.first, k.second, c, -1.0);
    return *this;
}

FormSeries& FormSeries::operator*=(cplx s) {
    for (auto& [k, c] : terms_) c *= s;
    return *this;
}

FormSeries FormSeries::form_degree(int p) const {
    FormSeries out(chart_, dim_);
    for (auto& [k, c] : terms_)
        if (popcount(k.second) == p) out.terms_.emplace(k, c);
    return out;
}

FormSeries FormSeries::v_shift(int k) const {
    FormSeries out(chart_, dim_);
    for (auto& [key, c] : terms_) out.terms_.emplace(Key{key.first + k, key.second}, c);
    return out;
}

std::map<int, Jet> FormSeries::top() const {
    const unsigned full = (1u << dim_) - 1;
    std::map<int, Jet> out;
    for (auto& [k, c] : terms_)
        if (k.second == full) out.emplace(k.first, c);
    return out;
}

double FormSeries::norm() const {
    double m = 0;
    for (auto& [k, c] : terms_) m = std::max(m, c.norm());
    return m;
}

void FormSeries::prune(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->second.norm() <= tol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

FormSeries wedge(const FormSeries& a, const FormSeries& b) {
    FormSeries out(a.chart() ? a.chart() : b.chart(), std::max(a.dim(), b.dim()));
    for (auto& [ka, ca] : a.terms())
        for (auto& [kb, cb] : b.terms()) {
            int s = wedge_sign(ka.second, kb.second);
            if (s == 0) continue;
            out.add(ka.first + kb.first, ka.second | kb.second, Jet::multiply(ca, cb), double(s));
        }
    return out;
}

FormSeries form_exp(const FormSeries& x) {
    for (auto& [k, c] : x.terms())
        if (k.second == 0 && !c.is_zero()) throw Error("form_exp needs a series without 0-form part");
    FormSeries out = FormSeries::scalar(x.chart(), x.dim(), Jet::constant(x.chart(), 1.0));
    FormSeries term = out;
    for (int m = 1; m <= x.dim(); ++m) {
        term = wedge(term, x);
        term *= 1.0 / m;
        term.prune();
        if (term.empty()) break;
        out += term;
    }
    return out;
}

FormSeries to_form_series(const WeylForm& w) {
    FormSeries out(w.chart(), w.chart()->dim());
    for (auto& [k, c] : w.terms()) {
        if (wkey::zdeg(k) != 0) throw Error("to_form_series expects a z-independent Weyl form");
        out.add(wkey::vpow(k), wkey::form(k), c);
    }
    return out;
}

namespace {

WeylForm to_weyl(const FormSeries& f) {
    WeylCaps caps{63, 0, 1 << 20};
    WeylForm out(f.chart(), caps);
    for (auto& [k, c] : f.terms()) {
        if (k.first < 0) throw Error("negative power of v in a Weyl form");
        out.add(k.first, Mono{}, k.second, c);
    }
    return out;
}

MatrixFormSeries zero_matrix(const ChartPtr& chart, int dim, int k) {
    MatrixFormSeries m;
    m.k = k;
    m.e.assign(k * k, FormSeries(chart, dim));
    return m;
}

}  // namespace

MatrixFormSeries matrix_wedge(const MatrixFormSeries& a, const MatrixFormSeries& b) {
    if (a.k != b.k) throw Error("matrix size mismatch");
    MatrixFormSeries out = zero_matrix(a.e[0].chart(), a.e[0].dim(), a.k);
    for (int i = 0; i < a.k; ++i)
        for (int j = 0; j < a.k; ++j)
            for (int l = 0; l < a.k; ++l) out(i, j) += wedge(a(i, l), b(l, j));
    return out;
}

FormSeries trace(const MatrixFormSeries& m) {
    FormSeries out(m.e.empty() ? nullptr : m.e[0].chart(), m.e.empty() ? 0 : m.e[0].dim());
    for (int i = 0; i < m.k; ++i) out += m(i, i);
    return out;
}

MatrixFormSeries direct_sum(const MatrixFormSeries& a, const MatrixFormSeries& b) {
    const FormSeries& ref = a.e.empty() ? b.e[0] : a.e[0];
    MatrixFormSeries out = zero_matrix(ref.chart(), ref.dim(), a.k + b.k);
    for (int i = 0; i < a.k; ++i)
        for (int j = 0; j < a.k; ++j) out(i, j) = a(i, j);
    for (int i = 0; i < b.k; ++i)
        for (int j = 0; j < b.k; ++j) out(a.k + i, a.k + j) = b(i, j);
    return out;
}

MatrixFormSeries curvature_forms(const DConnectionData& conn, const GeometryData& geo) {
    const int d = 2 * geo.n;
    MatrixFormSeries out = zero_matrix(geo.chart, d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int be = 0; be < d; ++be)
                for (int g = be + 1; g < d; ++g) {
                    // R^a_b(e_be, e_g) = R(a, b, g, be)
                    const Jet& r = conn.R(a, b, g, be);
                    if (!r.is_zero()) out(a, b).add(0, (1u << be) | (1u << g), r);
                }
    return out;
}

MatrixFormSeries bundle_curvature(const MatrixFormSeries& G, const GeometryData& geo) {
    MatrixFormSeries out = matrix_wedge(G, G);
    for (int e = 0; e < G.k * G.k; ++e) {
        for (auto& [k, c] : G.e[e].terms())
            if (popcount(k.second) != 1) throw Error("bundle connection entries must be 1-forms");
        out.e[e] += to_form_series(exterior_d(to_weyl(G.e[e]), geo));
    }
    return out;
}

// ---------------------------------------------------------------- characteristic series

std::vector<double> series_t_over_sinh(int order) {
    // sinh(t)/t = sum t^{2k}/(2k+1)!, inverted as a power series
    std::vector<double> s(order + 1, 0.0), r(order + 1, 0.0);
    double f = 1.0;
    for (int k = 0; k <= order; ++k) {
        if (k > 0) f *= double(k);
        if (k % 2 == 0) s[k] = 1.0 / (f * (k + 1));
    }
    r[0] = 1.0;
    for (int k = 1; k <= order; ++k) {
        double acc = 0;
        for (int j = 1; j <= k; ++j) acc += s[j] * r[k - j];
        r[k] = -acc;
    }
    return r;
}

std::vector<double> series_log(const std::vector<double>& a) {
    if (a.empty() || a[0] != 1.0) throw Error("series_log needs a leading coefficient 1");
    std::vector<double> b(a.size(), 0.0);
    for (std::size_t n = 1; n < a.size(); ++n) {
        double acc = 0;
        for (std::size_t k = 1; k < n; ++k) acc += double(k) * b[k] * a[n - k];
        b[n] = a[n] - acc / double(n);
    }
    return b;
}

namespace {

using TracePoly = std::map<std::vector<int>, double>;

int trace_degree(const std::vector<int>& m) {
    int d = 0;
    for (std::size_t i = 0; i < m.size(); ++i) d += 2 * int(i + 1) * m[i];
    return d;
}

TracePoly poly_mul(const TracePoly& a, const TracePoly& b, int max_degree) {
    TracePoly out;
    for (auto& [ma, ca] : a)
        for (auto& [mb, cb] : b) {
            std::vector<int> m(ma.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
            if (trace_degree(m) > max_degree) continue;
            out[m] += ca * cb;
        }
    return out;
}

}  // namespace

std::map<std::vector<int>, double> ahat_trace_expansion(int max_degree) {
    const int M = std::max(0, max_degree / 2);
    std::vector<double> lg = series_log(series_t_over_sinh(2 * M));
    // 1/2 tr log(x / sinh x) at x = F/2: sum_m 1/2 lg[2m] 2^{-2m} p_{2m}
    TracePoly x;
    for (int m = 1; m <= M; ++m) {
        std::vector<int> key(M, 0);
        key[m - 1] = 1;
        x[key] = 0.5 * lg[2 * m] / std::pow(2.0, 2 * m);
    }
    TracePoly out{{std::vector<int>(M, 0), 1.0}}, term = out;
    for (int k = 1; k <= M; ++k) {
        term = poly_mul(term, x, max_degree);
        for (auto& [m, c] : term) c /= double(k);
        for (auto& [m, c] : term) out[m] += c;
    }
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0.0 ? out.erase(it) : std::next(it);
    return out;
}

FormSeries ahat_genus(const MatrixFormSeries& F, int order) {
    const FormSeries& ref = F.e.at(0);
    const int dim = ref.dim();
    if (order < 0) order = dim / 2;
    TracePoly expansion = ahat_trace_expansion(order);
    const int M = std::max(0, order / 2);
    std::vector<FormSeries> p(M + 1);
    MatrixFormSeries F2 = matrix_wedge(F, F), pw = F2;
    for (int m = 1; m <= M; ++m) {
        if (m > 1) pw = matrix_wedge(pw, F2);
        p[m] = trace(pw);
    }
    FormSeries out(ref.chart(), dim);
    for (auto& [mult, c] : expansion) {
        FormSeries t = FormSeries::scalar(ref.chart(), dim, Jet::constant(ref.chart(), c));
        for (int m = 1; m <= M; ++m)
            for (int r = 0; r < mult[m - 1]; ++r) t = wedge(t, p[m]);
        out += t;
    }
    out.prune();
    return out;
}

FormSeries chern_character(const MatrixFormSeries& Rv, int order) {
    const FormSeries& ref = Rv.e.at(0);
    const int dim = ref.dim();
    if (order < 0) order = dim / 2;
    FormSeries out = FormSeries::scalar(ref.chart(), dim, Jet::constant(ref.chart(), double(Rv.k)));
    MatrixFormSeries pw = Rv;
    double fact = 1.0;
    for (int k = 1; k <= order; ++k) {
        if (k > 1) pw = matrix_wedge(pw, Rv);
        fact *= k;
        FormSeries t = trace(pw);
        t *= 1.0 / fact;
        out += t;
    }
    out.prune();
    return out;
}

std::map<int, Jet> index_class(const FormSeries& C, const FormSeries& ahat, const FormSeries& ch) {
    FormSeries x = C.v_shift(-1);
    x *= -1.0;
    x.prune();
    return wedge(wedge(ahat, form_exp(x)), ch).top();
}

FormSeries fedosov_weyl_class(const FedosovState& s) {
    CurvatureReport rep = weyl_curvature(s);
    const GeometryData& geo = *s.geo;
    const int d = 2 * geo.n;
    FormSeries out = to_form_series(rep.omega_v);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (!geo.theta(a, b).is_zero()) out.add(0, (1u << a) | (1u << b), geo.theta(a, b), -1.0);
    out.prune();
    return out;
}

std::map<int, Jet> index_class(const FedosovState& s, const MatrixFormSeries& Rv) {
    const GeometryData& geo = *s.geo;
    FormSeries ahat = ahat_genus(curvature_forms(*s.conn, geo));
    FormSeries ch = Rv.k > 0 ? chern_character(Rv)
                             : FormSeries::scalar(geo.chart, 2 * geo.n, Jet::constant(geo.chart, 1.0));
    return index_class(fedosov_weyl_class(s), ahat, ch);
}

// ---------------------------------------------------------------- idempotents

namespace {

VSeries sigma_series(const WeylForm& p, const ChartPtr& ch, int order) {
    VSeries out(order + 1, Jet::constant(ch, 0.0));
    for (auto& [k, c] : p.terms())
        if (wkey::zdeg(k) == 0 && wkey::form(k) == 0 && wkey::vpow(k) <= order) out[wkey::vpow(k)] += c;
    return out;
}

MatrixSeries combine(const MatrixSeries& a, cplx sa, const MatrixSeries& b, cplx sb) {
    MatrixSeries out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t r = 0; r < out[i][j].size(); ++r) {
                out[i][j][r] *= sa;
                if (r < b[i][j].size()) out[i][j][r].axpy(sb, b[i][j][r]);
            }
    return out;
}

}  // namespace

MatrixSeries matrix_star(const MatrixSeries& a, const MatrixSeries& b, const FedosovState& s, int order) {
    const std::size_t k = a.size();
    if (b.size() != k) throw Error("matrix size mismatch");
    const ChartPtr& ch = s.geo->chart;
    const int D = 2 * order;
    std::vector<std::vector<WeylForm>> la(k), lb(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            la[i].push_back(chi_lift(a[i][j], s, D));
            lb[i].push_back(chi_lift(b[i][j], s, D));
        }
    MatrixSeries out(k, std::vector<VSeries>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            WeylForm acc(ch, la[0][0].caps());
            for (std::size_t l = 0; l < k; ++l) acc += wick_product(la[i][l], lb[l][j], s.kernel);
            out[i][j] = sigma_series(acc, ch, order);
        }
    return out;
}

MatrixSeries idempotent_lift(const std::vector<std::vector<Jet>>& p0, const FedosovState& s, int order) {
    const std::size_t k = p0.size();
    MatrixSeries z(k, std::vector<VSeries>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            z[i][j].assign(order + 1, Jet::constant(s.geo->chart, 0.0));
            z[i][j][0] = p0[i][j];
        }
    double classical = 0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            Jet e = -p0[i][j];
            for (std::size_t l = 0; l < k; ++l) e += p0[i][l] * p0[l][j];
            classical = std::max(classical, e.norm());
        }
    if (classical > 1e-8) throw Error("idempotent_lift: the classical symbol is not idempotent");
    int iters = 1;
    while ((1 << (iters - 1)) <= order) ++iters;
    for (int it = 0; it < iters; ++it) {
        MatrixSeries z2 = matrix_star(z, z, s, order);
        MatrixSeries z3 = matrix_star(z2, z, s, order);
        z = combine(z2, 3.0, z3, -2.0);
    }
    return z;
}

std::vector<std::vector<Jet>> principal_symbol(const MatrixSeries& zeta, const FedosovState& s, int order,
                                               double tol) {
    MatrixSeries z2 = matrix_star(zeta, zeta, s, order);
    double defect = 0;
    for (std::size_t i = 0; i < zeta.size(); ++i)
        for (std::size_t j = 0; j < zeta.size(); ++j)
            for (int r = 0; r <= order; ++r) {
                Jet e = z2[i][j][r];
                if (r < int(zeta[i][j].size())) e -= zeta[i][j][r];
                defect = std::max(defect, e.norm());
            }
    if (defect > tol) throw Error("principal_symbol: input is not an idempotent (defect " + std::to_string(defect) + ")");
    std::vector<std::vector<Jet>> out(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i)
        for (std::size_t j = 0; j < zeta.size(); ++j) out[i].push_back(zeta[i][j].at(0));
    return out;
}

// ---------------------------------------------------------------- Lie algebra cocycles

MatrixWeyl project_rho(const MatrixWeyl& x) {
    MatrixWeyl out = x;
    for (auto& e : out.e) e = WeylForm(e.chart(), e.caps());
    WeylForm quad(x.e[0].chart(), x.e[0].caps());
    for (int i = 0; i < x.k; ++i)
        for (auto& [key, c] : x(i, i).terms())
            if (wkey::zdeg(key) == 2) quad.add_key(key, c, 1.0 / x.k);
    for (int i = 0; i < x.k; ++i)
        for (int j = 0; j < x.k; ++j) {
            for (auto& [key, c] : x(i, j).terms())
                if (wkey::zdeg(key) == 0) out(i, j).add_key(key, c);
            if (i == j) out(i, j) += quad;
        }
    return out;
}

MatrixWeyl matrix_commutator(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K) {
    MatrixWeyl ab = matrix_product(a, b, K), ba = matrix_product(b, a, K);
    for (std::size_t i = 0; i < ab.e.size(); ++i) {
        ab.e[i] -= ba.e[i];
        ab.e[i].prune();
    }
    return ab;
}

MatrixWeyl projection_curvature(const MatrixWeyl& a, const MatrixWeyl& b, const Kernel& K) {
    MatrixWeyl out = matrix_commutator(project_rho(a), project_rho(b), K);
    MatrixWeyl p = project_rho(matrix_commutator(a, b, K));
    for (std::size_t i = 0; i < out.e.size(); ++i) {
        out.e[i] -= p.e[i];
        out.e[i].prune();
    }
    return out;
}

namespace {

int permutation_sign(const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) ++inv;
    return inv % 2 ? -1 : 1;
}

void add_series(ScalarSeries& acc, const ScalarSeries& x, cplx s) {
    for (auto& [k, c] : x) acc[k] += s * c;
}

}  // namespace

ScalarSeries chern_weil_cocycle(const MultilinearForm& A, const std::vector<MatrixWeyl>& x, const Kernel& K) {
    const int m = static_cast<int>(x.size());
    if (m % 2 != 0 || m < 2 || m > 4) throw Error("chern_weil_cocycle takes 2 or 4 arguments");
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    double fact = 1;
    for (int i = 2; i <= m; ++i) fact *= i;
    ScalarSeries out;
    do {
        std::vector<MatrixWeyl> args;
        for (int i = 0; i < m; i += 2) args.push_back(projection_curvature(x[p[i]], x[p[i + 1]], K));
        add_series(out, A(args), permutation_sign(p) / fact);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

ScalarSeries trace_form(const std::vector<MatrixWeyl>& x) {
    if (x.size() != 1) throw Error("trace_form is linear");
    ScalarSeries out;
    for (int i = 0; i < x[0].k; ++i)
        for (auto& [key, c] : x[0](i, i).terms())
            if (wkey::zdeg(key) == 0 && wkey::form(key) == 0) out[wkey::vpow(key) - 1] += c.value();
    return out;
}

// ---------------------------------------------------------------- Hochschild cocycle, 2-dimensional fiber

std::pair<long long, long long> simplex_integral(int a, int b) {
    long long num = 1, den = (long long)(a + 1) * (a + b + 2);
    return {num, den};
}

namespace {

// z_{slot, alpha} exponents (6 bits each), then v, p1, p2 (8 bits each)
using PKey = std::uint64_t;
using PPoly = std::unordered_map<PKey, cplx>;
constexpr int kVShift = 36, kP1Shift = 44, kP2Shift = 52;

int pz(PKey k, int var) { return int((k >> (6 * var)) & 0x3F); }
int pfield(PKey k, int shift) { return int((k >> shift) & 0xFF); }

void padd(PPoly& p, PKey k, cplx c) {
    if (c == cplx{}) return;
    auto [it, fresh] = p.emplace(k, c);
    if (!fresh) it->second += c;
}

PPoly pderiv(const PPoly& p, int var) {
    PPoly out;
    for (auto& [k, c] : p) {
        int e = pz(k, var);
        if (e == 0) continue;
        padd(out, k - (PKey(1) << (6 * var)), c * double(e));
    }
    return out;
}

PPoly slot_poly(const WeylForm& q, int slot) {
    PPoly out;
    for (auto& [k, c] : q.terms()) {
        if (wkey::form(k) != 0) throw Error("ffs_cocycle_2 takes 0-form slots");
        Mono z = wkey::zeta(k);
        for (int a = 2; a < kMaxDim; ++a)
            if (z[a]) throw Error("ffs_cocycle_2 needs a 2-dimensional fiber");
        if (z[0] > 63 || z[1] > 63) throw CapOverflow("ffs_cocycle_2: z exponent beyond 63");
        PKey key = (PKey(z[0]) << (6 * (2 * slot))) | (PKey(z[1]) << (6 * (2 * slot + 1))) |
                   (PKey(wkey::vpow(k)) << kVShift);
        padd(out, key, c.value());
    }
    return out;
}

PPoly pmul(const PPoly& a, const PPoly& b) {
    PPoly out;
    for (auto& [ka, ca] : a)
        for (auto& [kb, cb] : b) padd(out, ka + kb, ca * cb);
    return out;
}

}  // namespace

ScalarSeries ffs_cocycle_2(const WeylForm& q0, const WeylForm& q1, const WeylForm& q2,
                           const std::vector<std::vector<cplx>>& K) {
    if (K.size() != 2 || K[0].size() != 2 || K[1].size() != 2) throw Error("ffs_cocycle_2 needs a 2x2 kernel");
    PPoly T = pmul(pmul(slot_poly(q0, 0), slot_poly(q1, 1)), slot_poly(q2, 2));
    // pi_2: eps^{a1 a2} d_{1,a1} d_{2,a2}
    PPoly X;
    for (int a1 = 0; a1 < 2; ++a1) {
        int a2 = 1 - a1;
        double eps = a1 == 0 ? 1.0 : -1.0;
        for (auto& [k, c] : pderiv(pderiv(T, 2 * 1 + a1), 2 * 2 + a2)) padd(X, k, eps * c);
    }
    // L = sum_{b<g} v (p_b - p_g + 1/2) i K^{aa'} d_{b,a} d_{g,a'}, p_0 = 0
    auto applyL = [&](const PPoly& P) {
        PPoly out;
        const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (auto& pr : pairs) {
            int be = pr[0], g = pr[1];
            PPoly B;
            for (int a = 0; a < 2; ++a)
                for (int ap = 0; ap < 2; ++ap) {
                    if (K[a][ap] == cplx{}) continue;
                    for (auto& [k, c] : pderiv(pderiv(P, 2 * be + a), 2 * g + ap)) padd(B, k, kI * K[a][ap] * c);
                }
            const PKey v1 = PKey(1) << kVShift;
            for (auto& [k, c] : B) {
                padd(out, k + v1, 0.5 * c);
                if (be == 1) padd(out, k + v1 + (PKey(1) << kP1Shift), c);
                if (g == 1) padd(out, k + v1 + (PKey(1) << kP1Shift), -c);
                if (g == 2) padd(out, k + v1 + (PKey(1) << kP2Shift), -c);
            }
        }
        return out;
    };
    PPoly total = X, term = X;
    for (int m = 1; !term.empty(); ++m) {
        term = applyL(term);
        for (auto& [k, c] : term) c /= double(m);
        for (auto& [k, c] : term) padd(total, k, c);
    }
    ScalarSeries out;
    const PKey zmask = (PKey(1) << kVShift) - 1;
    for (auto& [k, c] : total) {
        if (k & zmask) continue;
        auto [num, den] = simplex_integral(pfield(k, kP1Shift), pfield(k, kP2Shift));
        out[pfield(k, kVShift)] += c * (double(num) / double(den));
    }
    for (auto it = out.begin(); it != out.end();)
        it = std::abs(it->second) == 0.0 ? out.erase(it) : std::next(it);
    return out;
}

ScalarSeries chain_map_extension(const Cochain& psi, const std::vector<Decorated>& args, const Decorated& a0) {
    const int r = static_cast<int>(args.size());
    if (r > 3) throw Error("chain_map_extension supports at most 3 arguments");
    const std::size_t k = a0.A.size();
    for (auto& d : args)
        if (d.A.size() != k) throw Error("matrix size mismatch");
    std::vector<int> p(r);
    std::iota(p.begin(), p.end(), 0);
    double fact = 1;
    for (int i = 2; i <= r; ++i) fact *= i;
    ScalarSeries out;
    do {
        std::vector<std::vector<cplx>> M = a0.A;
        for (int i = 0; i < r; ++i) {
            const auto& B = args[p[i]].A;
            std::vector<std::vector<cplx>> P(k, std::vector<cplx>(k));
            for (std::size_t x = 0; x < k; ++x)
                for (std::size_t y = 0; y < k; ++y)
                    for (std::size_t l = 0; l < k; ++l) P[x][y] += M[x][l] * B[l][y];
            M = std::move(P);
        }
        cplx tr = 0;
        for (std::size_t x = 0; x < k; ++x) tr += M[x][x];
        if (tr == cplx{}) continue;
        std::vector<WeylForm> as;
        for (int i = 0; i < r; ++i) as.push_back(args[p[i]].a);
        add_series(out, psi(as, a0.a), tr * (permutation_sign(p) / fact));
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

ScalarSeries trace_density_2(const FedosovState& s, const std::vector<std::vector<Jet>>& a, int max_deg) {
    const GeometryData& geo = *s.geo;
    if (geo.n != 1) throw Error("trace_density_2 is implemented for n = 1");
    const std::size_t k = a.size();
    std::vector<std::vector<cplx>> K(2, std::vector<cplx>(2));
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) K[x][y] = s.kernel.at(x, y).value();

    // components of the 1-form gamma0 + r
    WeylForm Theta = s.gamma0 + s.r_total;
    std::vector<WeylForm> comp(2, WeylForm(geo.chart, Theta.caps()));
    for (auto& [key, c] : Theta.terms()) {
        unsigned A = wkey::form(key);
        if (popcount(A) != 1) continue;
        comp[__builtin_ctz(A)].add_key(key & ~std::uint64_t(0x3F), c);
    }
    std::vector<std::vector<cplx>> I(k, std::vector<cplx>(k));
    for (std::size_t i = 0; i < k; ++i) I[i][i] = 1.0;
    std::vector<Decorated> args{{I, comp[0]}, {I, comp[1]}};
    Cochain tau = [&K](const std::vector<WeylForm>& q, const WeylForm& q0) {
        return ffs_cocycle_2(q0, q[0], q[1], K);
    };
    ScalarSeries out;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (a[i][j].is_zero()) continue;
            std::vector<std::vector<cplx>> E(k, std::vector<cplx>(k));
            E[i][j] = 1.0;
            WeylForm chi = chi_lift(a[i][j], s, max_deg);
            // e^0 ^ e^1 coefficient of the wedge: twice the antisymmetrized value
            for (auto& [p, c] : chain_map_extension(tau, args, {E, chi})) out[p - 1] += 2.0 * c;
        }
    return out;
}

// ---------------------------------------------------------------- fingerprints

namespace {

double snap(double x) {
    if (std::abs(x) < 1e-10) return 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return std::strtod(buf, nullptr);
}

cplx snap(cplx z) { return {snap(z.real()), snap(z.imag())}; }

std::string geometry_hash(const GeometryData& geo) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&geo.n, sizeof geo.n);
    for (double x : geo.chart->base_point()) {
        double s = snap(x);
        mix(&s, sizeof s);
    }
    for (auto& j : geo.g.flat())
        for (std::size_t i = 0; i < j.coeffs().size() && int(geo.chart->degree(i)) <= j.reliable(); ++i) {
            double re = snap(j.coeff(i).real()), im = snap(j.coeff(i).imag());
            mix(&re, sizeof re);
            mix(&im, sizeof im);
        }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void add_scalars(Fingerprint& f, const DConnectionData& conn) {
    f.values.emplace_back("scalar", snap(conn.scalar.value()));
    f.values.emplace_back("scalar_h", snap(conn.scalar_h.value()));
    f.values.emplace_back("scalar_v", snap(conn.scalar_v.value()));
}

}  // namespace

Fingerprint solution_fingerprint(const GeometryData& geo, const DConnectionData& conn) {
    Fingerprint f;
    f.geometry_hash = geometry_hash(geo);
    add_scalars(f, conn);
    return f;
}

Fingerprint solution_fingerprint(const FedosovState& s) {
    const GeometryData& geo = *s.geo;
    const int d = 2 * geo.n;
    Fingerprint f;
    f.geometry_hash = geometry_hash(geo);
    add_scalars(f, *s.conn);

    FormSeries C = fedosov_weyl_class(s);
    // frame-independent contractions of the v-corrections
    for (int k = 0; k <= f.v_order; ++k) {
        std::vector<std::vector<cplx>> w(d, std::vector<cplx>(d));
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) {
                cplx c = C.coeff(k, (1u << a) | (1u << b)).value();
                if (k == 0) c += geo.theta(a, b).value();
                w[a][b] = c;
                w[b][a] = -c;
            }
        cplx tr = 0, sq = 0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                tr += 0.5 * geo.theta_inv(a, b).value() * w[a][b];
                for (int c = 0; c < d; ++c)
                    for (int e = 0; e < d; ++e)
                        sq += geo.g_inv(a, c).value() * geo.g_inv(b, e).value() * w[a][b] * w[c][e];
            }
        f.values.emplace_back("omega_theta_v" + std::to_string(k), snap(tr));
        f.values.emplace_back("omega_square_v" + std::to_string(k), snap(sq));
    }

    // index class relative to the symplectic volume theta^n / n!
    FormSeries th(geo.chart, d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) th.add(0, (1u << a) | (1u << b), geo.theta(a, b));
    FormSeries vol = FormSeries::scalar(geo.chart, d, Jet::constant(geo.chart, 1.0));
    for (int m = 1; m <= geo.n; ++m) {
        vol = wedge(vol, th);
        vol *= 1.0 / m;
    }
    cplx pf = vol.coeff(0, (1u << d) - 1).value();
    FormSeries ahat = ahat_genus(curvature_forms(*s.conn, geo));
    FormSeries one = FormSeries::scalar(geo.chart, d, Jet::constant(geo.chart, 1.0));
    auto cl = index_class(C, ahat, one);
    for (int k = -geo.n; k <= 0; ++k) {
        auto it = cl.find(k);
        cplx v = it == cl.end() ? cplx{} : it->second.value() / pf;
        f.values.emplace_back("index_v" + std::to_string(k), snap(v));
    }
    return f;
}

std::string fingerprint_json(const Fingerprint& f) {
    nlohmann::ordered_json j;
    j["geometry_hash"] = f.geometry_hash;
    j["v_order"] = f.v_order;
    nlohmann::ordered_json vals = nlohmann::ordered_json::array();
    for (auto& [name, z] : f.values) vals.push_back({{"name", name}, {"value", {z.real(), z.imag()}}});
    j["values"] = vals;
    return j.dump(2);
}

bool fingerprints_equal(const Fingerprint& a, const Fingerprint& b, double tol) {
    if (a.values.size() != b.values.size()) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i].first != b.values[i].first) return false;
        const cplx x = a.values[i].second, y = b.values[i].second;
        if (std::abs(x - y) > tol * std::max(1.0, std::max(std::abs(x), std::abs(y)))) return false;
    }
    return true;
}

}  // namespace fedq
