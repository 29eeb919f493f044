#include "fedq/exprlang.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

namespace fedq {

ExprPtr Expr::constant(Rational q) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Constant;
    e->number = q;
    return e;
}

ExprPtr Expr::variable(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Variable;
    e->name = std::move(name);
    return e;
}

ExprPtr Expr::unary(ExprKind k, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    return e;
}

ExprPtr Expr::binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

ExprPtr Expr::power(ExprPtr a, Rational q) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Pow;
    e->lhs = std::move(a);
    e->number = q;
    return e;
}

ExprPtr Expr::call(Func f, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Call;
    e->func = f;
    e->lhs = std::move(a);
    return e;
}

ParseError::ParseError(Kind k, std::size_t offset, const std::string& msg)
    : Error(msg + " at offset " + std::to_string(offset)), kind_(k), offset_(offset) {}

namespace {

const std::map<std::string, Func>& func_table() {
    static const std::map<std::string, Func> t = {
        {"exp", Func::Exp},   {"log", Func::Log},   {"sin", Func::Sin},   {"cos", Func::Cos},
        {"sinh", Func::Sinh}, {"cosh", Func::Cosh}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
    return t;
}

const char* func_name(Func f) {
    for (auto& [k, v] : func_table())
        if (v == f) return k.c_str();
    return "?";
}

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok type;
    std::size_t pos;
    std::string text;
    Rational num;
};

Rational reduce(std::int64_t n, std::int64_t d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    return {n, d};
}

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit((unsigned char)s[i + 1]))) {
            std::int64_t num = 0, den = 1;
            bool frac = false;
            while (i < s.size() && (std::isdigit((unsigned char)s[i]) || s[i] == '.')) {
                if (s[i] == '.') {
                    if (frac) throw ParseError(ParseError::Kind::Lex, i, "second decimal point");
                    frac = true;
                } else {
                    if (num > (INT64_MAX - 9) / 10 || den > INT64_MAX / 10)
                        throw ParseError(ParseError::Kind::Lex, start, "numeric literal too long");
                    num = num * 10 + (s[i] - '0');
                    if (frac) den *= 10;
                }
                ++i;
            }
            out.push_back({Tok::Num, start, s.substr(start, i - start), reduce(num, den)});
            continue;
        }
        if (std::isalpha(c)) {
            while (i < s.size() && std::isalnum((unsigned char)s[i])) ++i;
            out.push_back({Tok::Ident, start, s.substr(start, i - start), {}});
            continue;
        }
        Tok t;
        switch (c) {
            case '+': t = Tok::Plus; break;
            case '-': t = Tok::Minus; break;
            case '*': t = Tok::Star; break;
            case '/': t = Tok::Slash; break;
            case '^': t = Tok::Caret; break;
            case '(': t = Tok::LParen; break;
            case ')': t = Tok::RParen; break;
            default:
                throw ParseError(ParseError::Kind::Lex, i,
                                 std::string("unexpected character '") + s[i] + "'");
        }
        out.push_back({t, i, std::string(1, s[i]), {}});
        ++i;
    }
    out.push_back({Tok::End, s.size(), "", {}});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    ExprPtr run() {
        ExprPtr e = expr();
        if (peek().type != Tok::End) fail("unexpected token");
        return e;
    }

private:
    const Token& peek() const { return t_[p_]; }
    const Token& take() { return t_[p_++]; }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string what = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(ParseError::Kind::Syntax, t.pos, msg + " " + what);
    }
    void expect(Tok k, const char* what) {
        if (peek().type != k) fail(std::string("expected ") + what + ", found");
        ++p_;
    }

    ExprPtr expr() {
        ExprPtr a = term();
        while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
            ExprKind k = take().type == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
            a = Expr::binary(k, a, term());
        }
        return a;
    }

    ExprPtr term() {
        ExprPtr a = factor();
        while (peek().type == Tok::Star || peek().type == Tok::Slash) {
            ExprKind k = take().type == Tok::Star ? ExprKind::Mul : ExprKind::Div;
            a = Expr::binary(k, a, factor());
        }
        return a;
    }

    // '^' binds tighter than unary minus: -x^2 is -(x^2)
    ExprPtr factor() {
        if (peek().type == Tok::Minus) {
            ++p_;
            return Expr::unary(ExprKind::Neg, factor());
        }
        ExprPtr b = base();
        if (peek().type == Tok::Caret) {
            ++p_;
            b = Expr::power(b, exponent());
        }
        return b;
    }

    Rational exponent() {
        bool paren = false;
        if (peek().type == Tok::LParen) {
            paren = true;
            ++p_;
        }
        bool neg = false;
        if (peek().type == Tok::Minus) {
            neg = true;
            ++p_;
        }
        if (peek().type != Tok::Num || peek().num.den != 1) fail("expected integer exponent, found");
        Rational q = take().num;
        // p/q only inside parentheses, so x^2/4 reads as (x^2)/4
        if (paren && peek().type == Tok::Slash) {
            ++p_;
            if (peek().type != Tok::Num || peek().num.den != 1 || peek().num.num == 0)
                fail("expected nonzero integer denominator, found");
            q = reduce(q.num, take().num.num);
        }
        if (neg) q.num = -q.num;
        if (paren) expect(Tok::RParen, "')'");
        return q;
    }

    ExprPtr base() {
        const Token& t = peek();
        switch (t.type) {
            case Tok::Num:
                ++p_;
                return Expr::constant(t.num);
            case Tok::Ident: {
                Token id = take();
                if (peek().type == Tok::LParen) {
                    auto it = func_table().find(id.text);
                    if (it == func_table().end())
                        throw ParseError(ParseError::Kind::UnknownFunction, id.pos,
                                         "unknown function '" + id.text + "'");
                    ++p_;
                    ExprPtr a = expr();
                    expect(Tok::RParen, "')'");
                    return Expr::call(it->second, a);
                }
                return Expr::variable(id.text);
            }
            case Tok::LParen: {
                ++p_;
                ExprPtr a = expr();
                expect(Tok::RParen, "')'");
                return a;
            }
            case Tok::Minus:
                ++p_;
                return Expr::unary(ExprKind::Neg, base());
            default:
                fail("unexpected token");
        }
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
};

std::string rat_str(Rational q) {
    if (q.den == 1) return std::to_string(q.num);
    return std::to_string(q.num) + "/" + std::to_string(q.den);
}

void collect(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Variable) out.insert(e->name);
    collect(e->lhs, out);
    collect(e->rhs, out);
}

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(lex(text)).run(); }

std::string to_sexpr(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Constant: return rat_str(e->number);
        case ExprKind::Variable: return e->name;
        case ExprKind::Neg: return "(neg " + to_sexpr(e->lhs) + ")";
        case ExprKind::Add: return "(+ " + to_sexpr(e->lhs) + " " + to_sexpr(e->rhs) + ")";
        case ExprKind::Sub: return "(- " + to_sexpr(e->lhs) + " " + to_sexpr(e->rhs) + ")";
        case ExprKind::Mul: return "(* " + to_sexpr(e->lhs) + " " + to_sexpr(e->rhs) + ")";
        case ExprKind::Div: return "(/ " + to_sexpr(e->lhs) + " " + to_sexpr(e->rhs) + ")";
        case ExprKind::Pow: return "(^ " + to_sexpr(e->lhs) + " " + rat_str(e->number) + ")";
        case ExprKind::Call: return std::string("(") + func_name(e->func) + " " + to_sexpr(e->lhs) + ")";
    }
    return "";
}

std::vector<std::string> free_variables(const ExprPtr& e) {
    std::set<std::string> s;
    collect(e, s);
    return {s.begin(), s.end()};
}

Jet eval_jet(const ExprPtr& e, const ChartPtr& chart) {
    switch (e->kind) {
        case ExprKind::Constant: return Jet::constant(chart, e->number.value());
        case ExprKind::Variable: {
            int a = chart->index_of(e->name);
            if (a < 0) throw Error("undeclared coordinate '" + e->name + "'");
            return Jet::variable(chart, a);
        }
        case ExprKind::Neg: return -eval_jet(e->lhs, chart);
        case ExprKind::Add: return eval_jet(e->lhs, chart) + eval_jet(e->rhs, chart);
        case ExprKind::Sub: return eval_jet(e->lhs, chart) - eval_jet(e->rhs, chart);
        case ExprKind::Mul: return eval_jet(e->lhs, chart) * eval_jet(e->rhs, chart);
        case ExprKind::Div: {
            Jet d = eval_jet(e->rhs, chart);
            if (std::abs(d.value()) <= 1e-12) throw DomainError("division by a vanishing value");
            return eval_jet(e->lhs, chart) * invert(d);
        }
        case ExprKind::Pow: return jet_pow(eval_jet(e->lhs, chart), e->number.num, e->number.den);
        case ExprKind::Call: {
            Jet a = eval_jet(e->lhs, chart);
            switch (e->func) {
                case Func::Exp: return jet_exp(a);
                case Func::Log: return jet_log(a);
                case Func::Sin: return jet_sin(a);
                case Func::Cos: return jet_cos(a);
                case Func::Sinh: return jet_sinh(a);
                case Func::Cosh: return jet_cosh(a);
                case Func::Sqrt: return jet_sqrt(a);
                case Func::Abs: return jet_abs(a);
            }
        }
    }
    throw Error("malformed expression");
}

double eval_point(const ExprPtr& e, const std::map<std::string, double>& values) {
    switch (e->kind) {
        case ExprKind::Constant: return e->number.value();
        case ExprKind::Variable: {
            auto it = values.find(e->name);
            if (it == values.end()) throw Error("undeclared coordinate '" + e->name + "'");
            return it->second;
        }
        case ExprKind::Neg: return -eval_point(e->lhs, values);
        case ExprKind::Add: return eval_point(e->lhs, values) + eval_point(e->rhs, values);
        case ExprKind::Sub: return eval_point(e->lhs, values) - eval_point(e->rhs, values);
        case ExprKind::Mul: return eval_point(e->lhs, values) * eval_point(e->rhs, values);
        case ExprKind::Div: return eval_point(e->lhs, values) / eval_point(e->rhs, values);
        case ExprKind::Pow: {
            double b = eval_point(e->lhs, values);
            if (e->number.den == 1) return std::pow(b, double(e->number.num));
            return std::pow(b, e->number.value());
        }
        case ExprKind::Call: {
            double a = eval_point(e->lhs, values);
            switch (e->func) {
                case Func::Exp: return std::exp(a);
                case Func::Log: return std::log(a);
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Sinh: return std::sinh(a);
                case Func::Cosh: return std::cosh(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Abs: return std::abs(a);
            }
        }
    }
    throw Error("malformed expression");
}

}  // namespace fedq
