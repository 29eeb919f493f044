#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedq/jets.hpp"

namespace fedq {

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return double(num) / double(den); }
};

enum class ExprKind { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Exp, Log, Sin, Cos, Sinh, Cosh, Sqrt, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    Rational number;       // Constant value, or Pow exponent
    std::string name;      // Variable name
    Func func = Func::Exp;
    ExprPtr lhs;
    ExprPtr rhs;

    static ExprPtr constant(Rational q);
    static ExprPtr constant(std::int64_t v) { return constant(Rational{v, 1}); }
    static ExprPtr variable(std::string name);
    static ExprPtr unary(ExprKind k, ExprPtr a);
    static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b);
    static ExprPtr power(ExprPtr a, Rational e);
    static ExprPtr call(Func f, ExprPtr a);
};

class ParseError : public Error {
public:
    enum class Kind { Lex, Syntax, UnknownFunction };
    ParseError(Kind k, std::size_t offset, const std::string& msg);
    Kind kind() const { return kind_; }
    std::size_t offset() const { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

ExprPtr parse(const std::string& text);

// Fully parenthesized prefix form, for structural comparison.
std::string to_sexpr(const ExprPtr& e);

std::vector<std::string> free_variables(const ExprPtr& e);

Jet eval_jet(const ExprPtr& e, const ChartPtr& chart);

// Pointwise evaluation with coordinates given by name.
double eval_point(const ExprPtr& e, const std::map<std::string, double>& values);

}  // namespace fedq
