#pragma once

#include "fractus/multiorder.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace fractus {

// Small expression language for dynamics and coefficients:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' number)?
//   base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
// ident ∈ {t, x1..xm}, func ∈ {sin, cos, exp, sqrt, abs}.
struct ExprNode {
    enum class Kind { constant, variable, unary, binary };
    enum class Func { neg, sin, cos, exp, sqrt, abs };

    Kind kind = Kind::constant;
    double value = 0.0;   // constant, or the exponent of '^'
    int var = 0;          // 0 is t, k ≥ 1 is xk
    Func func = Func::neg;
    char op = 0;          // + - * / ^
    std::shared_ptr<const ExprNode> lhs, rhs;

    bool operator==(const ExprNode& o) const;
};

class Expr {
public:
    Expr() = default;
    Expr(std::shared_ptr<const ExprNode> root, std::size_t m) : root_(std::move(root)), m_(m) {}

    const ExprNode& root() const { return *root_; }
    std::size_t dimension() const { return m_; }
    bool empty() const { return !root_; }
    bool uses_time() const;
    bool uses_state() const;

    bool operator==(const Expr& o) const { return root_ && o.root_ && *root_ == *o.root_; }

private:
    std::shared_ptr<const ExprNode> root_;
    std::size_t m_ = 0;
};

Expr parse_expr(std::string_view src, std::size_t m);
// Fully parenthesised text that parses back to the same tree.
std::string print_expr(const Expr& e);
// Throws EvalError on division by zero, sqrt of a negative number and any
// other non-finite result.
double eval_expr(const Expr& e, const Vector& x, double t);

} // namespace fractus
