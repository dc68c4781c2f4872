#pragma once

#include "hconvex/jet.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace hconvex {

enum class Op {
    Number,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
};

/**
 * Immutable arithmetic expression over the variables u1..un.
 *
 * Grammar (loosest to tightest): `+ -`, `* /`, unary `-`, `^` (right
 * associative). Identifiers `u<i>` and `x<i>` both name variable i
 * (1-based); `t` names u1 for single-variable expressions; `pi` and `e`
 * are constants. Functions: sin cos tan exp log sqrt sinh cosh tanh.
 * Primitives that are not C^2 (abs, ...) are rejected.
 */
class Expression {
public:
    struct Node {
        Op op = Op::Number;
        double number = 0.0;
        std::size_t var = 0;  // 0-based
        bool has_variables = false;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };

    Expression() = default;

    static Expression parse(std::string_view source, std::size_t arity);

    std::size_t arity() const noexcept { return arity_; }
    const Node& root() const { return *root_; }
    bool empty() const noexcept { return root_ == nullptr; }

    /// Plain value. Throws DomainError like eval_jet2 does.
    double eval(std::span<const double> point) const;

    /// Value, gradient and Hessian by forward-mode second-order jets.
    Jet2 eval_jet2(std::span<const double> point) const;

    /// Value and gradient (first-order jets, no heap allocation for arity <= 16).
    double eval_gradient(std::span<const double> point, std::span<double> gradient) const;

    /// Fully parenthesized text that re-parses to an identical tree.
    std::string to_string() const;

    friend bool operator==(const Expression& a, const Expression& b);

    struct Tape;

private:
    Expression(std::shared_ptr<const Node> root, std::size_t arity);

    std::shared_ptr<const Node> root_;
    std::shared_ptr<const Tape> tape_;  // flattened form for eval_gradient
    std::size_t arity_ = 0;
};

inline Expression parse(std::string_view source, std::size_t arity) {
    return Expression::parse(source, arity);
}

inline Jet2 eval_jet2(const Expression& e, std::span<const double> point) {
    return e.eval_jet2(point);
}

/// Text of a subtree, same format as Expression::to_string.
std::string to_string(const Expression::Node& node);

}  // namespace hconvex
