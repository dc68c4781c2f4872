#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace hconvex {

/**
 * Second-order truncated Taylor jet of a scalar function of n variables.
 *
 * Carries the value, the gradient and the Hessian. The Hessian is stored
 * as its packed upper triangle, so it is symmetric by construction.
 * Arithmetic propagates exact first and second derivatives.
 */
class Jet2 {
public:
    Jet2() = default;

    /// Constant jet in `n` variables.
    static Jet2 constant(double value, std::size_t n);

    /// The coordinate function u_{index} evaluated at `value`.
    static Jet2 variable(double value, std::size_t index, std::size_t n);

    std::size_t arity() const noexcept { return static_cast<std::size_t>(gradient_.size()); }

    double value() const noexcept { return value_; }
    const Eigen::VectorXd& gradient() const noexcept { return gradient_; }
    double gradient(std::size_t i) const { return gradient_[static_cast<Eigen::Index>(i)]; }

    double hessian(std::size_t i, std::size_t j) const { return packed_[packed_index(i, j)]; }
    Eigen::MatrixXd hessian() const;
    const Eigen::VectorXd& packed_hessian() const noexcept { return packed_; }

    /// Chain rule for a scalar primitive: d1 = phi'(value), d2 = phi''(value).
    Jet2 compose(double phi, double d1, double d2) const;

    Jet2& operator+=(const Jet2& o);
    Jet2& operator-=(const Jet2& o);
    Jet2& operator*=(double s);

    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
    friend Jet2 operator*(double s, Jet2 a) { return a *= s; }
    friend Jet2 operator-(Jet2 a) { return a *= -1.0; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b);

    /// Division; throws DomainError when b is zero.
    friend Jet2 operator/(const Jet2& a, const Jet2& b);

    /// Packed upper-triangle index of (i, j), order-insensitive.
    static std::size_t packed_index(std::size_t i, std::size_t j) noexcept {
        if (i > j) std::swap(i, j);
        return j * (j + 1) / 2 + i;
    }

private:
    double value_ = 0.0;
    Eigen::VectorXd gradient_;
    Eigen::VectorXd packed_;
};

Jet2 sqrt(const Jet2& a);

}  // namespace hconvex
