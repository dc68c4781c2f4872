#include "hconvex/jet.hpp"

#include "hconvex/error.hpp"

#include <cmath>

namespace hconvex {

namespace {

Eigen::Index packed_size(std::size_t n) { return static_cast<Eigen::Index>(n * (n + 1) / 2); }

}  // namespace

Jet2 Jet2::constant(double value, std::size_t n) {
    Jet2 j;
    j.value_ = value;
    j.gradient_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    j.packed_ = Eigen::VectorXd::Zero(packed_size(n));
    return j;
}

Jet2 Jet2::variable(double value, std::size_t index, std::size_t n) {
    Jet2 j = constant(value, n);
    j.gradient_[static_cast<Eigen::Index>(index)] = 1.0;
    return j;
}

Eigen::MatrixXd Jet2::hessian() const {
    const auto n = static_cast<Eigen::Index>(arity());
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            h(i, j) = h(j, i) = packed_[static_cast<Eigen::Index>(packed_index(i, j))];
    return h;
}

Jet2 Jet2::compose(double phi, double d1, double d2) const {
    Jet2 r;
    r.value_ = phi;
    r.gradient_ = d1 * gradient_;
    r.packed_ = d1 * packed_;
    if (d2 != 0.0) {
        const std::size_t n = arity();
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i <= j; ++i)
                r.packed_[static_cast<Eigen::Index>(packed_index(i, j))] +=
                    d2 * gradient(i) * gradient(j);
    }
    return r;
}

Jet2& Jet2::operator+=(const Jet2& o) {
    value_ += o.value_;
    gradient_ += o.gradient_;
    packed_ += o.packed_;
    return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
    value_ -= o.value_;
    gradient_ -= o.gradient_;
    packed_ -= o.packed_;
    return *this;
}

Jet2& Jet2::operator*=(double s) {
    value_ *= s;
    gradient_ *= s;
    packed_ *= s;
    return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.value_ = a.value_ * b.value_;
    r.gradient_ = a.value_ * b.gradient_ + b.value_ * a.gradient_;
    r.packed_ = a.value_ * b.packed_ + b.value_ * a.packed_;
    const std::size_t n = a.arity();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i)
            r.packed_[static_cast<Eigen::Index>(Jet2::packed_index(i, j))] +=
                a.gradient(i) * b.gradient(j) + a.gradient(j) * b.gradient(i);
    return r;
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double v = b.value();
    if (v == 0.0) throw DomainError("division by zero");
    const Jet2 inv = b.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    return a * inv;
}

Jet2 sqrt(const Jet2& a) {
    const double v = a.value();
    if (!(v > 0.0)) throw DomainError("sqrt of non-positive value");
    const double s = std::sqrt(v);
    return a.compose(s, 0.5 / s, -0.25 / (s * v));
}

}  // namespace hconvex
