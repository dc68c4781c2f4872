#pragma once

#include "hconvex/expr.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hconvex {

using AmbientPoint = Eigen::VectorXd;
using AmbientVector = Eigen::VectorXd;

enum class AmbientKind { Euclidean, Sphere, Hyperbolic, GeneralMetric };

std::string to_string(AmbientKind kind);

/// Tunables for the numerical geodesic machinery of GeneralMetric spaces.
struct GeodesicConfig {
    int rk4_steps = 200;
    double shooting_tolerance = 1e-10;
    int shooting_max_iterations = 50;
    double guard_radius = 1.0;
    double christoffel_fd_step = 1e-5;
};

/// Christoffel symbols Γ^k_ij at a point, indexed (k, i, j).
class Christoffel {
public:
    explicit Christoffel(std::size_t m) : m_(m), data_(m * m * m, 0.0) {}
    std::size_t dimension() const noexcept { return m_; }
    double& operator()(std::size_t k, std::size_t i, std::size_t j) { return data_[(k * m_ + i) * m_ + j]; }
    double operator()(std::size_t k, std::size_t i, std::size_t j) const { return data_[(k * m_ + i) * m_ + j]; }

    /// Γ^k_ij a^i b^j.
    Eigen::VectorXd contract(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

private:
    std::size_t m_;
    std::vector<double> data_;
};

struct GeodesicPath {
    std::vector<AmbientPoint> points;
    std::vector<AmbientVector> velocities;
};

/**
 * Ambient Riemannian manifold (N, g).
 *
 * Sphere(m, c) and Hyperbolic(m, c) are stored extrinsically: points and
 * vectors live in R^{m+1}, the sphere as {<p,p> = 1/c} with the Euclidean
 * product and the hyperboloid as {<p,p>_L = 1/c, p_0 > 0} with the
 * Minkowski product -a_0 b_0 + sum a_i b_i. Euclidean and GeneralMetric
 * spaces use m plain coordinates.
 */
class AmbientSpace {
public:
    static AmbientSpace euclidean(std::size_t m);
    static AmbientSpace sphere(std::size_t m, double c);
    static AmbientSpace hyperbolic(std::size_t m, double c);

    /// `metric` is an m x m matrix of expressions over x1..xm; it must be symmetric.
    static AmbientSpace general(std::vector<std::vector<Expression>> metric, GeodesicConfig config = {});

    AmbientKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return m_; }

    /// Length of point/vector coordinate arrays: m, or m + 1 for embedded space forms.
    std::size_t coordinate_dimension() const noexcept { return embedded() ? m_ + 1 : m_; }

    double curvature() const noexcept { return c_; }
    bool is_space_form() const noexcept { return kind_ != AmbientKind::GeneralMetric; }
    bool embedded() const noexcept { return kind_ == AmbientKind::Sphere || kind_ == AmbientKind::Hyperbolic; }
    const GeodesicConfig& geodesic_config() const noexcept { return config_; }
    const std::vector<std::vector<Expression>>& metric_expressions() const noexcept { return metric_exprs_; }

    /// Gram matrix of the coordinate inner product at p. Throws GeometryError
    /// when a GeneralMetric is not positive definite at p.
    Eigen::MatrixXd metric_matrix(const AmbientPoint& p) const;

    double metric(const AmbientPoint& p, const AmbientVector& v, const AmbientVector& w) const;
    double norm(const AmbientPoint& p, const AmbientVector& v) const;

    /// GeneralMetric only.
    Christoffel christoffel(const AmbientPoint& p) const;

    /// Removes the component of v normal to the model (space forms); identity otherwise.
    AmbientVector project_to_tangent(const AmbientPoint& p, const AmbientVector& v) const;

    /// Maximum admissible |v| for exp_map; infinity when unlimited.
    double injectivity_guard() const;

    /// Canonical base point: origin, or the "north pole" of an embedded model.
    AmbientPoint origin() const;

    AmbientPoint exp_map(const AmbientPoint& x, const AmbientVector& v) const;
    AmbientVector log_map(const AmbientPoint& x, const AmbientPoint& y) const;

    /// RK4 geodesic with initial point x and velocity v over t in [0, 1] (GeneralMetric).
    GeodesicPath integrate_geodesic(const AmbientPoint& x, const AmbientVector& v) const;

    double sectional_curvature(const AmbientPoint& p, const AmbientVector& v, const AmbientVector& w) const;

private:
    AmbientSpace(AmbientKind kind, std::size_t m, double c) : kind_(kind), m_(m), c_(c) {}

    void check_point(const AmbientPoint& p) const;
    void check_tangent(const AmbientPoint& p, const AmbientVector& v) const;
    double model_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    Eigen::VectorXd geodesic_end(const AmbientPoint& x, const AmbientVector& v) const;
    std::optional<Eigen::VectorXd> shoot(const AmbientPoint& x, const AmbientPoint& y, const AmbientVector& v0) const;

    AmbientKind kind_;
    std::size_t m_;
    double c_;
    std::vector<std::vector<Expression>> metric_exprs_;
    GeodesicConfig config_;
};

inline double metric(const AmbientSpace& s, const AmbientPoint& p, const AmbientVector& v, const AmbientVector& w) {
    return s.metric(p, v, w);
}
inline Christoffel christoffel(const AmbientSpace& s, const AmbientPoint& p) { return s.christoffel(p); }
inline AmbientPoint exp_map(const AmbientSpace& s, const AmbientPoint& x, const AmbientVector& v) {
    return s.exp_map(x, v);
}
inline AmbientVector log_map(const AmbientSpace& s, const AmbientPoint& x, const AmbientPoint& y) {
    return s.log_map(x, y);
}
inline double sectional_curvature_ambient(const AmbientSpace& s, const AmbientPoint& p, const AmbientVector& v,
                                          const AmbientVector& w) {
    return s.sectional_curvature(p, v, w);
}

}  // namespace hconvex
