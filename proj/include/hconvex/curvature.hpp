#pragma once

#include "hconvex/convexity.hpp"
#include "hconvex/immersion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace hconvex {

/**
 * Second fundamental form of a submanifold of a space form, expressed in
 * a g-orthonormal tangent basis and an orthonormal normal basis:
 * components[α](i, j) = <h(e_i, e_j), ν_α>. Sectional curvatures of M then
 * follow from the Gauss equation without further reference to the chart.
 */
class GaussData {
public:
    GaussData(const PointGeometry& pg, double c);

    std::size_t dimension() const noexcept { return n_; }
    double ambient_curvature() const noexcept { return c_; }

    /// Chart coordinates of the orthonormal basis (columns).
    const Eigen::MatrixXd& orthonormal_basis() const noexcept { return basis_; }
    const std::vector<Eigen::MatrixXd>& components() const noexcept { return components_; }

    /// Sectional curvature of span{a, b} for g-orthonormal a, b given in orthonormal coordinates.
    double sectional_orthonormal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

    /// Sum over j = 2..k of K(q_1 ∧ q_j) for orthonormal columns q of `frame`.
    double ric_sum(const Eigen::MatrixXd& frame, std::size_t k) const;

private:
    std::size_t n_;
    double c_;
    Eigen::MatrixXd basis_;
    std::vector<Eigen::MatrixXd> components_;
};

/// K(X ∧ Y) from the Gauss equation in general codimension; X, Y chart vectors.
double sectional_gauss(const PointGeometry& pg, double c, const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

/// Hypersurface form c + (Ω(X,X)Ω(Y,Y) - Ω(X,Y)^2) / |H|^2, normalized by the Gram determinant.
double sectional_gauss_hypersurface(const PointGeometry& pg, double c, const Eigen::VectorXd& X,
                                    const Eigen::VectorXd& Y);

/// Sum of K(X ∧ e'_j) over an orthonormal completion of X inside span(L).
/// L holds k chart vectors as columns; X must be a g-unit vector in span(L).
double ric_L(const PointGeometry& pg, double c, const Eigen::MatrixXd& L, const Eigen::VectorXd& X);

struct ThetaConfig {
    int starts = 64;
    int iterations = 200;
    double tolerance = 1e-10;  // stop when a sweep improves less than this
    std::uint64_t seed = 0;
    int line_samples = 24;
};

struct ThetaResult {
    double value = 0.0;       // θ_k
    Eigen::MatrixXd frame;    // k chart vectors, first column is the minimizing X
};

/// Estimate of θ_k = min over k-planes L and unit X ∈ L of Ric_L(X) / (k - 1).
ThetaResult theta_k(const PointGeometry& pg, double c, std::size_t k, const ThetaConfig& config = {});

struct SectionalRange {
    double min = 0.0;
    double max = 0.0;
};

/// Extremes of K over 2-planes (optimized, cross-checked with random planes).
SectionalRange sectional_range(const PointGeometry& pg, double c, const ThetaConfig& config = {});

struct ChenTolerances {
    double tol_chen = 1e-6;    // allowed negative margin
    double theta_gap = 1e-4;   // |θ_k - c| above this must give a strict inequality
    double strict_floor = 1e-12;
};

struct ChenResult {
    std::size_t k = 2;
    double theta = 0.0;
    double lambda_min = 0.0;  // smallest eigenvalue of A_H
    double margin = 0.0;      // lambda_min - (n-1)/n (θ_k - c)
    bool strict = false;
    bool consistent = false;
};

ChenResult chen_check(const PointGeometry& pg, double c, std::size_t k, const ThetaConfig& config = {},
                      const ChenTolerances& tol = {});

struct ThetaConvexity {
    std::optional<Verdict> verdict;    // strictly_H_convex when some θ_k > c
    bool hypersurface = false;
    bool omega_positive_definite = false;
    std::map<std::size_t, double> margins;  // θ_k - c
    bool converse_holds = true;  // hypersurface and Ω > 0 imply every margin is positive
};

ThetaConvexity hconvexity_from_theta(const PointGeometry& pg, double c, const ThetaConfig& config = {},
                                     double tol = 1e-6);

struct CurvatureProfile {
    Eigen::VectorXd point;
    double c = 0.0;
    double sectional_min = 0.0;
    double sectional_max = 0.0;
    std::map<std::size_t, double> theta;
    std::map<std::size_t, double> chen_margins;
    std::map<std::size_t, ChenResult> chen;
};

/// Full profile for k in [k_min, k_max] (clamped to 2..n).
CurvatureProfile curvature_profile(const PointGeometry& pg, double c, std::size_t k_min, std::size_t k_max,
                                   const ThetaConfig& config = {}, const ChenTolerances& tol = {});

}  // namespace hconvex
