#pragma once

#include "hconvex/ambient.hpp"
#include "hconvex/expr.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace hconvex {

/**
 * Expression-defined immersion f: U ⊂ R^n -> N.
 *
 * There is one component expression per ambient coordinate. For embedded
 * space forms the components are R^{m+1} coordinates and the image is
 * radially projected onto the model, so a component list only has to
 * point in the right direction.
 */
class Immersion {
public:
    Immersion(std::string label, AmbientSpace ambient, std::vector<Expression> components);

    /// Parses each component with arity `chart_arity`.
    static Immersion from_strings(std::string label, AmbientSpace ambient, const std::vector<std::string>& components,
                                  std::size_t chart_arity);

    const std::string& label() const noexcept { return label_; }
    std::size_t chart_arity() const noexcept { return n_; }
    const AmbientSpace& ambient() const noexcept { return ambient_; }
    const std::vector<Expression>& components() const noexcept { return components_; }

    /// f(u), on the model for embedded space forms.
    AmbientPoint map(std::span<const double> u) const;
    AmbientPoint map(const Eigen::VectorXd& u) const { return map(std::span<const double>(u.data(), u.size())); }

    /// Second-order jets of the (projected) coordinate functions at u.
    std::vector<Jet2> jets(std::span<const double> u) const;

private:
    std::string label_;
    AmbientSpace ambient_;
    std::vector<Expression> components_;
    std::size_t n_;
};

/// All extrinsic data at one chart point. Ambient vectors use the ambient
/// coordinate arrays (length m, or m + 1 for embedded space forms).
struct PointGeometry {
    Eigen::VectorXd chart_point;
    AmbientPoint ambient_point;
    Eigen::MatrixXd ambient_metric;   // D x D Gram matrix at ambient_point
    Eigen::MatrixXd tangent_frame;    // D x n, column i = df(e_i)
    Eigen::MatrixXd normal_frame;     // D x (m - n), orthonormal
    Eigen::MatrixXd induced_metric;   // g, n x n
    std::vector<AmbientVector> second_fundamental;  // h(e_i, e_j) at index i * n + j
    AmbientVector mean_curvature;     // H
    Eigen::VectorXd omega;            // covector of ω = g(H, .)
    Eigen::MatrixXd omega_matrix;     // Ω_ij = g(h_ij, H)
    Eigen::MatrixXd weingarten;       // A_H = g^{-1} Ω
    double ambient_curvature = 0.0;   // c for space forms

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(induced_metric.rows()); }
    const AmbientVector& h(std::size_t i, std::size_t j) const { return second_fundamental[i * dimension() + j]; }

    /// Ambient inner product at the base point.
    double dot(const AmbientVector& a, const AmbientVector& b) const { return a.dot(ambient_metric * b); }
    double mean_curvature_norm() const;

    /// df(X) for a chart vector X.
    AmbientVector push_forward(const Eigen::VectorXd& chart_vector) const { return tangent_frame * chart_vector; }
};

PointGeometry point_geometry(const Immersion& imm, std::span<const double> u);
inline PointGeometry point_geometry(const Immersion& imm, const Eigen::VectorXd& u) {
    return point_geometry(imm, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
}

struct CurveGeometry {
    PointGeometry geometry;
    double speed_squared = 0.0;    // |ċ|^2
    double omega_velocity = 0.0;   // Ω(ċ, ċ), equal to |ċ|^2 |H|^2
};

CurveGeometry curve_geometry(const Immersion& imm, double t);

enum class Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeSemidefinite,
    NegativeDefinite,
    Zero,
};

std::string to_string(Definiteness d);

struct OmegaSpectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Definiteness classification = Definiteness::Zero;
    double tolerance = 0.0;       // |λ| at or below this counts as zero
};

/// Default relative threshold for treating an eigenvalue as zero.
inline constexpr double kDefaultTolEig = 1e-8;

/// Spectrum of A_H from the pencil Ω v = λ g v.
OmegaSpectrum eigen_omega(const PointGeometry& pg, double tol_eig = kDefaultTolEig);

/// Sign pattern of `eigenvalues` with threshold `tolerance`.
Definiteness classify_spectrum(const Eigen::VectorXd& eigenvalues, double tolerance);

}  // namespace hconvex
