#pragma once

#include "hconvex/ambient.hpp"
#include "hconvex/immersion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hconvex {

/// F(y) = ω_x(exp_x^{-1}(y)), the signed distance-like function whose zero
/// set is the totally geodesic hypersurface at x orthogonal to H_x.
class SupportFunction {
public:
    SupportFunction(AmbientSpace ambient, AmbientPoint base, Eigen::VectorXd omega_covector)
        : ambient_(std::move(ambient)), base_(std::move(base)), omega_(std::move(omega_covector)) {}

    /// Support function of the submanifold at the point described by `pg`.
    static SupportFunction at(const Immersion& imm, const PointGeometry& pg) {
        return SupportFunction(imm.ambient(), pg.ambient_point, pg.omega);
    }

    const AmbientPoint& base() const noexcept { return base_; }
    const Eigen::VectorXd& omega() const noexcept { return omega_; }
    const AmbientSpace& ambient() const noexcept { return ambient_; }

    double operator()(const AmbientPoint& y) const { return omega_.dot(ambient_.log_map(base_, y)); }

private:
    AmbientSpace ambient_;
    AmbientPoint base_;
    Eigen::VectorXd omega_;
};

inline double support_value(const SupportFunction& sf, const AmbientPoint& y) { return sf(y); }

enum class SamplingOutcome { OneSidedStrict, OneSidedWithZeros, TwoSided };
enum class Verdict { StrictlyHConvex, HConvexUnconfirmed, NotHConvex, UndefinedHZero };

std::string to_string(SamplingOutcome o);
std::string to_string(Verdict v);

struct RadiusEvidence {
    double radius = 0.0;
    int samples = 0;
    int negative = 0;
    int zero = 0;
    int positive = 0;
    int failures = 0;
    double min_f = 0.0;
    double max_f = 0.0;
    bool valid = false;  // false when more than 10% of the samples failed
    SamplingOutcome outcome = SamplingOutcome::OneSidedWithZeros;
};

struct SamplingEvidence {
    std::vector<RadiusEvidence> radii;
    SamplingOutcome outcome = SamplingOutcome::OneSidedWithZeros;  // of the smallest valid radius
};

struct ConvexityConfig {
    std::vector<double> radii{0.5, 0.1, 0.02};
    int samples_per_radius = 2000;
    std::uint64_t seed = 0;
    double tol_eig = kDefaultTolEig;
    double tol_f = 1e-9;   // zero band is tol_f * r^2
    double tol_h = 1e-10;
    // When Ω is positive definite but sampling still sees two sides, the
    // ladder keeps shrinking by `refine_factor` down to `refine_floor`.
    double refine_factor = 0.2;
    double refine_floor = 1e-5;
};

/// Classifies the samples of one radius.
SamplingOutcome outcome_of(const RadiusEvidence& e);

/// Samples F over chart balls of the given (descending) radii around u.
SamplingEvidence sample_sides(const Immersion& imm, const Eigen::VectorXd& u, const std::vector<double>& radii,
                              int samples_per_radius, std::uint64_t seed, double tol_f = 1e-9);

/// Second derivative of t -> F(f(u + tX)) at 0 by central differences.
double support_second_derivative(const Immersion& imm, const Eigen::VectorXd& u, const Eigen::VectorXd& chart_vector,
                                 double step = 1e-4, double tol_h = 1e-10);

struct ConvexityVerdict {
    bool necessary_pass = false;   // Ω positive semidefinite
    bool sufficient_pass = false;  // Ω positive definite
    std::optional<SamplingOutcome> sampling_outcome;
    std::vector<RadiusEvidence> evidence;
    std::vector<double> radii;
    Verdict verdict = Verdict::UndefinedHZero;
    OmegaSpectrum spectrum;
    double mean_curvature_norm = 0.0;
    bool consistent = true;  // sampling agrees with the definiteness tests
};

ConvexityVerdict classify(const Immersion& imm, const Eigen::VectorXd& u, const ConvexityConfig& config = {});

/// Curves with nonvanishing mean curvature are strictly H-convex.
ConvexityVerdict curve_convexity(const Immersion& imm, double t, const ConvexityConfig& config = {});

}  // namespace hconvex
