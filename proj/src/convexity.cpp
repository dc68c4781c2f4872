#include "hconvex/convexity.hpp"

#include "hconvex/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hconvex {

std::string to_string(SamplingOutcome o) {
    switch (o) {
        case SamplingOutcome::OneSidedStrict:
            return "one_sided_strict";
        case SamplingOutcome::OneSidedWithZeros:
            return "one_sided_with_zeros";
        case SamplingOutcome::TwoSided:
            return "two_sided";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::StrictlyHConvex:
            return "strictly_H_convex";
        case Verdict::HConvexUnconfirmed:
            return "H_convex_unconfirmed";
        case Verdict::NotHConvex:
            return "not_H_convex";
        case Verdict::UndefinedHZero:
            return "undefined_H_zero";
    }
    return "unknown";
}

SamplingOutcome outcome_of(const RadiusEvidence& e) {
    if (e.negative > 0 && e.positive > 0) return SamplingOutcome::TwoSided;
    if (e.zero == 0 && (e.negative > 0) != (e.positive > 0)) return SamplingOutcome::OneSidedStrict;
    return SamplingOutcome::OneSidedWithZeros;
}

namespace {

RadiusEvidence sample_radius(const Immersion& imm, const SupportFunction& F, const Eigen::VectorXd& u, double radius,
                             int samples, std::uint64_t seed, std::size_t index, double tol_f) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;

    const auto n = u.size();
    const double band = tol_f * radius * radius;
    RadiusEvidence e;
    e.radius = radius;
    e.samples = samples;
    e.min_f = std::numeric_limits<double>::infinity();
    e.max_f = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd dir(n);
        for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(rng);
        const double len = dir.norm();
        const double rho = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
        if (len == 0.0) {
            ++e.failures;
            continue;
        }
        const Eigen::VectorXd v = u + (rho / len) * dir;
        double f = 0.0;
        try {
            f = F(imm.map(v));
        } catch (const DomainError&) {
            ++e.failures;
            continue;
        } catch (const GeometryError&) {
            ++e.failures;
            continue;
        }
        if (!std::isfinite(f)) {
            ++e.failures;
            continue;
        }
        e.min_f = std::min(e.min_f, f);
        e.max_f = std::max(e.max_f, f);
        if (f < -band)
            ++e.negative;
        else if (f > band)
            ++e.positive;
        else
            ++e.zero;
    }
    e.valid = samples > 0 && e.failures * 10 <= samples;
    if (e.negative + e.zero + e.positive == 0) e.min_f = e.max_f = 0.0;
    e.outcome = outcome_of(e);
    return e;
}

SamplingOutcome overall_outcome(const std::vector<RadiusEvidence>& radii) {
    for (auto it = radii.rbegin(); it != radii.rend(); ++it)
        if (it->valid) return it->outcome;
    throw GeometryError("no sampling radius produced valid evidence");
}

}  // namespace

SamplingEvidence sample_sides(const Immersion& imm, const Eigen::VectorXd& u, const std::vector<double>& radii,
                              int samples_per_radius, std::uint64_t seed, double tol_f) {
    if (radii.empty()) throw UsageError("at least one sampling radius is required");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw UsageError("sampling radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw UsageError("sampling radii must be strictly descending");
    }
    if (samples_per_radius <= 0) throw UsageError("samples per radius must be positive");

    const PointGeometry pg = point_geometry(imm, u);
    if (!(pg.mean_curvature_norm() > 0.0)) throw GeometryError("mean curvature vanishes; the support function is trivial");
    const SupportFunction F = SupportFunction::at(imm, pg);

    SamplingEvidence ev;
    for (std::size_t i = 0; i < radii.size(); ++i)
        ev.radii.push_back(sample_radius(imm, F, u, radii[i], samples_per_radius, seed, i, tol_f));
    ev.outcome = overall_outcome(ev.radii);
    return ev;
}

double support_second_derivative(const Immersion& imm, const Eigen::VectorXd& u, const Eigen::VectorXd& chart_vector,
                                 double step, double tol_h) {
    if (!(step > 0.0) || !std::isfinite(step) || step < 1e-12) throw UsageError("finite-difference step underflow");
    const PointGeometry pg = point_geometry(imm, u);
    if (!(pg.mean_curvature_norm() > tol_h)) throw GeometryError("mean curvature vanishes at the point");
    const SupportFunction F = SupportFunction::at(imm, pg);
    const double fp = F(imm.map(Eigen::VectorXd(u + step * chart_vector)));
    const double fm = F(imm.map(Eigen::VectorXd(u - step * chart_vector)));
    return (fp + fm) / (step * step);  // F(x) = 0
}

ConvexityVerdict classify(const Immersion& imm, const Eigen::VectorXd& u, const ConvexityConfig& config) {
    const PointGeometry pg = point_geometry(imm, u);
    ConvexityVerdict v;
    v.spectrum = eigen_omega(pg, config.tol_eig);
    v.mean_curvature_norm = pg.mean_curvature_norm();
    const double lambda_min = v.spectrum.eigenvalues.minCoeff();
    v.necessary_pass = lambda_min >= -v.spectrum.tolerance;
    v.sufficient_pass = lambda_min > v.spectrum.tolerance;

    if (v.mean_curvature_norm <= config.tol_h) {
        v.verdict = Verdict::UndefinedHZero;
        return v;
    }

    std::vector<double> radii = config.radii;
    SamplingEvidence ev = sample_sides(imm, u, radii, config.samples_per_radius, config.seed, config.tol_f);
    if (v.sufficient_pass && config.refine_factor > 0.0 && config.refine_factor < 1.0) {
        const SupportFunction F = SupportFunction::at(imm, pg);
        while (ev.outcome != SamplingOutcome::OneSidedStrict) {
            const double next = radii.back() * config.refine_factor;
            if (next < config.refine_floor) break;
            radii.push_back(next);
            ev.radii.push_back(sample_radius(imm, F, u, next, config.samples_per_radius, config.seed,
                                             radii.size() - 1, config.tol_f));
            ev.outcome = overall_outcome(ev.radii);
        }
    }
    v.radii = radii;
    v.evidence = ev.radii;
    v.sampling_outcome = ev.outcome;

    const bool two_sided = ev.outcome == SamplingOutcome::TwoSided;
    if (v.sufficient_pass)
        v.verdict = Verdict::StrictlyHConvex;
    else if (!v.necessary_pass || two_sided)
        v.verdict = Verdict::NotHConvex;
    else
        v.verdict = Verdict::HConvexUnconfirmed;

    if (v.sufficient_pass) {
        v.consistent = ev.outcome == SamplingOutcome::OneSidedStrict && ev.radii.back().positive > 0;
    } else if (!two_sided) {
        v.consistent = v.necessary_pass;
    }
    return v;
}

ConvexityVerdict curve_convexity(const Immersion& imm, double t, const ConvexityConfig& config) {
    const CurveGeometry cg = curve_geometry(imm, t);
    ConvexityVerdict v;
    v.spectrum = eigen_omega(cg.geometry, config.tol_eig);
    v.mean_curvature_norm = cg.geometry.mean_curvature_norm();
    v.necessary_pass = v.spectrum.eigenvalues.minCoeff() >= -v.spectrum.tolerance;
    v.sufficient_pass = v.spectrum.eigenvalues.minCoeff() > v.spectrum.tolerance;
    v.verdict = v.mean_curvature_norm > config.tol_h ? Verdict::StrictlyHConvex : Verdict::UndefinedHZero;
    return v;
}

}  // namespace hconvex
