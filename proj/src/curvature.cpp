#include "hconvex/curvature.hpp"

#include "hconvex/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace hconvex {

namespace {

constexpr double kDegeneratePlane = 1e-12;

// g-orthonormal basis of span(X, Y); both Gauss forms are evaluated on it so
// nearly parallel inputs do not lose digits to cancellation.
std::pair<Eigen::VectorXd, Eigen::VectorXd> orthonormal_plane(const PointGeometry& pg, const Eigen::VectorXd& X,
                                                              const Eigen::VectorXd& Y) {
    const Eigen::MatrixXd& g = pg.induced_metric;
    const double xx = X.dot(g * X), yy = Y.dot(g * Y), xy = X.dot(g * Y);
    if (!(xx > 0.0) || !(yy > 0.0) || (xx * yy - xy * xy) / (xx * yy) < kDegeneratePlane)
        throw GeometryError("degenerate plane for sectional curvature");
    const Eigen::VectorXd e1 = X / std::sqrt(xx);
    Eigen::VectorXd e2 = Y;
    for (int pass = 0; pass < 2; ++pass) e2 -= e1.dot(g * e2) * e1;
    e2 /= std::sqrt(e2.dot(g * e2));
    return {e1, e2};
}

AmbientVector h_of(const PointGeometry& pg, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
    const std::size_t n = pg.dimension();
    AmbientVector out = AmbientVector::Zero(pg.ambient_point.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out += X[static_cast<Eigen::Index>(i)] * Y[static_cast<Eigen::Index>(j)] * pg.h(i, j);
    return out;
}

Eigen::MatrixXd random_orthogonal(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a(ni, ni);
    for (Eigen::Index j = 0; j < ni; ++j)
        for (Eigen::Index i = 0; i < ni; ++i) a(i, j) = normal(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(ni, ni);
}

void rotate(Eigen::MatrixXd& q, Eigen::Index p, Eigen::Index r, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const Eigen::VectorXd a = q.col(p), b = q.col(r);
    q.col(p) = c * a + s * b;
    q.col(r) = -s * a + c * b;
}

// Minimizes `objective` over n x n orthogonal matrices by multi-start cyclic
// Givens rotations. Only rotations that can change the objective are used:
// column 0 against every other column, and columns 1..k-1 against the
// complement k..n-1.
template <class Objective>
std::pair<double, Eigen::MatrixXd> minimize_frames(std::size_t n, std::size_t k, const Objective& objective,
                                                   const ThetaConfig& config) {
    const auto ni = static_cast<Eigen::Index>(n);
    const auto ki = static_cast<Eigen::Index>(k);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index j = 1; j < ni; ++j) pairs.emplace_back(0, j);
    for (Eigen::Index j = 1; j < ki; ++j)
        for (Eigen::Index l = ki; l < ni; ++l) pairs.emplace_back(j, l);

    std::mt19937_64 rng(config.seed);
    const int samples = std::max(4, config.line_samples);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;

    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_frame = Eigen::MatrixXd::Identity(ni, ni);
    const int starts = std::max(1, config.starts);
    for (int start = 0; start < starts; ++start) {
        Eigen::MatrixXd q = start == 0 ? Eigen::MatrixXd::Identity(ni, ni) : random_orthogonal(n, rng);
        double f = objective(q);
        for (int it = 0; it < config.iterations; ++it) {
            const double before = f;
            for (const auto& [p, r] : pairs) {
                auto along = [&](double angle) {
                    Eigen::MatrixXd trial = q;
                    rotate(trial, p, r, angle);
                    return objective(trial);
                };
                // The objective has period pi in the angle.
                double best_angle = 0.0, best_value = f;
                for (int s = 0; s < samples; ++s) {
                    const double angle = -std::numbers::pi / 2 + std::numbers::pi * s / samples;
                    const double value = along(angle);
                    if (value < best_value) {
                        best_value = value;
                        best_angle = angle;
                    }
                }
                double lo = best_angle - std::numbers::pi / samples, hi = best_angle + std::numbers::pi / samples;
                double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
                double f1 = along(x1), f2 = along(x2);
                while (hi - lo > 1e-12) {
                    if (f1 < f2) {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - phi * (hi - lo);
                        f1 = along(x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + phi * (hi - lo);
                        f2 = along(x2);
                    }
                }
                if (f1 < best_value) {
                    best_value = f1;
                    best_angle = x1;
                }
                if (f2 < best_value) {
                    best_value = f2;
                    best_angle = x2;
                }
                if (best_value < f) {
                    rotate(q, p, r, best_angle);
                    f = objective(q);
                }
            }
            if (before - f < config.tolerance) break;
        }
        if (f < best) {
            best = f;
            best_frame = q;
        }
    }
    return {best, best_frame};
}

ChenResult chen_from_theta(const PointGeometry& pg, double c, std::size_t k, double theta, const ChenTolerances& tol) {
    const double n = static_cast<double>(pg.dimension());
    ChenResult r;
    r.k = k;
    r.theta = theta;
    r.lambda_min = eigen_omega(pg).eigenvalues.minCoeff();
    r.margin = r.lambda_min - (n - 1.0) / n * (theta - c);
    const double scale = std::max({1.0, std::fabs(r.lambda_min), std::fabs(theta)});
    r.strict = r.margin > tol.strict_floor * scale;
    r.consistent = r.margin >= -tol.tol_chen && (std::fabs(theta - c) <= tol.theta_gap || r.strict);
    return r;
}

void check_k(const PointGeometry& pg, std::size_t k) {
    if (k < 2 || k > pg.dimension())
        throw UsageError("k must lie in 2.." + std::to_string(pg.dimension()) + ", got " + std::to_string(k));
}

}  // namespace

GaussData::GaussData(const PointGeometry& pg, double c) : n_(pg.dimension()), c_(c) {
    const auto ni = static_cast<Eigen::Index>(n_);
    const Eigen::LLT<Eigen::MatrixXd> llt(pg.induced_metric);
    if (llt.info() != Eigen::Success) throw GeometryError("induced metric is not positive definite");
    // E = L^{-T}, so that E^T g E = I.
    basis_ = llt.matrixU().solve(Eigen::MatrixXd::Identity(ni, ni));
    for (Eigen::Index a = 0; a < pg.normal_frame.cols(); ++a) {
        Eigen::MatrixXd chart(ni, ni);
        const Eigen::VectorXd nu = pg.ambient_metric * pg.normal_frame.col(a);
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = 0; j < ni; ++j)
                chart(i, j) = nu.dot(pg.h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        components_.push_back(basis_.transpose() * chart * basis_);
    }
}

double GaussData::sectional_orthonormal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double k = c_;
    for (const auto& B : components_) {
        const Eigen::VectorXd Bb = B * b;
        const double ab = a.dot(Bb);
        k += a.dot(B * a) * b.dot(Bb) - ab * ab;
    }
    return k;
}

double GaussData::ric_sum(const Eigen::MatrixXd& frame, std::size_t k) const {
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += sectional_orthonormal(frame.col(0), frame.col(static_cast<Eigen::Index>(j)));
    return s;
}

double sectional_gauss(const PointGeometry& pg, double c, const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
    const auto [e1, e2] = orthonormal_plane(pg, X, Y);
    const AmbientVector h11 = h_of(pg, e1, e1), h22 = h_of(pg, e2, e2), h12 = h_of(pg, e1, e2);
    return c + pg.dot(h11, h22) - pg.dot(h12, h12);
}

double sectional_gauss_hypersurface(const PointGeometry& pg, double c, const Eigen::VectorXd& X,
                                    const Eigen::VectorXd& Y) {
    if (pg.normal_frame.cols() != 1) throw UsageError("hypersurface form needs codimension one");
    const double h2 = pg.dot(pg.mean_curvature, pg.mean_curvature);
    if (!(h2 > 0.0)) throw GeometryError("mean curvature vanishes");
    const auto [e1, e2] = orthonormal_plane(pg, X, Y);
    const Eigen::MatrixXd& W = pg.omega_matrix;
    const double o11 = e1.dot(W * e1), o22 = e2.dot(W * e2), o12 = e1.dot(W * e2);
    return c + (o11 * o22 - o12 * o12) / h2;
}

double ric_L(const PointGeometry& pg, double c, const Eigen::MatrixXd& L, const Eigen::VectorXd& X) {
    const Eigen::MatrixXd& g = pg.induced_metric;
    const auto k = L.cols();
    if (k < 2) throw UsageError("L must span at least two dimensions");
    const Eigen::MatrixXd gram = L.transpose() * g * L;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (!(es.eigenvalues().minCoeff() > kDegeneratePlane * es.eigenvalues().maxCoeff()))
        throw GeometryError("L is rank deficient");
    if (std::fabs(std::sqrt(X.dot(g * X)) - 1.0) > 1e-8) throw UsageError("X must be a unit vector");
    const Eigen::VectorXd coeff = gram.ldlt().solve(L.transpose() * (g * X));
    const Eigen::VectorXd residual = X - L * coeff;
    if (std::sqrt(std::max(0.0, residual.dot(g * residual))) > 1e-8) throw UsageError("X does not lie in span(L)");

    std::vector<Eigen::VectorXd> frame{X};
    for (Eigen::Index j = 0; j < k && static_cast<Eigen::Index>(frame.size()) < k; ++j) {
        Eigen::VectorXd v = L.col(j);
        const double initial = std::sqrt(v.dot(g * v));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : frame) v -= e.dot(g * v) * e;
        const double len = std::sqrt(std::max(0.0, v.dot(g * v)));
        if (len <= 1e-8 * initial) continue;
        frame.push_back(v / len);
    }
    if (static_cast<Eigen::Index>(frame.size()) != k) throw GeometryError("could not complete an orthonormal frame in L");

    double sum = 0.0;
    for (std::size_t j = 1; j < frame.size(); ++j) sum += sectional_gauss(pg, c, X, frame[j]);
    return sum;
}

ThetaResult theta_k(const PointGeometry& pg, double c, std::size_t k, const ThetaConfig& config) {
    check_k(pg, k);
    const GaussData data(pg, c);
    const auto [value, q] =
        minimize_frames(pg.dimension(), k, [&](const Eigen::MatrixXd& f) { return data.ric_sum(f, k); }, config);
    ThetaResult r;
    r.value = value / static_cast<double>(k - 1);
    r.frame = data.orthonormal_basis() * q.leftCols(static_cast<Eigen::Index>(k));
    return r;
}

SectionalRange sectional_range(const PointGeometry& pg, double c, const ThetaConfig& config) {
    check_k(pg, 2);
    const GaussData data(pg, c);
    const std::size_t n = pg.dimension();
    SectionalRange r;
    r.min = minimize_frames(n, 2, [&](const Eigen::MatrixXd& f) { return data.ric_sum(f, 2); }, config).first;
    r.max = -minimize_frames(n, 2, [&](const Eigen::MatrixXd& f) { return -data.ric_sum(f, 2); }, config).first;

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int s = 0; s < 256; ++s) {
        const Eigen::MatrixXd q = random_orthogonal(n, rng);
        const double k = data.sectional_orthonormal(q.col(0), q.col(1));
        r.min = std::min(r.min, k);
        r.max = std::max(r.max, k);
    }
    return r;
}

ChenResult chen_check(const PointGeometry& pg, double c, std::size_t k, const ThetaConfig& config,
                      const ChenTolerances& tol) {
    return chen_from_theta(pg, c, k, theta_k(pg, c, k, config).value, tol);
}

ThetaConvexity hconvexity_from_theta(const PointGeometry& pg, double c, const ThetaConfig& config, double tol) {
    ThetaConvexity out;
    out.hypersurface = pg.normal_frame.cols() == 1;
    out.omega_positive_definite = eigen_omega(pg).classification == Definiteness::PositiveDefinite;
    bool any_above = false;
    for (std::size_t k = 2; k <= pg.dimension(); ++k) {
        const double margin = theta_k(pg, c, k, config).value - c;
        out.margins[k] = margin;
        if (margin > tol) any_above = true;
    }
    if (any_above) out.verdict = Verdict::StrictlyHConvex;
    if (out.hypersurface && out.omega_positive_definite)
        for (const auto& [k, m] : out.margins)
            if (!(m > 0.0)) out.converse_holds = false;
    return out;
}

CurvatureProfile curvature_profile(const PointGeometry& pg, double c, std::size_t k_min, std::size_t k_max,
                                   const ThetaConfig& config, const ChenTolerances& tol) {
    if (pg.dimension() < 2) throw UsageError("curvature profile needs a submanifold of dimension at least 2");
    CurvatureProfile p;
    p.point = pg.chart_point;
    p.c = c;
    const SectionalRange range = sectional_range(pg, c, config);
    p.sectional_min = range.min;
    p.sectional_max = range.max;
    k_min = std::max<std::size_t>(k_min, 2);
    k_max = std::min(k_max, pg.dimension());
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const double theta = theta_k(pg, c, k, config).value;
        p.theta[k] = theta;
        const ChenResult chen = chen_from_theta(pg, c, k, theta, tol);
        p.chen_margins[k] = chen.margin;
        p.chen[k] = chen;
    }
    return p;
}

}  // namespace hconvex
