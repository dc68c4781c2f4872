#include "hconvex/immersion.hpp"

#include "hconvex/error.hpp"

#include <cmath>

namespace hconvex {

namespace {

constexpr double kRankTolerance = 1e-10;

// Orthonormalizes `candidate` against the columns of `basis` in the inner
// product G (two Gram-Schmidt passes). Returns false when nothing is left.
bool orthonormalize_against(const Eigen::MatrixXd& G, const Eigen::MatrixXd& basis, Eigen::VectorXd& candidate,
                            double drop_tolerance) {
    const double initial = std::sqrt(std::max(0.0, candidate.dot(G * candidate)));
    if (initial == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index k = 0; k < basis.cols(); ++k) candidate -= basis.col(k).dot(G * candidate) * basis.col(k);
    const double remaining = std::sqrt(std::max(0.0, candidate.dot(G * candidate)));
    if (remaining <= drop_tolerance * initial) return false;
    candidate /= remaining;
    return true;
}

}  // namespace

Immersion::Immersion(std::string label, AmbientSpace ambient, std::vector<Expression> components)
    : label_(std::move(label)), ambient_(std::move(ambient)), components_(std::move(components)) {
    if (components_.empty()) throw UsageError("immersion has no components");
    n_ = components_.front().arity();
    for (const auto& c : components_)
        if (c.arity() != n_) throw UsageError("immersion components disagree on chart arity");
    if (components_.size() != ambient_.coordinate_dimension())
        throw UsageError("immersion has " + std::to_string(components_.size()) + " components, ambient needs " +
                         std::to_string(ambient_.coordinate_dimension()));
    if (n_ == 0 || n_ > ambient_.dimension())
        throw UsageError("chart arity must be between 1 and the ambient dimension");
}

Immersion Immersion::from_strings(std::string label, AmbientSpace ambient, const std::vector<std::string>& components,
                                  std::size_t chart_arity) {
    std::vector<Expression> exprs;
    exprs.reserve(components.size());
    for (const auto& s : components) exprs.push_back(Expression::parse(s, chart_arity));
    return Immersion(std::move(label), std::move(ambient), std::move(exprs));
}

AmbientPoint Immersion::map(std::span<const double> u) const {
    if (u.size() != n_) throw UsageError("chart point has wrong dimension");
    AmbientPoint p(static_cast<Eigen::Index>(components_.size()));
    for (std::size_t a = 0; a < components_.size(); ++a) p[static_cast<Eigen::Index>(a)] = components_[a].eval(u);
    if (!ambient_.embedded()) return p;
    double q = p.squaredNorm();
    if (ambient_.kind() == AmbientKind::Hyperbolic) {
        q -= 2.0 * p[0] * p[0];
        if (!(ambient_.curvature() * q > 0.0) || p[0] <= 0.0)
            throw GeometryError("immersion point cannot be projected onto the hyperboloid");
    } else if (!(q > 0.0)) {
        throw GeometryError("immersion point cannot be projected onto the sphere");
    }
    return p / std::sqrt(ambient_.curvature() * q);
}

std::vector<Jet2> Immersion::jets(std::span<const double> u) const {
    if (u.size() != n_) throw UsageError("chart point has wrong dimension");
    std::vector<Jet2> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.eval_jet2(u));
    if (!ambient_.embedded()) return out;

    Jet2 q = Jet2::constant(0.0, n_);
    for (std::size_t a = 0; a < out.size(); ++a) {
        const Jet2 sq = out[a] * out[a];
        if (a == 0 && ambient_.kind() == AmbientKind::Hyperbolic)
            q -= sq;
        else
            q += sq;
    }
    q *= ambient_.curvature();
    if (!(q.value() > 0.0) || (ambient_.kind() == AmbientKind::Hyperbolic && out[0].value() <= 0.0))
        throw GeometryError("immersion point cannot be projected onto the model");
    const Jet2 inv_scale = Jet2::constant(1.0, n_) / sqrt(q);
    for (auto& j : out) j = j * inv_scale;
    return out;
}

double PointGeometry::mean_curvature_norm() const { return std::sqrt(std::max(0.0, dot(mean_curvature, mean_curvature))); }

PointGeometry point_geometry(const Immersion& imm, std::span<const double> u) {
    const AmbientSpace& N = imm.ambient();
    const std::size_t n = imm.chart_arity();
    const auto D = static_cast<Eigen::Index>(N.coordinate_dimension());
    const auto ni = static_cast<Eigen::Index>(n);

    const std::vector<Jet2> f = imm.jets(u);

    PointGeometry pg;
    pg.chart_point = Eigen::Map<const Eigen::VectorXd>(u.data(), ni);
    pg.ambient_point.resize(D);
    pg.tangent_frame.resize(D, ni);
    for (Eigen::Index a = 0; a < D; ++a) {
        const Jet2& fa = f[static_cast<std::size_t>(a)];
        pg.ambient_point[a] = fa.value();
        for (Eigen::Index i = 0; i < ni; ++i) pg.tangent_frame(a, i) = fa.gradient(static_cast<std::size_t>(i));
    }
    pg.ambient_metric = N.metric_matrix(pg.ambient_point);
    pg.ambient_curvature = N.curvature();
    const Eigen::MatrixXd& G = pg.ambient_metric;
    const Eigen::MatrixXd& T = pg.tangent_frame;

    pg.induced_metric = T.transpose() * G * T;
    pg.induced_metric = 0.5 * (pg.induced_metric + pg.induced_metric.transpose()).eval();
    const Eigen::MatrixXd& g = pg.induced_metric;
    double diag_product = 1.0;
    for (Eigen::Index i = 0; i < ni; ++i) diag_product *= g(i, i);
    if (!(diag_product > 0.0) || !(g.determinant() / diag_product > kRankTolerance))
        throw GeometryError("immersion differential is rank deficient at the chart point");
    const Eigen::LLT<Eigen::MatrixXd> g_llt(g);
    if (g_llt.info() != Eigen::Success) throw GeometryError("induced metric is not positive definite");
    const Eigen::MatrixXd g_inv = g_llt.solve(Eigen::MatrixXd::Identity(ni, ni));

    // Covariant second derivatives of f.
    Christoffel gamma(0);
    if (N.kind() == AmbientKind::GeneralMetric) gamma = N.christoffel(pg.ambient_point);
    auto normal_part = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        const Eigen::VectorXd tv = N.project_to_tangent(pg.ambient_point, v);
        return tv - T * (g_inv * (T.transpose() * (G * tv)));
    };

    pg.second_fundamental.assign(n * n, AmbientVector::Zero(D));
    for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = i; j < ni; ++j) {
            Eigen::VectorXd d2(D);
            for (Eigen::Index a = 0; a < D; ++a)
                d2[a] = f[static_cast<std::size_t>(a)].hessian(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (N.kind() == AmbientKind::GeneralMetric) d2 += gamma.contract(T.col(i), T.col(j));
            const Eigen::VectorXd hij = normal_part(d2);
            pg.second_fundamental[static_cast<std::size_t>(i * ni + j)] = hij;
            pg.second_fundamental[static_cast<std::size_t>(j * ni + i)] = hij;
        }

    pg.mean_curvature = AmbientVector::Zero(D);
    for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = 0; j < ni; ++j)
            pg.mean_curvature += g_inv(i, j) * pg.h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    pg.mean_curvature /= static_cast<double>(n);
    pg.omega = G * pg.mean_curvature;

    pg.omega_matrix.resize(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
        for (Eigen::Index j = i; j < ni; ++j)
            pg.omega_matrix(i, j) = pg.omega_matrix(j, i) =
                pg.omega.dot(pg.h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    pg.weingarten = g_inv * pg.omega_matrix;

    // Orthonormal completion of the tangent frame inside T_xN.
    const std::size_t codim = N.dimension() - n;
    Eigen::MatrixXd basis(D, 0);
    for (Eigen::Index i = 0; i < ni; ++i) {
        Eigen::VectorXd t = T.col(i);
        if (!orthonormalize_against(G, basis, t, 1e-8)) throw GeometryError("tangent frame is degenerate");
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = t;
    }
    pg.normal_frame.resize(D, static_cast<Eigen::Index>(codim));
    Eigen::Index found = 0;
    for (Eigen::Index a = 0; a < D && found < static_cast<Eigen::Index>(codim); ++a) {
        Eigen::VectorXd e = N.project_to_tangent(pg.ambient_point, Eigen::VectorXd::Unit(D, a));
        if (!orthonormalize_against(G, basis, e, 1e-6)) continue;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = e;
        pg.normal_frame.col(found++) = e;
    }
    if (found != static_cast<Eigen::Index>(codim)) throw GeometryError("failed to complete the normal frame");
    return pg;
}

CurveGeometry curve_geometry(const Immersion& imm, double t) {
    if (imm.chart_arity() != 1) throw UsageError("curve_geometry needs a one-parameter immersion");
    const std::vector<Jet2> f = imm.jets(std::span<const double>(&t, 1));
    Eigen::VectorXd velocity(static_cast<Eigen::Index>(f.size()));
    for (std::size_t a = 0; a < f.size(); ++a) velocity[static_cast<Eigen::Index>(a)] = f[a].gradient(0);
    const AmbientPoint x = imm.map(std::span<const double>(&t, 1));
    if (imm.ambient().norm(x, velocity) == 0.0) throw GeometryError("curve has zero velocity");

    CurveGeometry cg;
    cg.geometry = point_geometry(imm, std::span<const double>(&t, 1));
    cg.speed_squared = cg.geometry.induced_metric(0, 0);
    cg.omega_velocity = cg.geometry.omega_matrix(0, 0);
    return cg;
}

std::string to_string(Definiteness d) {
    switch (d) {
        case Definiteness::PositiveDefinite:
            return "positive-definite";
        case Definiteness::PositiveSemidefinite:
            return "positive-semidefinite";
        case Definiteness::Indefinite:
            return "indefinite";
        case Definiteness::NegativeSemidefinite:
            return "negative-semidefinite";
        case Definiteness::NegativeDefinite:
            return "negative-definite";
        case Definiteness::Zero:
            return "zero";
    }
    return "unknown";
}

Definiteness classify_spectrum(const Eigen::VectorXd& eigenvalues, double tolerance) {
    int positive = 0, negative = 0, zero = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > tolerance)
            ++positive;
        else if (eigenvalues[i] < -tolerance)
            ++negative;
        else
            ++zero;
    }
    if (positive > 0 && negative > 0) return Definiteness::Indefinite;
    if (positive == 0 && negative == 0) return Definiteness::Zero;
    if (negative == 0) return zero == 0 ? Definiteness::PositiveDefinite : Definiteness::PositiveSemidefinite;
    return zero == 0 ? Definiteness::NegativeDefinite : Definiteness::NegativeSemidefinite;
}

OmegaSpectrum eigen_omega(const PointGeometry& pg, double tol_eig) {
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(pg.omega_matrix, pg.induced_metric);
    OmegaSpectrum s;
    s.eigenvalues = solver.eigenvalues();
    const double inf_norm = pg.omega_matrix.cwiseAbs().rowwise().sum().maxCoeff();
    s.tolerance = tol_eig * std::max(1.0, inf_norm);
    s.classification = classify_spectrum(s.eigenvalues, s.tolerance);
    return s;
}

}  // namespace hconvex
