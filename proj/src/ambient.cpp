#include "hconvex/ambient.hpp"

#include "hconvex/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace hconvex {

namespace {

constexpr double kModelTolerance = 1e-9;
constexpr double kDegeneratePlane = 1e-12;

// Fixed-capacity storage keeps the geodesic integrator off the heap.
constexpr int kMaxGeneralDim = 8;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxGeneralDim, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxGeneralDim, kMaxGeneralDim>;

// Geodesic acceleration -Gamma(v, v). With L_l = v^i v^j (d_i g_jl - d_l g_ij / 2)
// it solves g a = -L, so the full Christoffel array is never formed.
SmallVec geodesic_acceleration(const std::vector<std::vector<Expression>>& metric, const SmallVec& p,
                               const SmallVec& v) {
    const auto m = static_cast<std::size_t>(p.size());
    const std::span<const double> pt(p.data(), m);
    SmallMat g(p.size(), p.size());
    // dg[(l * m + i) * m + j] = d g_ij / d x_l
    std::array<double, kMaxGeneralDim * kMaxGeneralDim * kMaxGeneralDim> dg;
    std::array<double, kMaxGeneralDim> grad{};
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double val = metric[i][j].eval_gradient(pt, std::span<double>(grad.data(), m));
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = val;
            g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = val;
            for (std::size_t l = 0; l < m; ++l) dg[(l * m + i) * m + j] = dg[(l * m + j) * m + i] = grad[l];
        }
    SmallVec lowered(p.size());
    for (std::size_t l = 0; l < m; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                s += v[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(j)] *
                     (dg[(i * m + j) * m + l] - 0.5 * dg[(l * m + i) * m + j]);
        lowered[static_cast<Eigen::Index>(l)] = s;
    }
    const Eigen::LDLT<SmallMat> ldlt(g);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw GeometryError("singular metric matrix");
    return -ldlt.solve(lowered);
}

// sin(t)/t and sinh(t)/t, accurate near zero.
double sinc(double t) { return std::fabs(t) < 1e-6 ? 1.0 - t * t / 6.0 : std::sin(t) / t; }
double sinhc(double t) { return std::fabs(t) < 1e-6 ? 1.0 + t * t / 6.0 : std::sinh(t) / t; }

}  // namespace

std::string to_string(AmbientKind kind) {
    switch (kind) {
        case AmbientKind::Euclidean:
            return "euclidean";
        case AmbientKind::Sphere:
            return "sphere";
        case AmbientKind::Hyperbolic:
            return "hyperbolic";
        case AmbientKind::GeneralMetric:
            return "general";
    }
    return "unknown";
}

Eigen::VectorXd Christoffel::contract(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t k = 0; k < m_; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                s += (*this)(k, i, j) * a[static_cast<Eigen::Index>(i)] * b[static_cast<Eigen::Index>(j)];
        r[static_cast<Eigen::Index>(k)] = s;
    }
    return r;
}

AmbientSpace AmbientSpace::euclidean(std::size_t m) {
    if (m == 0) throw UsageError("ambient dimension must be positive");
    return AmbientSpace(AmbientKind::Euclidean, m, 0.0);
}

AmbientSpace AmbientSpace::sphere(std::size_t m, double c) {
    if (m == 0) throw UsageError("ambient dimension must be positive");
    if (!(c > 0.0)) throw UsageError("sphere curvature must be positive");
    return AmbientSpace(AmbientKind::Sphere, m, c);
}

AmbientSpace AmbientSpace::hyperbolic(std::size_t m, double c) {
    if (m == 0) throw UsageError("ambient dimension must be positive");
    if (!(c < 0.0)) throw UsageError("hyperbolic curvature must be negative");
    return AmbientSpace(AmbientKind::Hyperbolic, m, c);
}

AmbientSpace AmbientSpace::general(std::vector<std::vector<Expression>> metric, GeodesicConfig config) {
    const std::size_t m = metric.size();
    if (m == 0) throw UsageError("metric matrix is empty");
    if (m > static_cast<std::size_t>(kMaxGeneralDim))
        throw UsageError("general metrics support at most " + std::to_string(kMaxGeneralDim) + " dimensions");
    for (const auto& row : metric) {
        if (row.size() != m) throw UsageError("metric matrix must be square");
        for (const auto& e : row)
            if (e.arity() != m) throw UsageError("metric expressions must have arity " + std::to_string(m));
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (!(metric[i][j] == metric[j][i]))
                throw UsageError("metric matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
    AmbientSpace s(AmbientKind::GeneralMetric, m, 0.0);
    s.metric_exprs_ = std::move(metric);
    s.config_ = config;
    return s;
}

double AmbientSpace::model_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (kind_ == AmbientKind::Hyperbolic) return a.dot(b) - 2.0 * a[0] * b[0];
    return a.dot(b);
}

void AmbientSpace::check_point(const AmbientPoint& p) const {
    if (static_cast<std::size_t>(p.size()) != coordinate_dimension())
        throw UsageError("point has " + std::to_string(p.size()) + " coordinates, expected " +
                         std::to_string(coordinate_dimension()));
    if (!embedded()) return;
    const double q = c_ * model_dot(p, p);
    const double scale = kind_ == AmbientKind::Hyperbolic ? 1.0 + std::fabs(c_) * p.squaredNorm() : 1.0;
    if (std::fabs(q - 1.0) > kModelTolerance * scale) throw UsageError("point does not lie on the model");
    if (kind_ == AmbientKind::Hyperbolic && p[0] <= 0.0) throw UsageError("point is on the wrong hyperboloid sheet");
}

void AmbientSpace::check_tangent(const AmbientPoint& p, const AmbientVector& v) const {
    if (v.size() != p.size()) throw UsageError("vector and point dimensions differ");
    if (!embedded()) return;
    const double scale = std::sqrt(std::fabs(c_)) * (1.0 + p.norm()) * (1.0 + v.norm());
    if (std::fabs(model_dot(p, v)) > kModelTolerance * scale) throw UsageError("vector is not tangent to the model");
}

Eigen::MatrixXd AmbientSpace::metric_matrix(const AmbientPoint& p) const {
    const auto n = static_cast<Eigen::Index>(coordinate_dimension());
    switch (kind_) {
        case AmbientKind::Euclidean:
        case AmbientKind::Sphere:
            return Eigen::MatrixXd::Identity(n, n);
        case AmbientKind::Hyperbolic: {
            Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
            g(0, 0) = -1.0;
            return g;
        }
        case AmbientKind::GeneralMetric:
            break;
    }
    if (p.size() != n) throw UsageError("point dimension mismatch");
    const std::span<const double> pt(p.data(), static_cast<std::size_t>(p.size()));
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            g(i, j) = g(j, i) = metric_exprs_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(pt);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw GeometryError("metric is not positive definite at the queried point");
    return g;
}

double AmbientSpace::metric(const AmbientPoint& p, const AmbientVector& v, const AmbientVector& w) const {
    if (v.size() != p.size() || w.size() != p.size()) throw UsageError("vector and point dimensions differ");
    if (kind_ == AmbientKind::GeneralMetric) return v.dot(metric_matrix(p) * w);
    return model_dot(v, w);
}

double AmbientSpace::norm(const AmbientPoint& p, const AmbientVector& v) const {
    return std::sqrt(std::max(0.0, metric(p, v, v)));
}

Christoffel AmbientSpace::christoffel(const AmbientPoint& p) const {
    if (kind_ != AmbientKind::GeneralMetric) throw UsageError("christoffel symbols are only computed for general metrics");
    const std::size_t m = m_;
    if (static_cast<std::size_t>(p.size()) != m) throw UsageError("point dimension mismatch");
    const std::span<const double> pt(p.data(), m);

    Eigen::MatrixXd g(m, m);
    // dg[l](i, j) = d g_ij / d x_l
    std::vector<Eigen::MatrixXd> dg(m, Eigen::MatrixXd(m, m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const Jet2 jet = metric_exprs_[i][j].eval_jet2(pt);
            g(i, j) = g(j, i) = jet.value();
            for (std::size_t l = 0; l < m; ++l) dg[l](i, j) = dg[l](j, i) = jet.gradient(l);
        }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::fabs(g.determinant()) < 1e-300)
        throw GeometryError("singular metric matrix");
    const Eigen::MatrixXd ginv = ldlt.solve(Eigen::MatrixXd::Identity(m, m));

    Christoffel gamma(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            Eigen::VectorXd lowered(m);
            for (std::size_t l = 0; l < m; ++l) lowered[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
            const Eigen::VectorXd raised = ginv * lowered;
            for (std::size_t k = 0; k < m; ++k) gamma(k, i, j) = gamma(k, j, i) = raised[k];
        }
    return gamma;
}

AmbientVector AmbientSpace::project_to_tangent(const AmbientPoint& p, const AmbientVector& v) const {
    if (!embedded()) return v;
    return v - (model_dot(v, p) / model_dot(p, p)) * p;
}

double AmbientSpace::injectivity_guard() const {
    switch (kind_) {
        case AmbientKind::Sphere:
            return 0.9 * std::numbers::pi / std::sqrt(c_);
        case AmbientKind::GeneralMetric:
            return config_.guard_radius;
        default:
            return std::numeric_limits<double>::infinity();
    }
}

AmbientPoint AmbientSpace::origin() const {
    AmbientPoint p = AmbientPoint::Zero(static_cast<Eigen::Index>(coordinate_dimension()));
    if (embedded()) p[0] = 1.0 / std::sqrt(std::fabs(c_));
    return p;
}

namespace {

// One classical RK4 step of the first-order system (p, v)' = (v, a(p, v)).
void rk4_step(const std::vector<std::vector<Expression>>& metric, double h, SmallVec& p, SmallVec& vel) {
    const SmallVec k1x = vel;
    const SmallVec k1v = geodesic_acceleration(metric, p, vel);
    const SmallVec k2x = vel + 0.5 * h * k1v;
    const SmallVec k2v = geodesic_acceleration(metric, p + 0.5 * h * k1x, k2x);
    const SmallVec k3x = vel + 0.5 * h * k2v;
    const SmallVec k3v = geodesic_acceleration(metric, p + 0.5 * h * k2x, k3x);
    const SmallVec k4x = vel + h * k3v;
    const SmallVec k4v = geodesic_acceleration(metric, p + h * k3x, k4x);
    p += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    vel += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!p.allFinite() || !vel.allFinite()) throw GeometryError("geodesic integration diverged");
}

}  // namespace

GeodesicPath AmbientSpace::integrate_geodesic(const AmbientPoint& x, const AmbientVector& v) const {
    if (kind_ != AmbientKind::GeneralMetric) throw UsageError("numerical geodesics are only used for general metrics");
    if (x.size() != v.size() || static_cast<std::size_t>(x.size()) != m_)
        throw UsageError("point dimension mismatch");
    const int steps = config_.rk4_steps;
    if (steps <= 0) throw UsageError("rk4 step count must be positive");
    const double h = 1.0 / steps;

    GeodesicPath path;
    path.points.reserve(static_cast<std::size_t>(steps) + 1);
    path.velocities.reserve(static_cast<std::size_t>(steps) + 1);
    SmallVec p = x;
    SmallVec vel = v;
    path.points.push_back(p);
    path.velocities.push_back(vel);
    for (int s = 0; s < steps; ++s) {
        rk4_step(metric_exprs_, h, p, vel);
        path.points.push_back(p);
        path.velocities.push_back(vel);
    }
    return path;
}

Eigen::VectorXd AmbientSpace::geodesic_end(const AmbientPoint& x, const AmbientVector& v) const {
    const int steps = config_.rk4_steps;
    if (steps <= 0) throw UsageError("rk4 step count must be positive");
    const double h = 1.0 / steps;
    SmallVec p = x;
    SmallVec vel = v;
    for (int s = 0; s < steps; ++s) rk4_step(metric_exprs_, h, p, vel);
    return p;
}

AmbientPoint AmbientSpace::exp_map(const AmbientPoint& x, const AmbientVector& v) const {
    check_point(x);
    check_tangent(x, v);
    switch (kind_) {
        case AmbientKind::Euclidean:
            return x + v;
        case AmbientKind::Sphere: {
            const double len = std::sqrt(std::max(0.0, model_dot(v, v)));
            if (len > injectivity_guard()) throw GeometryError("tangent vector exceeds the injectivity guard");
            const double t = std::sqrt(c_) * len;
            return std::cos(t) * x + sinc(t) * v;
        }
        case AmbientKind::Hyperbolic: {
            const double t = std::sqrt(-c_) * std::sqrt(std::max(0.0, model_dot(v, v)));
            return std::cosh(t) * x + sinhc(t) * v;
        }
        case AmbientKind::GeneralMetric:
            break;
    }
    if (norm(x, v) > injectivity_guard()) throw GeometryError("tangent vector exceeds the injectivity guard");
    return geodesic_end(x, v);
}

AmbientVector AmbientSpace::log_map(const AmbientPoint& x, const AmbientPoint& y) const {
    check_point(x);
    check_point(y);
    if (x == y) return AmbientVector::Zero(x.size());
    switch (kind_) {
        case AmbientKind::Euclidean:
            return y - x;
        case AmbientKind::Sphere: {
            const double a = c_ * x.dot(y);
            const Eigen::VectorXd w = y - a * x;
            const double s = std::sqrt(c_) * w.norm();
            const double t = std::atan2(s, a);
            if (t / std::sqrt(c_) > injectivity_guard()) throw GeometryError("point lies outside the injectivity guard");
            const double ratio = s < 1e-8 ? 1.0 + s * s / 6.0 : t / s;
            return project_to_tangent(x, ratio * w);
        }
        case AmbientKind::Hyperbolic: {
            const double a = c_ * model_dot(x, y);
            const Eigen::VectorXd w = y - a * x;
            const double s = std::sqrt(-c_) * std::sqrt(std::max(0.0, model_dot(w, w)));
            const double ratio = s < 1e-8 ? 1.0 - s * s / 6.0 : std::asinh(s) / s;
            return project_to_tangent(x, ratio * w);
        }
        case AmbientKind::GeneralMetric:
            break;
    }

    // Shooting from the coordinate difference. When that fails or lands
    // beyond the guard, continuation through intermediate targets on the
    // coordinate segment warm-starts each solve from the previous one.
    const Eigen::VectorXd delta0 = y - x;
    const double guard = injectivity_guard();
    auto admissible = [&](const std::optional<Eigen::VectorXd>& v) { return v && norm(x, *v) <= guard; };
    if (auto v = shoot(x, y, delta0); admissible(v)) return *v;
    for (const int pieces : {4, 16}) {
        Eigen::VectorXd v = delta0 / pieces;
        bool ok = true;
        for (int i = 1; i <= pieces && ok; ++i) {
            const Eigen::VectorXd target = x + (static_cast<double>(i) / pieces) * delta0;
            const Eigen::VectorXd guess = i == 1 ? v : Eigen::VectorXd(v * (static_cast<double>(i) / (i - 1)));
            const auto sol = shoot(x, target, guess);
            ok = admissible(sol);
            if (ok) v = *sol;
        }
        if (ok) return v;
    }
    throw GeometryError("geodesic shooting did not converge; the target is likely outside the normal neighborhood");
}

std::optional<Eigen::VectorXd> AmbientSpace::shoot(const AmbientPoint& x, const AmbientPoint& y,
                                                   const AmbientVector& v0) const {
    // Broyden updates start from the linearization I - Gamma(v, .) of d exp;
    // a stall triggers a central difference Jacobian and backtracking. The
    // tolerance shrinks with the displacement so short shots keep their
    // second-order part.
    const auto m = static_cast<Eigen::Index>(m_);
    const double tol = config_.shooting_tolerance * std::min(1.0, (y - x).lpNorm<Eigen::Infinity>());
    Eigen::VectorXd v = v0;
    const Christoffel gamma = christoffel(x);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < m; ++i)
                jac(k, j) -= gamma(static_cast<std::size_t>(k), static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * v[i];

    auto fd_jacobian = [&](const Eigen::VectorXd& at) {
        Eigen::MatrixXd J(m, m);
        const double step = 1e-6 * std::max(1.0, at.norm());
        for (Eigen::Index k = 0; k < m; ++k) {
            Eigen::VectorXd vp = at, vm = at;
            vp[k] += step;
            vm[k] -= step;
            J.col(k) = (geodesic_end(x, vp) - geodesic_end(x, vm)) / (2.0 * step);
        }
        return J;
    };

    Eigen::VectorXd r;
    try {
        r = geodesic_end(x, v) - y;
    } catch (const GeometryError&) {
        return std::nullopt;
    }
    double res = r.lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < config_.shooting_max_iterations && (res > tol || iter == 0); ++iter) {
        const Eigen::VectorXd delta = jac.partialPivLu().solve(-r);
        if (!delta.allFinite()) break;
        const Eigen::VectorXd candidate = v + delta;
        Eigen::VectorXd r_new;
        double res_new = std::numeric_limits<double>::infinity();
        try {
            r_new = geodesic_end(x, candidate) - y;
            res_new = r_new.lpNorm<Eigen::Infinity>();
        } catch (const GeometryError&) {
        }
        if (res_new >= res && res <= tol) break;
        if (res_new >= res) {
            Eigen::VectorXd d2;
            try {
                jac = fd_jacobian(v);
                d2 = jac.partialPivLu().solve(-r);
            } catch (const GeometryError&) {
                break;
            }
            if (!d2.allFinite()) break;
            bool improved = false;
            for (double step = 1.0; step >= 1.0 / 64.0 && !improved; step *= 0.5) {
                try {
                    const Eigen::VectorXd c2 = v + step * d2;
                    const Eigen::VectorXd r2 = geodesic_end(x, c2) - y;
                    const double res2 = r2.lpNorm<Eigen::Infinity>();
                    if (res2 < res) {
                        v = c2;
                        r = r2;
                        res = res2;
                        improved = true;
                    }
                } catch (const GeometryError&) {
                }
            }
            if (!improved) break;
            continue;
        }
        jac += ((r_new - r) - jac * delta) * delta.transpose() / delta.squaredNorm();
        v = candidate;
        r = r_new;
        res = res_new;
    }
    if (res <= tol) return v;
    return std::nullopt;
}

double AmbientSpace::sectional_curvature(const AmbientPoint& p, const AmbientVector& v, const AmbientVector& w) const {
    check_point(p);
    check_tangent(p, v);
    check_tangent(p, w);
    const double vv = metric(p, v, v);
    const double ww = metric(p, w, w);
    const double vw = metric(p, v, w);
    const double gram = vv * ww - vw * vw;
    if (!(vv > 0.0) || !(ww > 0.0) || gram / (vv * ww) < kDegeneratePlane)
        throw GeometryError("degenerate plane for sectional curvature");
    if (is_space_form()) return c_;

    const std::size_t m = m_;
    const Christoffel gamma = christoffel(p);
    const double h = config_.christoffel_fd_step;
    std::vector<Christoffel> dgamma;
    dgamma.reserve(m);
    for (std::size_t a = 0; a < m; ++a) {
        Eigen::VectorXd pp = p, pm = p;
        pp[static_cast<Eigen::Index>(a)] += h;
        pm[static_cast<Eigen::Index>(a)] -= h;
        const Christoffel gp = christoffel(pp);
        const Christoffel gm = christoffel(pm);
        Christoffel d(m);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) d(k, i, j) = (gp(k, i, j) - gm(k, i, j)) / (2.0 * h);
        dgamma.push_back(std::move(d));
    }

    // (R(v,w)w)^l = v^i w^j w^k R^l_kij,
    // R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik.
    Eigen::VectorXd rvw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < m; ++l) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < m; ++k) {
                    double r = dgamma[i](l, j, k) - dgamma[j](l, i, k);
                    for (std::size_t q = 0; q < m; ++q) r += gamma(l, i, q) * gamma(q, j, k) - gamma(l, j, q) * gamma(q, i, k);
                    acc += v[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(j)] *
                           w[static_cast<Eigen::Index>(k)] * r;
                }
        rvw[static_cast<Eigen::Index>(l)] = acc;
    }
    return metric(p, rvw, v) / gram;
}

}  // namespace hconvex
