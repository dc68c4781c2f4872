#include "hconvex/ambient.hpp"
#include "hconvex/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hconvex;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) r[i++] = x;
    return r;
}

AmbientSpace diagonal_metric(const std::string& g11, const std::string& g22) {
    return AmbientSpace::general({{parse(g11, 2), parse("0", 2)}, {parse("0", 2), parse(g22, 2)}});
}

AmbientSpace half_plane() { return diagonal_metric("1 / x2^2", "1 / x2^2"); }

// Conformal metric of the unit sphere through stereographic projection.
AmbientSpace stereographic_sphere() {
    const std::string f = "4 / (1 + x1^2 + x2^2)^2";
    return diagonal_metric(f, f);
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale) {
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
    return scale * v;
}

// Random point on an embedded model and a random tangent vector of length `len`.
std::pair<Eigen::VectorXd, Eigen::VectorXd> random_embedded(const AmbientSpace& s, std::mt19937_64& rng, double len) {
    const auto d = static_cast<Eigen::Index>(s.coordinate_dimension());
    const Eigen::VectorXd o = s.origin();
    Eigen::VectorXd w = s.project_to_tangent(o, random_vector(rng, d, 1.0));
    const Eigen::VectorXd x = s.exp_map(o, 0.7 * w / s.norm(o, w));
    Eigen::VectorXd v = s.project_to_tangent(x, random_vector(rng, d, 1.0));
    return {x, len * v / s.norm(x, v)};
}

}  // namespace

TEST(AmbientMetric, Examples) {
    const AmbientSpace e3 = AmbientSpace::euclidean(3);
    const Eigen::VectorXd p = vec({0.3, -1.0, 2.0});
    EXPECT_EQ(e3.metric(p, vec({1, 0, 0}), vec({0, 1, 0})), 0.0);
    EXPECT_EQ(e3.metric(p, vec({3, 4, 0}), vec({3, 4, 0})), 25.0);

    const AmbientSpace g = diagonal_metric("exp(2*x2)", "1");
    EXPECT_DOUBLE_EQ(g.metric(vec({0.5, 0.0}), vec({1, 0}), vec({1, 0})), 1.0);
    EXPECT_NEAR(g.metric(vec({0.5, 1.0}), vec({1, 0}), vec({1, 0})), std::exp(2.0), 1e-12);
}

TEST(AmbientMetric, Errors) {
    EXPECT_THROW(diagonal_metric("x1", "1").metric_matrix(vec({-1.0, 0.0})), GeometryError);
    EXPECT_THROW(AmbientSpace::general({{parse("1", 2), parse("x1", 2)}, {parse("x2", 2), parse("1", 2)}}),
                 UsageError);
    EXPECT_THROW(AmbientSpace::general({{parse("1", 1)}, {parse("1", 1)}}), UsageError);
    EXPECT_THROW(AmbientSpace::sphere(2, -1.0), UsageError);
    EXPECT_THROW(AmbientSpace::hyperbolic(2, 1.0), UsageError);
    EXPECT_THROW(AmbientSpace::euclidean(0), UsageError);
}

TEST(AmbientChristoffel, FlatIsZero) {
    const AmbientSpace flat = diagonal_metric("1", "1");
    const Christoffel g = flat.christoffel(vec({0.4, -2.0}));
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(g(k, i, j), 0.0);
}

TEST(AmbientChristoffel, PolarLike) {
    const Christoffel g = diagonal_metric("1", "x1^2").christoffel(vec({2.0, 0.3}));
    EXPECT_NEAR(g(0, 1, 1), -2.0, 1e-14);
    EXPECT_NEAR(g(1, 0, 1), 0.5, 1e-14);
    EXPECT_NEAR(g(1, 1, 0), 0.5, 1e-14);
    EXPECT_NEAR(g(0, 0, 0), 0.0, 1e-14);
}

TEST(AmbientChristoffel, HalfPlane) {
    const Christoffel g = half_plane().christoffel(vec({0.0, 1.0}));
    EXPECT_NEAR(g(0, 0, 1), -1.0, 1e-14);
    EXPECT_NEAR(g(1, 0, 0), 1.0, 1e-14);
    EXPECT_NEAR(g(1, 1, 1), -1.0, 1e-14);
    EXPECT_NEAR(g(0, 0, 0), 0.0, 1e-14);
}

TEST(AmbientChristoffel, Symmetric) {
    const AmbientSpace s = AmbientSpace::general(
        {{parse("2 + sin(x1*x3)", 3), parse("0.1*x2", 3), parse("0", 3)},
         {parse("0.1*x2", 3), parse("1 + x1^2", 3), parse("0.2*cos(x3)", 3)},
         {parse("0", 3), parse("0.2*cos(x3)", 3), parse("exp(x2)", 3)}});
    const Christoffel g = s.christoffel(vec({0.3, -0.2, 0.7}));
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(g(k, i, j), g(k, j, i));
}

TEST(AmbientExp, Examples) {
    EXPECT_TRUE(AmbientSpace::euclidean(3).exp_map(vec({0, 0, 0}), vec({1, 2, 3})).isApprox(vec({1, 2, 3})));

    const AmbientSpace s2 = AmbientSpace::sphere(2, 1.0);
    const Eigen::VectorXd y = s2.exp_map(vec({1, 0, 0}), vec({0, std::numbers::pi / 2, 0}));
    EXPECT_NEAR((y - vec({0, 1, 0})).norm(), 0.0, 1e-15);

    const AmbientSpace flat = diagonal_metric("1", "1");
    EXPECT_NEAR((flat.exp_map(vec({0, 0}), vec({1, 0})) - vec({1, 0})).norm(), 0.0, 1e-9);
}

TEST(AmbientExp, IdentityMetricGeodesicsAreLines) {
    const AmbientSpace flat = diagonal_metric("1", "1");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd x = random_vector(rng, 2, 2.0);
        Eigen::VectorXd v = random_vector(rng, 2, 1.0);
        v *= 0.9 / v.norm();
        const GeodesicPath path = flat.integrate_geodesic(x, v);
        for (std::size_t s = 0; s < path.points.size(); ++s) {
            const double t = static_cast<double>(s) / static_cast<double>(path.points.size() - 1);
            EXPECT_LE((path.points[s] - (x + t * v)).norm(), 1e-9);
        }
    }
}

TEST(AmbientExp, GuardViolations) {
    const AmbientSpace s2 = AmbientSpace::sphere(2, 1.0);
    EXPECT_THROW(s2.exp_map(vec({1, 0, 0}), vec({0, 3.0, 0})), GeometryError);
    EXPECT_THROW(half_plane().exp_map(vec({0, 1}), vec({1.5, 0})), GeometryError);
    EXPECT_THROW(s2.exp_map(vec({2, 0, 0}), vec({0, 1, 0})), UsageError);
    EXPECT_THROW(s2.exp_map(vec({1, 0, 0}), vec({1, 1, 0})), UsageError);
}

TEST(AmbientLog, Examples) {
    EXPECT_TRUE(AmbientSpace::euclidean(3).log_map(vec({1, 1, 1}), vec({2, 3, 4})).isApprox(vec({1, 2, 3})));
    const Eigen::VectorXd v = AmbientSpace::sphere(2, 1.0).log_map(vec({1, 0, 0}), vec({0, 1, 0}));
    EXPECT_NEAR((v - vec({0, std::numbers::pi / 2, 0})).norm(), 0.0, 1e-15);
}

TEST(AmbientLog, HalfPlaneClosedForm) {
    // Along the vertical geodesic x2 = exp(s) the log is (0, log y2) scaled by x2 = 1.
    const Eigen::VectorXd v = half_plane().log_map(vec({0, 1}), vec({0, 1.5}));
    EXPECT_NEAR(v[0], 0.0, 1e-10);
    EXPECT_NEAR(v[1], std::log(1.5), 1e-8);
}

TEST(AmbientLog, ShootingFailureIsGeometryError) {
    EXPECT_THROW(half_plane().log_map(vec({0, 1}), vec({40, 1})), GeometryError);
}

TEST(AmbientRoundTrip, SpaceForms) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> len(0.0, 1.0);
    const AmbientSpace e = AmbientSpace::euclidean(3);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd x = random_vector(rng, 3, 1.0), v = random_vector(rng, 3, 1.0);
        EXPECT_LE((e.log_map(x, e.exp_map(x, v)) - v).norm(), 1e-8 * (1 + v.norm()));
    }
    for (const AmbientSpace& s : {AmbientSpace::sphere(2, 1.0), AmbientSpace::sphere(3, 4.0),
                                  AmbientSpace::hyperbolic(2, -1.0), AmbientSpace::hyperbolic(3, -0.5)}) {
        const double guard = std::min(s.injectivity_guard(), 3.0);
        for (int i = 0; i < 100; ++i) {
            const auto [x, v] = random_embedded(s, rng, guard * len(rng));
            const Eigen::VectorXd back = s.log_map(x, s.exp_map(x, v));
            EXPECT_LE((back - v).norm(), 1e-8 * (1 + v.norm())) << to_string(s.kind()) << " c=" << s.curvature();
        }
    }
}

TEST(AmbientRoundTrip, GeneralMetric) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5), len(0.0, 0.9);
    for (const AmbientSpace& s : {half_plane(), stereographic_sphere()}) {
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd x = vec({u(rng), 1.0 + u(rng)});
            Eigen::VectorXd v = random_vector(rng, 2, 1.0);
            v *= len(rng) / s.norm(x, v);
            const Eigen::VectorXd back = s.log_map(x, s.exp_map(x, v));
            EXPECT_LE((back - v).norm(), 1e-8 * (1 + v.norm()));
        }
    }
}

TEST(AmbientGeodesic, SpeedConservation) {
    std::mt19937_64 rng(3);
    for (const AmbientSpace& s : {half_plane(), stereographic_sphere()}) {
        for (int i = 0; i < 10; ++i) {
            const Eigen::VectorXd x = vec({0.2, 1.1});
            Eigen::VectorXd v = random_vector(rng, 2, 1.0);
            v *= 0.9 / s.norm(x, v);
            const GeodesicPath path = s.integrate_geodesic(x, v);
            const double speed0 = s.metric(x, v, v);
            for (std::size_t k = 0; k < path.points.size(); ++k) {
                const double sp = s.metric(path.points[k], path.velocities[k], path.velocities[k]);
                EXPECT_LE(std::fabs(sp - speed0), 1e-7 * speed0);
            }
        }
    }
}

TEST(AmbientCurvature, SpaceForms) {
    std::mt19937_64 rng(4);
    const AmbientSpace e3 = AmbientSpace::euclidean(3);
    EXPECT_EQ(e3.sectional_curvature(vec({0, 0, 0}), vec({1, 0, 0}), vec({0, 1, 1})), 0.0);
    const AmbientSpace s = AmbientSpace::sphere(3, 4.0);
    for (int i = 0; i < 100; ++i) {
        const auto [x, v] = random_embedded(s, rng, 1.0);
        const Eigen::VectorXd w = s.project_to_tangent(x, random_vector(rng, 4, 1.0));
        EXPECT_EQ(s.sectional_curvature(x, v, w), 4.0);
    }
    EXPECT_THROW(e3.sectional_curvature(vec({0, 0, 0}), vec({1, 0, 0}), vec({2, 0, 0})), GeometryError);
}

TEST(AmbientCurvature, GeneralMetricConstantCurvatureModels) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (const auto& [space, k] : {std::pair{half_plane(), -1.0}, std::pair{stereographic_sphere(), 1.0}}) {
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd p = vec({u(rng), 1.0 + u(rng)});
            const Eigen::VectorXd v = random_vector(rng, 2, 1.0), w = random_vector(rng, 2, 1.0);
            EXPECT_NEAR(space.sectional_curvature(p, v, w), k, 1e-4);
        }
    }
}
