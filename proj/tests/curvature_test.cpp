#include "hconvex/app/catalog.hpp"
#include "hconvex/curvature.hpp"
#include "hconvex/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
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

PointGeometry at(const std::string& name, const Eigen::VectorXd& u) { return point_geometry(app::lookup(name).build(), u); }

PointGeometry euclidean_at(const std::vector<std::string>& comps, std::size_t n, const Eigen::VectorXd& u) {
    return point_geometry(Immersion::from_strings("t", AmbientSpace::euclidean(comps.size()), comps, n), u);
}

// Two unit vectors orthogonal to the unit vector a in R^3.
std::pair<Eigen::Vector3d, Eigen::Vector3d> complete(const Eigen::Vector3d& a) {
    const Eigen::Vector3d t = std::fabs(a[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d b = (t - t.dot(a) * a).normalized();
    return {b, a.cross(b)};
}

/**
 * Dense-grid oracle for theta_k when n <= 3, in g-orthonormal coordinates.
 * n = 2: the only 2-plane. n = 3, k = 2: planes by their unit normal on a
 * hemisphere grid. n = 3, k = 3: min over unit X on a sphere grid of
 * Ric(X) / 2.
 */
double brute_force_theta(const PointGeometry& pg, double c, std::size_t k, int grid = 200) {
    const GaussData gd(pg, c);
    if (gd.dimension() == 2) return gd.sectional_orthonormal(vec({1, 0}), vec({0, 1}));
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double th = std::numbers::pi * i / grid;
        for (int j = 0; j < 2 * grid; ++j) {
            const double ph = std::numbers::pi * j / grid;
            const Eigen::Vector3d a(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
            const auto [b1, b2] = complete(a);
            if (k == 2) {
                best = std::min(best, gd.sectional_orthonormal(b1, b2));
            } else {
                best = std::min(best, 0.5 * (gd.sectional_orthonormal(a, b1) + gd.sectional_orthonormal(a, b2)));
            }
        }
    }
    return best;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
}

// g-unit vector in span(L).
Eigen::VectorXd unit_in_span(const PointGeometry& pg, const Eigen::MatrixXd& L, std::mt19937_64& rng) {
    Eigen::VectorXd X = L * random_matrix(rng, L.cols(), 1);
    return X / std::sqrt(X.dot(pg.induced_metric * X));
}

const std::vector<std::string> kTestSurfaces3 = {"graph:u1^2 + 2*u2^2 - 0.5*u3^2 + u1*u2*u3", "sphere3:1.3",
                                                 "graph:sin(u1) * u2 + u3^2 + 0.3 * u1^2"};

PointGeometry codim_two_3fold(const Eigen::VectorXd& u) {
    return euclidean_at({"u1", "u2", "u3", "u1^2 + u2*u3", "u2^2 - u3^2 + 0.5*u1*u3"}, 3, u);
}

}  // namespace

TEST(SectionalGauss, Examples) {
    const PointGeometry s = at("sphere:1", vec({1.0, 0.5}));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        const Eigen::MatrixXd XY = random_matrix(rng, 2, 2);
        EXPECT_NEAR(sectional_gauss(s, 0.0, XY.col(0), XY.col(1)), 1.0, 1e-12);
    }
    EXPECT_EQ(sectional_gauss(at("plane", vec({0.1, 0.2})), 0.0, vec({1, 0}), vec({0, 1})), 0.0);
    const PointGeometry torus = at("flat-torus-in-R4", vec({1.0, 1.0}));
    EXPECT_NEAR(sectional_gauss(torus, 0.0, vec({1, 0}), vec({0.3, 1})), 0.0, 1e-14);
    EXPECT_THROW(sectional_gauss(s, 0.0, vec({1, 0}), vec({2, 0})), GeometryError);
}

TEST(SectionalGauss, SpaceFormAmbients) {
    // Clifford torus in S^3 is flat; geodesic spheres of radius rho have K = c + H^2.
    const PointGeometry ct = at("clifford-torus-in-S3", vec({0.4, -1.0}));
    EXPECT_NEAR(sectional_gauss(ct, 1.0, vec({1, 0}), vec({0, 1})), 0.0, 1e-12);
    const PointGeometry s3 = at("geodesic-sphere-in-S3:0.5", vec({1.0, 0.2}));
    EXPECT_NEAR(sectional_gauss(s3, 1.0, vec({1, 0}), vec({0, 1})), 1.0 / std::pow(std::sin(0.5), 2), 1e-9);
    const PointGeometry h3 = at("geodesic-sphere-in-H3:0.5", vec({1.0, 0.2}));
    EXPECT_NEAR(sectional_gauss(h3, -1.0, vec({1, 0}), vec({0, 1})), 1.0 / std::pow(std::sinh(0.5), 2), 1e-9);
}

TEST(SectionalGauss, HypersurfaceFormAgrees) {
    std::mt19937_64 rng(2);
    for (const auto& [name, u] : std::vector<std::pair<std::string, Eigen::VectorXd>>{
             {"semicubic", vec({0.3, 0.4})},
             {"ellipsoid:1,2,3", vec({0.2, -0.5})},
             {"geodesic-sphere-in-S3:0.7", vec({1.2, 2.0})},
             {kTestSurfaces3[0], vec({0.2, 0.1, -0.3})}}) {
        const PointGeometry pg = at(name, u);
        const double c = pg.ambient_curvature;
        for (int i = 0; i < 20; ++i) {
            const Eigen::MatrixXd XY = random_matrix(rng, u.size(), 2);
            EXPECT_NEAR(sectional_gauss_hypersurface(pg, c, XY.col(0), XY.col(1)),
                        sectional_gauss(pg, c, XY.col(0), XY.col(1)), 1e-9)
                << name;
        }
    }
    EXPECT_THROW(sectional_gauss_hypersurface(codim_two_3fold(vec({0.1, 0.2, 0.3})), 0.0, vec({1, 0, 0}), vec({0, 1, 0})),
                 UsageError);
}

TEST(CauchySchwarz, DefiniteOmegaGivesPositiveDeterminant) {
    std::mt19937_64 rng(3);
    const PointGeometry pg = at("ellipsoid:1,2,3", vec({0.3, 0.2}));
    ASSERT_EQ(eigen_omega(pg).classification, Definiteness::PositiveDefinite);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXd XY = random_matrix(rng, 2, 2);
        const Eigen::VectorXd X = XY.col(0), Y = XY.col(1);
        const double det = X.dot(pg.omega_matrix * X) * Y.dot(pg.omega_matrix * Y) - std::pow(X.dot(pg.omega_matrix * Y), 2);
        EXPECT_GT(det, 0.0);
    }
    const Eigen::VectorXd X = vec({0.4, -1.0});
    const double eq = X.dot(pg.omega_matrix * X) * (2 * X).dot(pg.omega_matrix * (2 * X)) -
                      std::pow(X.dot(pg.omega_matrix * (2 * X)), 2);
    EXPECT_NEAR(eq, 0.0, 1e-12);
}

TEST(RicL, Examples) {
    std::mt19937_64 rng(4);
    const PointGeometry s3 = at("sphere3:1", vec({1.0, 1.2, 0.3}));
    for (Eigen::Index k = 2; k <= 3; ++k) {
        const Eigen::MatrixXd L = random_matrix(rng, 3, k);
        EXPECT_NEAR(ric_L(s3, 0.0, L, unit_in_span(s3, L, rng)), static_cast<double>(k - 1), 1e-10);
    }
    const PointGeometry plane = at("plane", vec({0, 0}));
    EXPECT_EQ(ric_L(plane, 0.0, Eigen::MatrixXd::Identity(2, 2), vec({1, 0})), 0.0);

    const PointGeometry e = at("ellipsoid:1,2,3", vec({0.3, 0.2}));
    const Eigen::MatrixXd L = random_matrix(rng, 2, 2);
    const Eigen::VectorXd X = unit_in_span(e, L, rng);
    EXPECT_NEAR(ric_L(e, 0.0, L, X), sectional_gauss(e, 0.0, L.col(0), L.col(1)), 1e-12);
}

TEST(RicL, FrameIndependence) {
    std::mt19937_64 rng(5);
    for (const auto& pg : {at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1})), codim_two_3fold(vec({0.3, -0.1, 0.5}))}) {
        const Eigen::MatrixXd L = random_matrix(rng, 3, 3);
        const Eigen::VectorXd X = unit_in_span(pg, L, rng);
        const double ref = ric_L(pg, 0.0, L, X);
        for (int i = 0; i < 10; ++i) {
            // Same span, different spanning set: a different completion of X.
            const Eigen::MatrixXd L2 = L * random_matrix(rng, 3, 3);
            EXPECT_NEAR(ric_L(pg, 0.0, L2, X), ref, 1e-8);
        }
    }
}

TEST(RicL, Errors) {
    const PointGeometry pg = at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1}));
    EXPECT_THROW(ric_L(pg, 0.0, vec({1, 0, 0}), vec({1, 0, 0})), UsageError);
    Eigen::MatrixXd L(3, 2);
    L << 1, 2, 0, 0, 0, 0;
    EXPECT_THROW(ric_L(pg, 0.0, L, vec({1, 0, 0}) / std::sqrt(pg.induced_metric(0, 0))), GeometryError);
    L << 1, 0, 0, 1, 0, 0;
    EXPECT_THROW(ric_L(pg, 0.0, L, vec({0, 0, 1}) / std::sqrt(pg.induced_metric(2, 2))), UsageError);
    EXPECT_THROW(ric_L(pg, 0.0, L, vec({3, 0, 0})), UsageError);
}

TEST(ThetaK, ConstantCurvature) {
    const PointGeometry s3 = at("sphere3:1", vec({1.0, 1.2, 0.3}));
    EXPECT_NEAR(theta_k(s3, 0.0, 2).value, 1.0, 1e-6);
    EXPECT_NEAR(theta_k(s3, 0.0, 3).value, 1.0, 1e-6);
    const PointGeometry torus = at("flat-torus-in-R4", vec({1.0, 1.0}));
    EXPECT_NEAR(theta_k(torus, 0.0, 2).value, 0.0, 1e-12);
    EXPECT_THROW(theta_k(torus, 0.0, 3), UsageError);
    EXPECT_THROW(theta_k(torus, 0.0, 1), UsageError);
}

TEST(ThetaK, EllipsoidPole) {
    // Pole of the (1,1,2) ellipsoid: both principal curvatures equal c / a^2 = 2.
    const PointGeometry pg = at("ellipsoid:1,1,2", vec({0, 0}));
    EXPECT_LE((pg.ambient_point - vec({0, 0, 2})).norm(), 1e-15);
    EXPECT_NEAR(theta_k(pg, 0.0, 2).value, 4.0, 1e-9);
    EXPECT_NEAR(theta_k(pg, 0.0, 2).value, brute_force_theta(pg, 0.0, 2), 1e-4);
}

TEST(ThetaK, MatchesBruteForce) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    std::vector<PointGeometry> cases;
    for (const auto& name : kTestSurfaces3) cases.push_back(at(name, vec({0.4 + d(rng), 0.9 + d(rng), d(rng)})));
    cases.push_back(codim_two_3fold(vec({d(rng), d(rng), d(rng)})));
    cases.push_back(at("ellipsoid:1,2,3", vec({d(rng), d(rng)})));
    cases.push_back(at("graph:u1^2 - u2^2 + u1*u2", vec({d(rng), d(rng)})));
    for (const auto& pg : cases) {
        for (std::size_t k = 2; k <= pg.dimension(); ++k) {
            const double opt = theta_k(pg, 0.0, k).value;
            const double oracle = brute_force_theta(pg, 0.0, k);
            EXPECT_NEAR(opt, oracle, 1e-4) << "k=" << k;
            EXPECT_LE(opt, oracle + 1e-9);
        }
    }
}

TEST(ThetaK, MonotoneAndSound) {
    std::mt19937_64 rng(7);
    for (const auto& pg : {at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1})), at(kTestSurfaces3[2], vec({0.7, 0.1, -0.2})),
                           codim_two_3fold(vec({0.3, -0.1, 0.5}))}) {
        const double t2 = theta_k(pg, 0.0, 2).value, t3 = theta_k(pg, 0.0, 3).value;
        EXPECT_LE(t2, t3 + 1e-6);
        for (int i = 0; i < 200; ++i) {
            for (Eigen::Index k = 2; k <= 3; ++k) {
                const Eigen::MatrixXd L = random_matrix(rng, 3, k);
                const double sample = ric_L(pg, 0.0, L, unit_in_span(pg, L, rng)) / static_cast<double>(k - 1);
                EXPECT_LE(k == 2 ? t2 : t3, sample + 1e-9);
            }
        }
    }
}

TEST(ThetaK, FrameIsMinimizer) {
    const PointGeometry pg = at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1}));
    const ThetaResult r = theta_k(pg, 0.0, 2);
    ASSERT_EQ(r.frame.cols(), 2);
    const Eigen::VectorXd X = r.frame.col(0);
    EXPECT_NEAR(X.dot(pg.induced_metric * X), 1.0, 1e-9);
    EXPECT_NEAR(ric_L(pg, 0.0, r.frame, X), r.value, 1e-9);
}

TEST(ThetaK, DeterministicInSeed) {
    const PointGeometry pg = at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1}));
    ThetaConfig cfg;
    cfg.seed = 17;
    EXPECT_EQ(theta_k(pg, 0.0, 2, cfg).value, theta_k(pg, 0.0, 2, cfg).value);
}

TEST(SectionalRange, Bounds) {
    const PointGeometry pg = at(kTestSurfaces3[0], vec({0.2, -0.4, 0.1}));
    const SectionalRange r = sectional_range(pg, 0.0);
    EXPECT_LE(r.min, r.max);
    EXPECT_NEAR(r.min, theta_k(pg, 0.0, 2).value, 1e-6);
    const SectionalRange s = sectional_range(at("sphere3:1", vec({1.0, 1.2, 0.3})), 0.0);
    EXPECT_NEAR(s.min, 1.0, 1e-9);
    EXPECT_NEAR(s.max, 1.0, 1e-9);
}

TEST(ChenCheck, Examples) {
    const ChenResult s = chen_check(at("sphere:1", vec({0.5, 0.5})), 0.0, 2);
    EXPECT_NEAR(s.lambda_min, 1.0, 1e-12);
    EXPECT_NEAR(s.theta, 1.0, 1e-9);
    EXPECT_NEAR(s.margin, 0.5, 1e-9);
    EXPECT_TRUE(s.strict);
    EXPECT_TRUE(s.consistent);

    const ChenResult p = chen_check(at("plane", vec({0.0, 0.0})), 0.0, 2);
    EXPECT_EQ(p.margin, 0.0);
    EXPECT_EQ(p.theta, 0.0);
    EXPECT_FALSE(p.strict);
    EXPECT_TRUE(p.consistent);

    const ChenResult g = chen_check(at("graph:u1^2+u2^2", vec({0.0, 0.0})), 0.0, 2);
    EXPECT_GE(g.margin, 0.0);
    EXPECT_TRUE(g.strict);
    EXPECT_TRUE(g.consistent);
}

TEST(ChenCheck, SphereOracle) {
    for (double r : {0.5, 1.0, 2.0}) {
        const ChenResult res = chen_check(at("sphere:" + std::to_string(r), vec({1.1, 0.3})), 0.0, 2);
        EXPECT_NEAR(res.theta, 1 / (r * r), 1e-6);
        EXPECT_NEAR(res.margin, (1 / (r * r)) * 0.5, 1e-6);
    }
    const PointGeometry s3 = at("sphere3:2", vec({1.0, 1.2, 0.3}));
    for (std::size_t k = 2; k <= 3; ++k) EXPECT_NEAR(chen_check(s3, 0.0, k).margin, 0.25 / 3.0, 1e-6);
}

TEST(ChenCheck, InequalityOnSurfaces) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-0.6, 0.6);
    for (const auto& pg : {at("semicubic", vec({d(rng), d(rng)})), at(kTestSurfaces3[0], vec({d(rng), d(rng), d(rng)})),
                           codim_two_3fold(vec({d(rng), d(rng), d(rng)})),
                           at("clifford-torus-in-S3", vec({d(rng), d(rng)})),
                           at("geodesic-sphere-in-H3:0.5", vec({1.0 + d(rng), d(rng)}))}) {
        for (std::size_t k = 2; k <= pg.dimension(); ++k) {
            const ChenResult r = chen_check(pg, pg.ambient_curvature, k);
            EXPECT_GE(r.margin, -1e-6);
            EXPECT_TRUE(r.consistent);
        }
    }
}

TEST(HConvexityFromTheta, Examples) {
    const ThetaConvexity s = hconvexity_from_theta(at("sphere:1", vec({0.5, 0.5})), 0.0);
    ASSERT_TRUE(s.verdict.has_value());
    EXPECT_EQ(*s.verdict, Verdict::StrictlyHConvex);
    EXPECT_TRUE(s.hypersurface);
    EXPECT_TRUE(s.converse_holds);
    EXPECT_GT(s.margins.at(2), 0.0);

    const ThetaConvexity p = hconvexity_from_theta(at("plane", vec({0.0, 0.0})), 0.0);
    EXPECT_FALSE(p.verdict.has_value());

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    for (int i = 0; i < 10; ++i) {
        const ThetaConvexity e = hconvexity_from_theta(at("ellipsoid:1,2,3", vec({d(rng), d(rng)})), 0.0);
        EXPECT_TRUE(e.omega_positive_definite);
        EXPECT_TRUE(e.converse_holds);
        for (const auto& [k, m] : e.margins) EXPECT_GT(m, 0.0);
    }
}

TEST(CurvatureProfile, Consistency) {
    const PointGeometry pg = at(kTestSurfaces3[2], vec({0.7, 0.1, -0.2}));
    const CurvatureProfile p = curvature_profile(pg, 0.0, 2, 3);
    ASSERT_EQ(p.theta.size(), 2u);
    EXPECT_LE(p.theta.at(2), p.theta.at(3) + 1e-6);
    EXPECT_LE(p.sectional_min, p.theta.at(2) + 1e-6);
    for (const auto& [k, m] : p.chen_margins) EXPECT_EQ(m, p.chen.at(k).margin);
    const CurvatureProfile clamped = curvature_profile(pg, 0.0, 0, 10);
    EXPECT_EQ(clamped.theta.size(), 2u);
    EXPECT_THROW(curvature_profile(at("helix", vec({0.1})), 0.0, 2, 2), UsageError);
}
