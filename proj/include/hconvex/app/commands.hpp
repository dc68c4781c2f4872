#pragma once

#include "hconvex/app/catalog.hpp"
#include "hconvex/convexity.hpp"
#include "hconvex/curvature.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hconvex::app {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kGeometry = 2, kViolation = 3 };

struct Options {
    std::string surface;
    std::vector<double> point;
    std::string k;  // "", "2", "2-3" or "2,3"
    std::vector<double> radii{0.5, 0.1, 0.02};
    std::optional<int> samples;     // analyze: per radius (2000); sweep: number of points (50)
    int samples_per_radius = 2000;  // sweep only
    int grid = 0;                   // sweep: points per axis, overrides --samples
    std::optional<std::uint64_t> seed;
    double tol_eig = kDefaultTolEig;
    std::string format = "json";
    std::string output;
};

struct CommandResult {
    int exit_code = kOk;
    nlohmann::json report;
};

/// --seed, else $HCONVEX_SEED, else 0.
std::uint64_t resolve_seed(const Options& opts);

/// Parses a k specification against submanifold dimension n.
std::vector<std::size_t> parse_k_range(const std::string& spec, std::size_t n);

CommandResult cmd_analyze(const SurfaceSpec& spec, const Options& opts);
CommandResult cmd_theta(const SurfaceSpec& spec, const Options& opts);
CommandResult cmd_chen(const SurfaceSpec& spec, const Options& opts);
CommandResult cmd_sweep(const SurfaceSpec& spec, const Options& opts);

struct PointCheck {
    nlohmann::json summary;
    std::vector<std::string> violations;
};

/// Runs classify (and the Chen/Gauss checks on space forms) at one chart
/// point and lists every invariant that fails.
PointCheck check_point(const Immersion& imm, const Eigen::VectorXd& u, const ConvexityConfig& config,
                       const ThetaConfig& theta_config);

/// Seeded uniform sample (or grid) of chart points inside the domain box.
std::vector<Eigen::VectorXd> sweep_points(const SurfaceSpec& spec, int samples, int grid, std::uint64_t seed);

/// Full command line front end. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hconvex::app
