#pragma once

#include "hconvex/convexity.hpp"
#include "hconvex/curvature.hpp"
#include "hconvex/immersion.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <string>

namespace hconvex::app {

inline constexpr const char* kToolVersion = "hconvex 1.0.0";

/// Serializes with every real written as %.17g; non-finite reals become null.
std::string dump_report(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const Eigen::MatrixXd& m);  // row-major nested arrays

nlohmann::json geometry_json(const PointGeometry& pg, const OmegaSpectrum& spectrum);
nlohmann::json verdict_json(const ConvexityVerdict& v);
nlohmann::json profile_json(const CurvatureProfile& p);

/// Drops the "timing" member so payloads can be compared.
nlohmann::json without_timing(nlohmann::json j);

}  // namespace hconvex::app
