#include "hconvex/app/report.hpp"

#include <cmath>
#include <cstdio>

namespace hconvex::app {

namespace {

void emit(const nlohmann::json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            return;
        }
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad;
                out += nlohmann::json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                emit(it.value(), indent, depth + 1, out);
            }
            out += nl;
            out += close_pad;
            out += "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool scalars = true;
            for (const auto& e : j)
                if (e.is_structured()) scalars = false;
            out += "[";
            if (!scalars) out += nl;
            bool first = true;
            for (const auto& e : j) {
                if (!first) {
                    out += ",";
                    out += scalars ? (indent > 0 ? " " : "") : nl;
                }
                first = false;
                if (!scalars) out += pad;
                emit(e, indent, depth + 1, out);
            }
            if (!scalars) {
                out += nl;
                out += close_pad;
            }
            out += "]";
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string dump_report(const nlohmann::json& j, int indent) {
    std::string out;
    emit(j, indent, 0, out);
    out += "\n";
    return out;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json geometry_json(const PointGeometry& pg, const OmegaSpectrum& spectrum) {
    return {{"ambient_point", to_json(pg.ambient_point)},
            {"g", to_json(pg.induced_metric)},
            {"omega", to_json(pg.omega_matrix)},
            {"weingarten", to_json(pg.weingarten)},
            {"eigenvalues", to_json(spectrum.eigenvalues)},
            {"classification", to_string(spectrum.classification)},
            {"mean_curvature", to_json(pg.mean_curvature)},
            {"H_norm", pg.mean_curvature_norm()}};
}

nlohmann::json verdict_json(const ConvexityVerdict& v) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& e : v.evidence)
        evidence.push_back({{"radius", e.radius},
                            {"samples", e.samples},
                            {"negative", e.negative},
                            {"zero", e.zero},
                            {"positive", e.positive},
                            {"failures", e.failures},
                            {"min_F", e.min_f},
                            {"max_F", e.max_f},
                            {"valid", e.valid},
                            {"outcome", to_string(e.outcome)}});
    nlohmann::json radii = nlohmann::json::array();
    for (double r : v.radii) radii.push_back(r);
    return {{"necessary_pass", v.necessary_pass},
            {"sufficient_pass", v.sufficient_pass},
            {"sampling_outcome", v.sampling_outcome ? nlohmann::json(to_string(*v.sampling_outcome)) : nlohmann::json()},
            {"evidence", evidence},
            {"radii", radii},
            {"verdict", to_string(v.verdict)},
            {"consistent", v.consistent}};
}

nlohmann::json profile_json(const CurvatureProfile& p) {
    nlohmann::json theta = nlohmann::json::object();
    for (const auto& [k, t] : p.theta) theta[std::to_string(k)] = t;
    nlohmann::json margins = nlohmann::json::object();
    for (const auto& [k, m] : p.chen_margins) margins[std::to_string(k)] = m;
    nlohmann::json chen = nlohmann::json::object();
    for (const auto& [k, r] : p.chen)
        chen[std::to_string(k)] = {{"theta", r.theta},
                                   {"lambda_min", r.lambda_min},
                                   {"margin", r.margin},
                                   {"strict", r.strict},
                                   {"consistent", r.consistent}};
    return {{"point", to_json(p.point)},
            {"c", p.c},
            {"sectional_min", p.sectional_min},
            {"sectional_max", p.sectional_max},
            {"theta", theta},
            {"chen_margins", margins},
            {"chen", chen}};
}

nlohmann::json without_timing(nlohmann::json j) {
    if (j.is_object()) j.erase("timing");
    return j;
}

}  // namespace hconvex::app
