#pragma once

#include "hconvex/ambient.hpp"
#include "hconvex/immersion.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hconvex::app {

/// Per-variable chart domain box.
struct DomainBox {
    std::vector<double> min;
    std::vector<double> max;

    bool contains(const std::vector<double>& u) const;
};

/**
 * Serializable description of a surface: ambient space, chart arity,
 * component expressions and chart domain. Config files use the JSON shape
 * produced by to_json():
 *
 *   {"name": "...",
 *    "ambient": {"kind": "euclidean|sphere|hyperbolic|general", "dimension": m,
 *                "c": 0.0, "metric": [["1","0"],["0","1"]]},
 *    "chart_arity": n, "components": ["u1", ...],
 *    "domain": {"min": [...], "max": [...]}}
 */
struct SurfaceSpec {
    std::string name;
    AmbientKind kind = AmbientKind::Euclidean;
    std::size_t dimension = 3;
    double c = 0.0;
    std::vector<std::vector<std::string>> metric;  // GeneralMetric only
    std::size_t chart_arity = 2;
    std::vector<std::string> components;
    DomainBox domain;

    AmbientSpace ambient() const;
    Immersion build() const;

    nlohmann::json to_json() const;
    static SurfaceSpec from_json(const nlohmann::json& j);
};

/// Built-in surfaces with their default parameters.
std::vector<SurfaceSpec> catalog();

/// Names accepted by lookup(), with parameter hints (e.g. "sphere[:r]").
std::vector<std::string> catalog_names();

/// Catalog lookup with `name:params` shorthand, e.g. "sphere:2",
/// "ellipsoid:1,1,2", "graph:u1^2+u2^2". Throws UsageError on unknown names.
SurfaceSpec lookup(std::string_view name);

/// A catalog name, or `@path` to a JSON config file.
SurfaceSpec resolve_surface(std::string_view arg);

}  // namespace hconvex::app
