#include "hconvex/app/catalog.hpp"

#include "hconvex/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

namespace hconvex::app {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMargin = 1e-3;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_params(std::string_view text, std::string_view name) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, end - pos);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw UsageError("bad parameter '" + std::string(item) + "' for surface " + std::string(name));
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

std::vector<double> params_or(std::string_view text, std::string_view name, std::vector<double> defaults) {
    if (text.empty()) return defaults;
    std::vector<double> p = parse_params(text, name);
    if (p.size() != defaults.size())
        throw UsageError("surface " + std::string(name) + " takes " + std::to_string(defaults.size()) + " parameter(s)");
    for (double v : p)
        if (!(v > 0.0)) throw UsageError("surface " + std::string(name) + " parameters must be positive");
    return p;
}

SurfaceSpec euclidean(std::string name, std::size_t m, std::size_t n, std::vector<std::string> components,
                      std::vector<double> lo, std::vector<double> hi) {
    SurfaceSpec s;
    s.name = std::move(name);
    s.kind = AmbientKind::Euclidean;
    s.dimension = m;
    s.chart_arity = n;
    s.components = std::move(components);
    s.domain = {std::move(lo), std::move(hi)};
    return s;
}

SurfaceSpec semicubic() {
    return euclidean("semicubic", 3, 2, {"u1", "u2", "u1^2 + u2^3"}, {-1, -1}, {1, 1});
}

SurfaceSpec sphere(double r) {
    const std::string R = num(r);
    return euclidean("sphere:" + R, 3, 2,
                     {R + " * sin(u1) * cos(u2)", R + " * sin(u1) * sin(u2)", R + " * cos(u1)"},
                     {kMargin, -kPi}, {kPi - kMargin, kPi});
}

SurfaceSpec sphere3(double r) {
    const std::string R = num(r);
    return euclidean("sphere3:" + R, 4, 3,
                     {R + " * sin(u1) * sin(u2) * cos(u3)", R + " * sin(u1) * sin(u2) * sin(u3)",
                      R + " * sin(u1) * cos(u2)", R + " * cos(u1)"},
                     {kMargin, kMargin, -kPi}, {kPi - kMargin, kPi - kMargin, kPi});
}

// Graph chart over the upper cap, so u = (0,0) is the pole (0, 0, c).
SurfaceSpec ellipsoid(double a, double b, double c) {
    const std::string A = num(a), B = num(b), C = num(c);
    return euclidean("ellipsoid:" + A + "," + B + "," + C, 3, 2,
                     {"u1", "u2", C + " * sqrt(1 - (u1 / " + A + ")^2 - (u2 / " + B + ")^2)"}, {-0.6 * a, -0.6 * b},
                     {0.6 * a, 0.6 * b});
}

std::size_t graph_arity(const std::string& expr) {
    static const std::regex var(R"((?:^|[^A-Za-z0-9_])[ux]([0-9]+))");
    std::size_t arity = 1;
    for (auto it = std::sregex_iterator(expr.begin(), expr.end(), var); it != std::sregex_iterator(); ++it)
        arity = std::max<std::size_t>(arity, std::stoul((*it)[1].str()));
    return arity;
}

SurfaceSpec graph(const std::string& expr) {
    const std::size_t n = graph_arity(expr);
    std::vector<std::string> comps;
    for (std::size_t i = 1; i <= n; ++i) comps.push_back("u" + std::to_string(i));
    comps.push_back(expr);
    return euclidean("graph:" + expr, n + 1, n, comps, std::vector<double>(n, -1.0), std::vector<double>(n, 1.0));
}

SurfaceSpec helix(double a, double b) {
    const std::string A = num(a), B = num(b);
    return euclidean("helix:" + A + "," + B, 3, 1, {A + " * cos(t)", A + " * sin(t)", B + " * t"}, {-2 * kPi},
                     {2 * kPi});
}

SurfaceSpec circle(double r) {
    const std::string R = num(r);
    return euclidean("circle:" + R, 2, 1, {R + " * cos(t)", R + " * sin(t)"}, {-kPi}, {kPi});
}

SurfaceSpec line() { return euclidean("line", 3, 1, {"t", "0", "0"}, {-1}, {1}); }

SurfaceSpec plane() { return euclidean("plane", 3, 2, {"u1", "u2", "0"}, {-1, -1}, {1, 1}); }

SurfaceSpec flat_torus() {
    return euclidean("flat-torus-in-R4", 4, 2,
                     {"cos(u1) / sqrt(2)", "sin(u1) / sqrt(2)", "cos(u2) / sqrt(2)", "sin(u2) / sqrt(2)"},
                     {-kPi, -kPi}, {kPi, kPi});
}

SurfaceSpec clifford_torus() {
    SurfaceSpec s = flat_torus();
    s.name = "clifford-torus-in-S3";
    s.kind = AmbientKind::Sphere;
    s.dimension = 3;
    s.c = 1.0;
    return s;
}

SurfaceSpec geodesic_sphere_s3(double rho) {
    const std::string C = num(std::cos(rho)), S = num(std::sin(rho));
    SurfaceSpec s;
    s.name = "geodesic-sphere-in-S3:" + num(rho);
    s.kind = AmbientKind::Sphere;
    s.dimension = 3;
    s.c = 1.0;
    s.chart_arity = 2;
    s.components = {C, S + " * sin(u1) * cos(u2)", S + " * sin(u1) * sin(u2)", S + " * cos(u1)"};
    s.domain = {{kMargin, -kPi}, {kPi - kMargin, kPi}};
    return s;
}

SurfaceSpec geodesic_sphere_h3(double rho) {
    const std::string C = num(std::cosh(rho)), S = num(std::sinh(rho));
    SurfaceSpec s;
    s.name = "geodesic-sphere-in-H3:" + num(rho);
    s.kind = AmbientKind::Hyperbolic;
    s.dimension = 3;
    s.c = -1.0;
    s.chart_arity = 2;
    s.components = {C, S + " * sin(u1) * cos(u2)", S + " * sin(u1) * sin(u2)", S + " * cos(u1)"};
    s.domain = {{kMargin, -kPi}, {kPi - kMargin, kPi}};
    return s;
}

// Horizontal line y = 1 in the upper half-plane model: a horocycle with
// geodesic curvature 1.
SurfaceSpec horocycle() {
    SurfaceSpec s;
    s.name = "horocycle-in-halfplane";
    s.kind = AmbientKind::GeneralMetric;
    s.dimension = 2;
    s.metric = {{"1 / x2^2", "0"}, {"0", "1 / x2^2"}};
    s.chart_arity = 1;
    s.components = {"t", "1"};
    s.domain = {{-1.0}, {1.0}};
    return s;
}

struct Entry {
    std::string_view name;
    std::string_view hint;
};

constexpr Entry kEntries[] = {
    {"semicubic", "semicubic"},
    {"sphere", "sphere[:r]"},
    {"sphere3", "sphere3[:r]"},
    {"ellipsoid", "ellipsoid[:a,b,c]"},
    {"graph", "graph[:expr]"},
    {"helix", "helix[:a,b]"},
    {"circle", "circle[:r]"},
    {"line", "line"},
    {"plane", "plane"},
    {"flat-torus-in-R4", "flat-torus-in-R4"},
    {"clifford-torus-in-S3", "clifford-torus-in-S3"},
    {"geodesic-sphere-in-S3", "geodesic-sphere-in-S3[:rho]"},
    {"geodesic-sphere-in-H3", "geodesic-sphere-in-H3[:rho]"},
    {"horocycle-in-halfplane", "horocycle-in-halfplane"},
};

AmbientKind kind_from_string(const std::string& s) {
    if (s == "euclidean") return AmbientKind::Euclidean;
    if (s == "sphere") return AmbientKind::Sphere;
    if (s == "hyperbolic") return AmbientKind::Hyperbolic;
    if (s == "general") return AmbientKind::GeneralMetric;
    throw UsageError("unknown ambient kind '" + s + "'");
}

}  // namespace

bool DomainBox::contains(const std::vector<double>& u) const {
    if (u.size() != min.size() || u.size() != max.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] < min[i] || u[i] > max[i]) return false;
    return true;
}

AmbientSpace SurfaceSpec::ambient() const {
    switch (kind) {
        case AmbientKind::Euclidean:
            return AmbientSpace::euclidean(dimension);
        case AmbientKind::Sphere:
            return AmbientSpace::sphere(dimension, c);
        case AmbientKind::Hyperbolic:
            return AmbientSpace::hyperbolic(dimension, c);
        case AmbientKind::GeneralMetric:
            break;
    }
    if (metric.size() != dimension) throw UsageError("metric must be a " + std::to_string(dimension) + "x" +
                                                     std::to_string(dimension) + " matrix");
    std::vector<std::vector<Expression>> exprs;
    for (const auto& row : metric) {
        std::vector<Expression> r;
        for (const auto& s : row) r.push_back(Expression::parse(s, dimension));
        exprs.push_back(std::move(r));
    }
    return AmbientSpace::general(std::move(exprs));
}

Immersion SurfaceSpec::build() const {
    if (domain.min.size() != chart_arity || domain.max.size() != chart_arity)
        throw UsageError("domain box must have one interval per chart variable");
    return Immersion::from_strings(name, ambient(), components, chart_arity);
}

nlohmann::json SurfaceSpec::to_json() const {
    nlohmann::json amb = {{"kind", to_string(kind)}, {"dimension", dimension}, {"c", c}};
    if (kind == AmbientKind::GeneralMetric) amb["metric"] = metric;
    return {{"name", name},
            {"ambient", amb},
            {"chart_arity", chart_arity},
            {"components", components},
            {"domain", {{"min", domain.min}, {"max", domain.max}}}};
}

SurfaceSpec SurfaceSpec::from_json(const nlohmann::json& j) {
    try {
        SurfaceSpec s;
        s.name = j.value("name", std::string("custom"));
        const auto& amb = j.at("ambient");
        s.kind = kind_from_string(amb.at("kind").get<std::string>());
        s.dimension = amb.at("dimension").get<std::size_t>();
        s.c = amb.value("c", 0.0);
        if (amb.contains("metric")) s.metric = amb.at("metric").get<std::vector<std::vector<std::string>>>();
        s.chart_arity = j.at("chart_arity").get<std::size_t>();
        s.components = j.at("components").get<std::vector<std::string>>();
        if (j.contains("domain")) {
            s.domain.min = j.at("domain").at("min").get<std::vector<double>>();
            s.domain.max = j.at("domain").at("max").get<std::vector<double>>();
        } else {
            s.domain.min.assign(s.chart_arity, -1.0);
            s.domain.max.assign(s.chart_arity, 1.0);
        }
        const std::size_t expected = s.kind == AmbientKind::Sphere || s.kind == AmbientKind::Hyperbolic
                                         ? s.dimension + 1
                                         : s.dimension;
        if (s.components.size() != expected)
            throw UsageError("surface '" + s.name + "' needs " + std::to_string(expected) + " components");
        for (const auto& comp : s.components) Expression::parse(comp, s.chart_arity);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed surface config: ") + e.what());
    }
}

std::vector<SurfaceSpec> catalog() {
    return {semicubic(),         sphere(1.0),        sphere3(1.0),        ellipsoid(1, 1, 2),
            graph("u1^2 + u2^2"), helix(1, 1),        circle(1.0),         line(),
            plane(),             flat_torus(),       clifford_torus(),    geodesic_sphere_s3(0.5),
            geodesic_sphere_h3(0.5), horocycle()};
}

std::vector<std::string> catalog_names() {
    std::vector<std::string> out;
    for (const auto& e : kEntries) out.emplace_back(e.hint);
    return out;
}

SurfaceSpec lookup(std::string_view full) {
    const std::size_t colon = full.find(':');
    const std::string_view name = full.substr(0, colon);
    const std::string_view params = colon == std::string_view::npos ? std::string_view{} : full.substr(colon + 1);
    auto no_params = [&] {
        if (!params.empty()) throw UsageError("surface " + std::string(name) + " takes no parameters");
    };

    if (name == "semicubic") return no_params(), semicubic();
    if (name == "sphere") return sphere(params_or(params, name, {1.0})[0]);
    if (name == "sphere3") return sphere3(params_or(params, name, {1.0})[0]);
    if (name == "ellipsoid") {
        const auto p = params_or(params, name, {1.0, 1.0, 2.0});
        return ellipsoid(p[0], p[1], p[2]);
    }
    if (name == "graph") {
        std::string expr = params.empty() ? std::string("u1^2 + u2^2") : std::string(params);
        if (expr.size() >= 2 && expr.front() == '"' && expr.back() == '"') expr = expr.substr(1, expr.size() - 2);
        SurfaceSpec s = graph(expr);
        Expression::parse(expr, s.chart_arity);
        return s;
    }
    if (name == "helix") {
        const auto p = params_or(params, name, {1.0, 1.0});
        return helix(p[0], p[1]);
    }
    if (name == "circle") return circle(params_or(params, name, {1.0})[0]);
    if (name == "line") return no_params(), line();
    if (name == "plane") return no_params(), plane();
    if (name == "flat-torus-in-R4") return no_params(), flat_torus();
    if (name == "clifford-torus-in-S3") return no_params(), clifford_torus();
    if (name == "geodesic-sphere-in-S3") {
        const double rho = params_or(params, name, {0.5})[0];
        if (!(rho < kPi)) throw UsageError("geodesic sphere radius must be below pi");
        return geodesic_sphere_s3(rho);
    }
    if (name == "geodesic-sphere-in-H3") return geodesic_sphere_h3(params_or(params, name, {0.5})[0]);
    if (name == "horocycle-in-halfplane") return no_params(), horocycle();

    std::ostringstream msg;
    msg << "unknown surface '" << name << "'; available:";
    for (const auto& n : catalog_names()) msg << ' ' << n;
    throw UsageError(msg.str());
}

SurfaceSpec resolve_surface(std::string_view arg) {
    if (!arg.empty() && arg.front() == '@') {
        const std::string path(arg.substr(1));
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open surface config '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("surface config '" + path + "' is not valid JSON: " + e.what());
        }
        return SurfaceSpec::from_json(j);
    }
    return lookup(arg);
}

}  // namespace hconvex::app
