#include "hconvex/app/commands.hpp"

#include "hconvex/app/report.hpp"
#include "hconvex/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

namespace hconvex::app {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(',', pos), text.size());
        std::string item = text.substr(pos, end - pos);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw UsageError("cannot parse " + what + " value '" + item + "'");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

ConvexityConfig convexity_config(const Options& opts, int samples_per_radius) {
    if (!(opts.tol_eig >= 0.0) || !std::isfinite(opts.tol_eig)) throw UsageError("--tol-eig must be a non-negative number");
    ConvexityConfig c;
    c.radii = opts.radii;
    c.samples_per_radius = samples_per_radius;
    c.seed = resolve_seed(opts);
    c.tol_eig = opts.tol_eig;
    return c;
}

ThetaConfig theta_config(const Options& opts) {
    ThetaConfig t;
    t.seed = resolve_seed(opts);
    return t;
}

nlohmann::json input_echo(const std::string& command, const SurfaceSpec& spec, const Options& opts,
                          const ConvexityConfig& cc) {
    nlohmann::json radii = nlohmann::json::array();
    for (double r : cc.radii) radii.push_back(r);
    nlohmann::json point = nlohmann::json::array();
    for (double x : opts.point) point.push_back(x);
    return {{"command", command},
            {"surface", spec.to_json()},
            {"point", point},
            {"k", opts.k},
            {"seed", resolve_seed(opts)},
            {"radii", radii},
            {"samples_per_radius", cc.samples_per_radius},
            {"tolerances",
             {{"tol_eig", cc.tol_eig}, {"tol_F", cc.tol_f}, {"tol_H", cc.tol_h}, {"tol_chen", ChenTolerances{}.tol_chen}}}};
}

Eigen::VectorXd chart_point(const SurfaceSpec& spec, const Options& opts) {
    if (opts.point.size() != spec.chart_arity)
        throw UsageError("--point needs " + std::to_string(spec.chart_arity) + " coordinate(s) for surface " + spec.name);
    if (!spec.domain.contains(opts.point)) throw UsageError("--point lies outside the chart domain of " + spec.name);
    return Eigen::Map<const Eigen::VectorXd>(opts.point.data(), static_cast<Eigen::Index>(opts.point.size()));
}

void finish(nlohmann::json& report, Clock::time_point start) {
    report["timing"] = {{"elapsed_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
}

CommandResult curvature_command(const std::string& name, const SurfaceSpec& spec, const Options& opts) {
    const auto start = Clock::now();
    const Immersion imm = spec.build();
    if (!imm.ambient().is_space_form())
        throw GeometryError("the " + name + " command needs a space-form ambient (euclidean, sphere or hyperbolic); " +
                            spec.name + " uses a general metric");
    const Eigen::VectorXd u = chart_point(spec, opts);
    const std::vector<std::size_t> ks = parse_k_range(opts.k, spec.chart_arity);
    const PointGeometry pg = point_geometry(imm, u);
    const OmegaSpectrum spectrum = eigen_omega(pg, opts.tol_eig);
    const double c = imm.ambient().curvature();
    const ThetaConfig tc = theta_config(opts);

    CurvatureProfile profile = curvature_profile(pg, c, ks.front(), ks.back(), tc);
    for (auto it = profile.theta.begin(); it != profile.theta.end();) {
        if (std::find(ks.begin(), ks.end(), it->first) == ks.end()) {
            profile.chen_margins.erase(it->first);
            profile.chen.erase(it->first);
            it = profile.theta.erase(it);
        } else {
            ++it;
        }
    }

    nlohmann::json point = {{"chart_point", to_json(u)},
                            {"geometry", geometry_json(pg, spectrum)},
                            {"curvature", profile_json(profile)}};
    if (name == "chen") {
        const ThetaConvexity tcv = hconvexity_from_theta(pg, c, tc);
        nlohmann::json margins = nlohmann::json::object();
        for (const auto& [k, m] : tcv.margins) margins[std::to_string(k)] = m;
        point["theta_convexity"] = {
            {"verdict", tcv.verdict ? nlohmann::json(to_string(*tcv.verdict)) : nlohmann::json()},
            {"hypersurface", tcv.hypersurface},
            {"omega_positive_definite", tcv.omega_positive_definite},
            {"theta_minus_c", margins},
            {"converse_holds", tcv.converse_holds}};
    }
    CommandResult r;
    r.report = {{"tool_version", kToolVersion},
                {"input", input_echo(name, spec, opts, convexity_config(opts, 0))},
                {"points", nlohmann::json::array({point})}};
    finish(r.report, start);
    return r;
}

std::string flatten_text(const nlohmann::json& j, const std::string& prefix, std::ostringstream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten_text(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array() && std::any_of(j.begin(), j.end(), [](const auto& e) { return e.is_structured(); })) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten_text(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        std::string value = dump_report(j, 0);
        value.pop_back();
        out << prefix << " = " << value << "\n";
    }
    return out.str();
}

std::string render(const nlohmann::json& report, const std::string& format) {
    if (format == "text") {
        std::ostringstream out;
        return flatten_text(report, "", out);
    }
    return dump_report(report);
}

}  // namespace

std::uint64_t resolve_seed(const Options& opts) {
    if (opts.seed) return *opts.seed;
    if (const char* env = std::getenv("HCONVEX_SEED")) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("HCONVEX_SEED must be an unsigned integer");
        return v;
    }
    return 0;
}

std::vector<std::size_t> parse_k_range(const std::string& spec, std::size_t n) {
    if (n < 2) throw UsageError("k-order curvatures need a submanifold of dimension at least 2");
    std::vector<std::size_t> ks;
    if (spec.empty()) {
        for (std::size_t k = 2; k <= n; ++k) ks.push_back(k);
        return ks;
    }
    auto to_k = [&](const std::string& s) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("bad --k value '" + s + "'");
        if (v < 2 || v > n) throw UsageError("k must lie in 2.." + std::to_string(n));
        return v;
    };
    const std::size_t dash = spec.find('-');
    if (dash != std::string::npos) {
        const std::size_t lo = to_k(spec.substr(0, dash)), hi = to_k(spec.substr(dash + 1));
        if (lo > hi) throw UsageError("empty --k range");
        for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
        return ks;
    }
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t end = std::min(spec.find(',', pos), spec.size());
        ks.push_back(to_k(spec.substr(pos, end - pos)));
        pos = end + 1;
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

CommandResult cmd_analyze(const SurfaceSpec& spec, const Options& opts) {
    const auto start = Clock::now();
    const Immersion imm = spec.build();
    const Eigen::VectorXd u = chart_point(spec, opts);
    const ConvexityConfig cc = convexity_config(opts, opts.samples.value_or(2000));

    const PointGeometry pg = point_geometry(imm, u);
    const OmegaSpectrum spectrum = eigen_omega(pg, cc.tol_eig);
    const ConvexityVerdict verdict = classify(imm, u, cc);

    nlohmann::json point = {{"chart_point", to_json(u)},
                            {"geometry", geometry_json(pg, spectrum)},
                            {"verdict", verdict_json(verdict)}};
    if (spec.chart_arity == 1) {
        const CurveGeometry cg = curve_geometry(imm, u[0]);
        point["curve"] = {{"speed_squared", cg.speed_squared},
                          {"omega_velocity", cg.omega_velocity},
                          {"verdict", to_string(curve_convexity(imm, u[0], cc).verdict)}};
    }
    if (imm.ambient().is_space_form() && spec.chart_arity >= 2)
        point["curvature"] =
            profile_json(curvature_profile(pg, imm.ambient().curvature(), 2, spec.chart_arity, theta_config(opts)));

    CommandResult r;
    r.report = {{"tool_version", kToolVersion},
                {"input", input_echo("analyze", spec, opts, cc)},
                {"points", nlohmann::json::array({point})}};
    finish(r.report, start);
    return r;
}

CommandResult cmd_theta(const SurfaceSpec& spec, const Options& opts) { return curvature_command("theta", spec, opts); }

CommandResult cmd_chen(const SurfaceSpec& spec, const Options& opts) { return curvature_command("chen", spec, opts); }

PointCheck check_point(const Immersion& imm, const Eigen::VectorXd& u, const ConvexityConfig& config,
                       const ThetaConfig& theta_config) {
    PointCheck out;
    const PointGeometry pg = point_geometry(imm, u);
    const std::size_t n = pg.dimension();
    const ConvexityVerdict v = classify(imm, u, config);
    const double lambda_min = v.spectrum.eigenvalues.minCoeff();
    const double h2 = pg.dot(pg.mean_curvature, pg.mean_curvature);

    out.summary = {{"chart_point", to_json(u)},
                   {"verdict", to_string(v.verdict)},
                   {"sampling_outcome",
                    v.sampling_outcome ? nlohmann::json(to_string(*v.sampling_outcome)) : nlohmann::json()},
                   {"eigenvalues", to_json(v.spectrum.eigenvalues)},
                   {"classification", to_string(v.spectrum.classification)},
                   {"H_norm", v.mean_curvature_norm}};

    const double trace = (pg.weingarten).trace();
    const double expected = static_cast<double>(n) * h2;
    // Relative to n|H|^2, floored by the roundoff scale n |H| max|h_ij| of Omega itself.
    double h_max = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h_max = std::max(h_max, std::sqrt(std::max(0.0, pg.dot(pg.h(i, j), pg.h(i, j)))));
    const double trace_scale = std::max({expected, static_cast<double>(n) * std::sqrt(h2) * h_max, 1e-300});
    if (std::fabs(trace - expected) > 1e-8 * trace_scale)
        out.violations.push_back("trace identity");

    if (v.sampling_outcome) {
        const bool one_sided = *v.sampling_outcome != SamplingOutcome::TwoSided;
        if (one_sided && lambda_min < -v.spectrum.tolerance) out.violations.push_back("one-sided sampling with indefinite omega");
        if (v.sufficient_pass) {
            const RadiusEvidence* last = nullptr;
            for (const auto& e : v.evidence)
                if (e.valid) last = &e;
            if (*v.sampling_outcome != SamplingOutcome::OneSidedStrict || !last || !(last->min_f > 0.0))
                out.violations.push_back("positive definite omega without strict one-sided sampling");
        }
    }

    if (n == 1) {
        const CurveGeometry cg = curve_geometry(imm, u[0]);
        const double rhs = cg.speed_squared * h2;
        if (std::fabs(cg.omega_velocity - rhs) > 1e-9 * std::max(1.0, rhs)) out.violations.push_back("curve omega identity");
    }

    if (imm.ambient().is_space_form() && n >= 2) {
        const double c = imm.ambient().curvature();
        const CurvatureProfile profile = curvature_profile(pg, c, 2, n, theta_config);
        nlohmann::json margins = nlohmann::json::object(), theta = nlohmann::json::object();
        for (const auto& [k, r] : profile.chen) {
            margins[std::to_string(k)] = r.margin;
            theta[std::to_string(k)] = r.theta;
            if (!r.consistent) out.violations.push_back("chen inequality at k=" + std::to_string(k));
        }
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& [k, t] : profile.theta) {
            if (t < prev - 1e-6) out.violations.push_back("theta monotonicity at k=" + std::to_string(k));
            prev = t;
        }
        out.summary["theta"] = theta;
        out.summary["chen_margins"] = margins;

        const bool hypersurface = pg.normal_frame.cols() == 1;
        if (hypersurface && v.mean_curvature_norm > config.tol_h) {
            std::mt19937_64 rng(config.seed + 17);
            std::normal_distribution<double> normal;
            for (int s = 0; s < 5; ++s) {
                Eigen::VectorXd X(static_cast<Eigen::Index>(n)), Y(static_cast<Eigen::Index>(n));
                for (auto& x : X) x = normal(rng);
                for (auto& y : Y) y = normal(rng);
                const double a = sectional_gauss(pg, c, X, Y);
                const double b = sectional_gauss_hypersurface(pg, c, X, Y);
                if (std::fabs(a - b) > 1e-9 * std::max(1.0, std::fabs(a))) {
                    out.violations.push_back("gauss equation forms disagree");
                    break;
                }
            }
            if (v.spectrum.classification == Definiteness::PositiveDefinite)
                for (const auto& [k, t] : profile.theta)
                    if (!(t - c > 0.0)) out.violations.push_back("strict convexity without theta_k > c at k=" + std::to_string(k));
        }
    }
    nlohmann::json viol = nlohmann::json::array();
    for (const auto& s : out.violations) viol.push_back(s);
    out.summary["violations"] = viol;
    return out;
}

std::vector<Eigen::VectorXd> sweep_points(const SurfaceSpec& spec, int samples, int grid, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(spec.chart_arity);
    std::vector<Eigen::VectorXd> pts;
    if (grid > 0) {
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        for (;;) {
            Eigen::VectorXd u(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double lo = spec.domain.min[static_cast<std::size_t>(i)], hi = spec.domain.max[static_cast<std::size_t>(i)];
                u[i] = grid == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[static_cast<std::size_t>(i)] / (grid - 1);
            }
            pts.push_back(u);
            Eigen::Index d = 0;
            while (d < n && ++idx[static_cast<std::size_t>(d)] == grid) idx[static_cast<std::size_t>(d++)] = 0;
            if (d == n) break;
        }
        return pts;
    }
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::uniform_real_distribution<double> dist(spec.domain.min[static_cast<std::size_t>(i)],
                                                        spec.domain.max[static_cast<std::size_t>(i)]);
            u[i] = dist(rng);
        }
        pts.push_back(u);
    }
    return pts;
}

CommandResult cmd_sweep(const SurfaceSpec& spec, const Options& opts) {
    const auto start = Clock::now();
    const Immersion imm = spec.build();
    const int samples = opts.samples.value_or(50);
    if (samples < 0) throw UsageError("--samples must be non-negative");
    if (opts.grid < 0) throw UsageError("--grid must be non-negative");
    const ConvexityConfig cc = convexity_config(opts, opts.samples_per_radius);
    const ThetaConfig tc = theta_config(opts);

    nlohmann::json points = nlohmann::json::array();
    nlohmann::json failures = nlohmann::json::array();
    std::map<std::string, int> counts;
    int violations = 0;
    for (const Eigen::VectorXd& u : sweep_points(spec, samples, opts.grid, cc.seed)) {
        try {
            const PointCheck pc = check_point(imm, u, cc, tc);
            ++counts[pc.summary["verdict"].get<std::string>()];
            violations += static_cast<int>(pc.violations.size());
            points.push_back(pc.summary);
        } catch (const GeometryError& e) {
            failures.push_back({{"chart_point", to_json(u)}, {"error", e.what()}});
        } catch (const DomainError& e) {
            failures.push_back({{"chart_point", to_json(u)}, {"error", e.what()}});
        }
    }
    nlohmann::json count_json = nlohmann::json::object();
    for (const auto& [k, v] : counts) count_json[k] = v;

    nlohmann::json input = input_echo("sweep", spec, opts, cc);
    input["samples"] = samples;
    input["grid"] = opts.grid;
    CommandResult r;
    r.report = {{"tool_version", kToolVersion},
                {"input", input},
                {"points", points},
                {"summary",
                 {{"evaluated", points.size()},
                  {"classification_counts", count_json},
                  {"violations", violations},
                  {"failures", failures}}}};
    r.exit_code = violations > 0 ? kViolation : kOk;
    finish(r.report, start);
    return r;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Extrinsic geometry and H-convexity of parametrized submanifolds", "hconvex"};
    app.require_subcommand(1);

    Options opts;
    std::string point_text, radii_text;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool needs_point) {
        sub->add_option("--surface", opts.surface, "catalog name (name:params) or @config.json")->required();
        auto* p = sub->add_option("--point", point_text, "chart point, comma separated");
        if (needs_point) p->required();
        sub->add_option("--seed", seed, "random seed (default $HCONVEX_SEED or 0)");
        sub->add_option("--tol-eig", opts.tol_eig, "relative zero threshold for eigenvalues");
        sub->add_option("--format", opts.format, "json or text")->check(CLI::IsMember({"json", "text"}));
        sub->add_option("--output", opts.output, "write the report to this path");
    };

    int samples = 0;
    auto* analyze = app.add_subcommand("analyze", "point geometry and H-convexity verdict");
    add_common(analyze, true);
    analyze->add_option("--radii", radii_text, "sampling radii, descending, comma separated");
    analyze->add_option("--samples", samples, "samples per radius");

    auto* theta = app.add_subcommand("theta", "k-order Ricci curvatures");
    add_common(theta, true);
    theta->add_option("--k", opts.k, "k, k1-k2 or k1,k2,...");

    auto* chen = app.add_subcommand("chen", "Chen inequality margins");
    add_common(chen, true);
    chen->add_option("--k", opts.k, "k, k1-k2 or k1,k2,...");

    auto* sweep = app.add_subcommand("sweep", "invariant sweep over seeded or grid chart points");
    add_common(sweep, false);
    sweep->add_option("--samples", samples, "number of chart points");
    sweep->add_option("--grid", opts.grid, "grid points per axis (overrides --samples)");
    sweep->add_option("--samples-per-radius", opts.samples_per_radius, "samples per sampling radius");
    sweep->add_option("--radii", radii_text, "sampling radii, descending, comma separated");

    auto* list = app.add_subcommand("catalog", "list built-in surfaces");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    auto emit = [&](const nlohmann::json& report) {
        const std::string text = render(report, opts.format);
        if (opts.output.empty()) {
            out << text;
        } else {
            std::ofstream f(opts.output);
            if (!f) throw UsageError("cannot write '" + opts.output + "'");
            f << text;
        }
    };
    auto fail = [&](int code, const std::string& kind, const std::string& message) {
        if (opts.format == "json")
            out << dump_report({{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}});
        else
            err << "error: " << message << "\n";
        return code;
    };

    try {
        if (list->parsed()) {
            nlohmann::json names = nlohmann::json::array();
            for (const auto& s : catalog_names()) names.push_back(s);
            nlohmann::json specs = nlohmann::json::array();
            for (const auto& s : catalog()) specs.push_back(s.to_json());
            emit({{"tool_version", kToolVersion}, {"names", names}, {"defaults", specs}});
            return kOk;
        }
        CLI::App* active = app.get_subcommands().front();
        if (!point_text.empty()) opts.point = parse_list(point_text, "--point");
        if (!radii_text.empty()) opts.radii = parse_list(radii_text, "--radii");
        if (active->count("--seed") > 0) opts.seed = seed;
        if (const auto* o = active->get_option_no_throw("--samples"); o && o->count() > 0) opts.samples = samples;

        const SurfaceSpec spec = resolve_surface(opts.surface);
        CommandResult r;
        if (analyze->parsed())
            r = cmd_analyze(spec, opts);
        else if (theta->parsed())
            r = cmd_theta(spec, opts);
        else if (chen->parsed())
            r = cmd_chen(spec, opts);
        else
            r = cmd_sweep(spec, opts);
        emit(r.report);
        return r.exit_code;
    } catch (const UsageError& e) {
        return fail(kUsage, "usage", e.what());
    } catch (const ParseError& e) {
        return fail(kUsage, "usage", e.what());
    } catch (const GeometryError& e) {
        return fail(kGeometry, "geometry", e.what());
    } catch (const DomainError& e) {
        return fail(kGeometry, "geometry", e.what());
    }
}

}  // namespace hconvex::app
