#include "stringkern/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <cstring>

namespace stringkern {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"solve2d",          "convergence2d", "cond_sweep_h", "cond_sweep_lambda",
                                         "cond_orientation", "jump_test",     "verify3d"};

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double get_number(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": must be finite");
    return d;
}

int get_int(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

// Number or the string "inf".
double get_lambda(const json& v, const std::string& where) {
    if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw ConfigError(where + ": expected a number or \"inf\"");
    const double d = v.get<double>();
    if (!std::isfinite(d) || d < 0.0) throw ConfigError(where + ": must be >= 0");
    return d;
}

json lambda_json(double l) { return std::isinf(l) ? json("inf") : json(l); }

std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void positive(double v, const std::string& what) {
    if (!(v > 0.0)) throw ConfigError(what + ": must be positive");
}

StringConfig parse_strings(const json& j, const std::string& where) {
    require_keys(j, {"mode", "h", "waypoints"}, where);
    StringConfig s;
    if (j.contains("mode")) s.mode = get_string(j, "mode", where);
    if (s.mode != "normal" && s.mode != "radial" && s.mode != "polyline")
        throw ConfigError(where + ".mode: expected normal, radial or polyline");
    if (j.contains("h")) s.h = get_number(j, "h", where);
    positive(s.h, where + ".h");
    if (j.contains("waypoints")) {
        const auto& w = j.at("waypoints");
        if (!w.is_array()) throw ConfigError(where + ".waypoints: expected an array of [x, y]");
        for (const auto& p : w) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ConfigError(where + ".waypoints: expected [x, y] pairs");
            s.waypoints.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    }
    if (s.mode == "polyline" && s.waypoints.empty()) throw ConfigError(where + ": polyline needs waypoints");
    return s;
}

json strings_json(const StringConfig& s) {
    json w = json::array();
    for (const auto& p : s.waypoints) w.push_back({p.x(), p.y()});
    return {{"mode", s.mode}, {"h", s.h}, {"waypoints", w}};
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const json& config, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << "# config: " << config.dump() << "\n";
        row(columns);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

bool g_progress = false;

void log(const std::string& msg) {
    if (g_progress) std::clog << "[stringkern] " << msg << std::endl;
}

std::vector<PointSource> make_sources(const ExperimentConfig& cfg, const Curve& curve) {
    const auto& s = cfg.sources;
    if (s.kind == "scaled_curve") return sources_on_scaled_curve(curve, s.count, s.radius_factor, cfg.seed);
    const double R = curve.max_radius();
    return sources_in_annulus(s.count, s.r_lo * R, s.r_hi * R, cfg.seed);
}

ElasticParams params_of(const ExperimentConfig& cfg) { return {cfg.lambda, cfg.mu}; }

DenseSystem scaled_deflated(const Panelization& p, const StringRule& rule) {
    return l2_scale(deflate(assemble(p, make_strings(p, rule)), p));
}

// Interior targets valid for every panel count in [lo, hi].
std::vector<Vec2> common_targets(const Curve& curve, int lo, int hi, int order, int count) {
    const auto coarse = build_panels(curve, lo, order);
    const auto fine = build_panels(curve, hi, order);
    std::vector<Vec2> out;
    for (const auto& x : interior_grid(coarse, count))
        if (point_in_domain(fine, x) == Location::inside) out.push_back(x);
    return out;
}

RunResult run_solve2d(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto run = manufactured_run(cfg, cfg.panels);
    RunResult res;
    const auto& p = run.panels;
    {
        const auto path = dir / (cfg.output + "_density.csv");
        CsvWriter w(path, cfg.resolved, {"node", "x", "y", "rho1", "rho2"});
        for (std::size_t i = 0; i < p.size(); ++i)
            w.row({std::to_string(i), fmt(p.pos[i].x()), fmt(p.pos[i].y()), fmt(run.solve.rho(2 * i)),
                   fmt(run.solve.rho(2 * i + 1))});
        res.files.push_back(path);
    }
    {
        const auto path = dir / (cfg.output + "_field.csv");
        CsvWriter w(path, cfg.resolved, {"x", "y", "u1", "u2", "residual"});
        const auto& u = run.u;
        for (std::size_t i = 0; i < run.targets.size(); ++i)
            w.row({fmt(run.targets[i].x()), fmt(run.targets[i].y()), fmt(u[i].x()), fmt(u[i].y()),
                   fmt(run.fit.residuals[i])});
        res.files.push_back(path);
    }
    {
        const auto path = dir / (cfg.output + "_summary.csv");
        CsvWriter w(path, cfg.resolved,
                    {"n_panels", "n_nodes", "n_iter", "gmres_residual", "n_targets", "max_rel_residual"});
        w.row({std::to_string(cfg.panels), std::to_string(p.size()), std::to_string(run.solve.iters),
               fmt(run.solve.residual), std::to_string(run.targets.size()), fmt(run.fit.max_residual())});
        res.files.push_back(path);
    }
    std::ostringstream msg;
    msg << "solve2d: " << p.size() << " nodes, " << run.solve.iters << " iterations, max residual "
        << run.fit.max_residual();
    res.message = msg.str();
    if (run.solve.status != GmresStatus::converged) {
        res.exit_code = kExitNoConvergence;
        res.message += " (GMRES did not converge)";
    }
    return res;
}

RunResult run_convergence(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::vector<int> levels = cfg.panels_list;
    if (cfg.until > 0.0) {
        levels.resize(1);
        while (levels.back() * 2 <= cfg.max_panels) levels.push_back(levels.back() * 2);
    }
    const Curve curve = make_curve(cfg.geometry);
    const auto targets = common_targets(curve, levels.front(), levels.back(), cfg.order, cfg.targets);
    RunResult res;
    const auto path = dir / (cfg.output + ".csv");
    CsvWriter w(path, cfg.resolved, {"n_panels", "n_nodes", "n_iter", "max_rel_residual", "implied_order"});
    double prev_err = 0.0;
    int prev_n = 0;
    bool reached = cfg.until <= 0.0;
    for (int n : levels) {
        const auto run = manufactured_run(cfg, n, &targets);
        const double err = run.fit.max_residual();
        std::string order;
        if (prev_n > 0 && err > 0.0 && prev_err > 0.0)
            order = fmt(std::log(prev_err / err) / std::log(static_cast<double>(n) / prev_n));
        w.row({std::to_string(n), std::to_string(run.panels.size()), std::to_string(run.solve.iters), fmt(err), order});
        log("convergence2d: " + std::to_string(n) + " panels, residual " + fmt(err));
        if (run.solve.status != GmresStatus::converged) {
            res.exit_code = kExitNoConvergence;
            res.message = "GMRES did not converge at " + std::to_string(n) + " panels";
            break;
        }
        prev_err = err;
        prev_n = n;
        if (cfg.until > 0.0 && err <= cfg.until) {
            reached = true;
            break;
        }
    }
    res.files.push_back(path);
    if (!reached && res.exit_code == kExitOk) {
        res.exit_code = kExitNoConvergence;
        res.message = "residual target not reached by " + std::to_string(levels.back()) + " panels";
    }
    return res;
}

RunResult run_cond_h(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto p = build_panels(make_curve(cfg.geometry), cfg.panels, cfg.order);
    RunResult res;
    const auto path = dir / (cfg.output + ".csv");
    CsvWriter w(path, cfg.resolved, {"mode", "h", "n_nodes", "valid", "cond"});
    for (const auto& mode : cfg.modes)
        for (double h : cfg.h_list) {
            StringConfig sc = cfg.strings;
            sc.mode = mode;
            sc.h = h;
            try {
                const double c = condition_number(scaled_deflated(p, make_rule(sc)).A);
                w.row({mode, fmt(h), std::to_string(p.size()), "1", fmt(c)});
                log("cond_sweep_h: " + mode + " h=" + fmt(h) + " cond=" + fmt(c));
            } catch (const StringValidationError&) {
                w.row({mode, fmt(h), std::to_string(p.size()), "0", ""});
            }
        }
    res.files.push_back(path);
    return res;
}

RunResult run_cond_lambda(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const Curve curve = make_curve(cfg.geometry);
    const auto p = build_panels(curve, cfg.panels, cfg.order);
    const auto strings = make_strings(p, make_rule(cfg.strings));
    const auto m = manufacture(p, make_sources(cfg, curve), params_of(cfg));
    RunResult res;
    const auto path = dir / (cfg.output + ".csv");
    CsvWriter w(path, cfg.resolved, {"lambda", "alpha", "cond", "n_iter", "identical"});
    DenseMatrix first;
    bool all_identical = true;
    for (double lam : cfg.lambda_list) {
        const ElasticParams params(lam, cfg.mu);
        // The operator has no elastic parameters; assemble afresh for each to check.
        DenseSystem s = deflate(assemble(p, strings), p);
        bool identical = true;
        if (first.size() == 0) {
            first = s.A;
        } else {
            identical = first.rows() == s.A.rows() &&
                        std::equal(first.data(), first.data() + first.size(), s.A.data(),
                                   [](double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; });
        }
        all_identical = all_identical && identical;
        const auto sol = solve(s, p, m.f, cfg.gmres_tol, cfg.max_iter);
        const double c = condition_number(l2_scale(std::move(s)).A);
        w.row({std::isinf(lam) ? "inf" : fmt(lam), fmt(params.alpha()), fmt(c), std::to_string(sol.iters),
               identical ? "1" : "0"});
        if (sol.status != GmresStatus::converged) res.exit_code = kExitNoConvergence;
    }
    res.files.push_back(path);
    if (!all_identical) {
        res.exit_code = kExitFailure;
        res.message = "assembled matrices differ between lambda values";
    }
    return res;
}

RunResult run_cond_orientation(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const Curve curve = make_curve(cfg.geometry);
    const auto p = build_panels(curve, cfg.panels, cfg.order);
    const auto m = manufacture(p, make_sources(cfg, curve), params_of(cfg));
    RunResult res;
    const auto path = dir / (cfg.output + ".csv");
    CsvWriter w(path, cfg.resolved, {"mode", "h", "n_nodes", "cond", "n_iter"});
    for (const auto& sc : cfg.orientations) {
        DenseSystem s = deflate(assemble(p, make_strings(p, make_rule(sc))), p);
        const auto sol = solve(s, p, m.f, cfg.gmres_tol, cfg.max_iter);
        const double c = condition_number(l2_scale(std::move(s)).A);
        w.row({sc.mode, fmt(sc.h), std::to_string(p.size()), fmt(c), std::to_string(sol.iters)});
        if (sol.status != GmresStatus::converged) res.exit_code = kExitNoConvergence;
    }
    res.files.push_back(path);
    return res;
}

RunResult run_jump(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto p = build_panels(make_curve(cfg.geometry), cfg.panels, cfg.order);
    const StringRule rule = make_rule(cfg.strings);
    const DenseSystem s = assemble(p, make_strings(p, rule));
    Vector rho(2 * p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = p.t[i];
        rho(2 * i) = std::cos(t) + 0.5 * std::sin(2.0 * t);
        rho(2 * i + 1) = 0.3 + std::sin(3.0 * t);
    }
    Vector onsurf;
    matvec(s.A, rho, onsurf);
    RunResult res;
    const auto path = dir / (cfg.output + ".csv");
    CsvWriter w(path, cfg.resolved, {"node", "t", "delta", "t1", "t2", "error", "order"});
    for (int k = 0; k < cfg.test_nodes; ++k) {
        const std::size_t i = static_cast<std::size_t>((k + 0.5) * p.size() / cfg.test_nodes);
        const Vec2 target(onsurf(2 * i), onsurf(2 * i + 1));
        double prev = 0.0, prev_d = 0.0;
        for (double d : cfg.deltas) {
            const Vec2 t = offsurface_traction(rho, p, rule, i, d);
            const double err = (t - target).norm();
            const std::string order = prev_d > 0.0 ? fmt(std::log(prev / err) / std::log(prev_d / d)) : "";
            w.row({std::to_string(i), fmt(p.t[i]), fmt(d), fmt(t.x()), fmt(t.y()), fmt(err), order});
            prev = err;
            prev_d = d;
        }
    }
    res.files.push_back(path);
    return res;
}

RunResult run_verify3d(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::vector<ElasticParams> params;
    if (cfg.lambda_list.empty())
        params.emplace_back(cfg.lambda, cfg.mu);
    else
        for (double l : cfg.lambda_list) params.emplace_back(l, cfg.mu);
    SuiteOptions opt;
    opt.h = cfg.strings.h;
    const auto reports = run_suite(cfg.seed, params, opt);
    json doc;
    doc["config"] = cfg.resolved;
    doc["reports"] = json::parse(reports_json(reports));
    RunResult res;
    const auto path = dir / (cfg.output + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
    res.files.push_back(path);
    int failed = 0;
    for (const auto& r : reports) failed += !r.pass;
    res.message = "verify3d: " + std::to_string(reports.size() - failed) + "/" + std::to_string(reports.size()) +
                  " checks pass";
    return res;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    const std::string top = "config";
    require_keys(j,
                 {"command", "geometry", "panels", "order", "panels_list", "until", "max_panels", "strings", "h_list",
                  "modes", "orientations", "lambda", "mu", "lambda_list", "sources", "seed", "gmres_tol", "max_iter",
                  "targets", "deltas", "test_nodes", "output"},
                 top);
    ExperimentConfig c;
    if (!j.contains("command")) throw ConfigError("config.command: required");
    c.command = get_string(j, "command", top);
    if (!kCommands.count(c.command)) throw ConfigError("config.command: unknown command '" + c.command + "'");
    const bool is3d = c.command == "verify3d";

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }

    auto& g = c.geometry;
    g.seed = c.seed;
    if (j.contains("geometry")) {
        const auto& gj = j.at("geometry");
        const std::string where = "config.geometry";
        if (!gj.is_object() || !gj.contains("kind")) throw ConfigError(where + ".kind: required");
        g.kind = get_string(gj, "kind", where);
        if (g.kind == "circle") {
            require_keys(gj, {"kind", "radius"}, where);
            if (gj.contains("radius")) g.radius = get_number(gj, "radius", where);
            positive(g.radius, where + ".radius");
        } else if (g.kind == "star") {
            require_keys(gj, {"kind"}, where);
        } else if (g.kind == "fourier") {
            require_keys(gj, {"kind", "base", "a", "b"}, where);
            if (gj.contains("base")) g.base = get_number(gj, "base", where);
            if (gj.contains("a")) g.a = get_numbers(gj, "a", where);
            if (gj.contains("b")) g.b = get_numbers(gj, "b", where);
        } else if (g.kind == "cavity") {
            require_keys(gj, {"kind", "a", "b", "zeta"}, where);
            if (gj.contains("a")) g.cavity_a = get_number(gj, "a", where);
            if (gj.contains("b")) g.cavity_b = get_number(gj, "b", where);
            if (gj.contains("zeta")) g.zeta = get_number(gj, "zeta", where);
        } else if (g.kind == "random_star") {
            require_keys(gj, {"kind", "seed", "modes", "amplitude"}, where);
            if (gj.contains("seed")) {
                if (!gj.at("seed").is_number_unsigned()) throw ConfigError(where + ".seed: expected a non-negative integer");
                g.seed = gj.at("seed").get<std::uint64_t>();
            }
            if (gj.contains("modes")) g.modes = get_int(gj, "modes", where);
            if (gj.contains("amplitude")) g.amplitude = get_number(gj, "amplitude", where);
            if (g.modes < 1 || g.modes > 200) throw ConfigError(where + ".modes: must be in [1, 200]");
        } else {
            throw ConfigError(where + ".kind: unknown geometry '" + g.kind + "'");
        }
    }

    if (j.contains("panels")) c.panels = get_int(j, "panels", top);
    if (j.contains("order")) c.order = get_int(j, "order", top);
    if (c.panels < 4 || c.panels > 4096) throw ConfigError("config.panels: must be in [4, 4096]");
    if (c.order < 4 || c.order > 32) throw ConfigError("config.order: must be in [4, 32]");
    if (j.contains("panels_list")) {
        for (double v : get_numbers(j, "panels_list", top)) {
            if (v != std::floor(v) || v < 4 || v > 4096) throw ConfigError("config.panels_list: integers in [4, 4096]");
            c.panels_list.push_back(static_cast<int>(v));
        }
    } else {
        c.panels_list = {15, 30, 60};
    }
    if (!std::is_sorted(c.panels_list.begin(), c.panels_list.end()))
        throw ConfigError("config.panels_list: must be increasing");
    if (j.contains("until")) c.until = get_number(j, "until", top);
    if (c.until < 0.0) throw ConfigError("config.until: must be >= 0");
    if (j.contains("max_panels")) c.max_panels = get_int(j, "max_panels", top);
    if (c.max_panels < c.panels_list.front() || c.max_panels > 4096)
        throw ConfigError("config.max_panels: must be in [first panel count, 4096]");

    if (j.contains("strings")) c.strings = parse_strings(j.at("strings"), "config.strings");
    if (is3d && !(j.contains("strings") && j.at("strings").contains("h"))) c.strings.h = 0.25;

    if (j.contains("h_list")) {
        c.h_list = get_numbers(j, "h_list", top);
        for (double h : c.h_list) positive(h, "config.h_list");
    } else {
        c.h_list = {0.01, 0.05, 0.1, 0.25, 0.5};
    }
    if (j.contains("modes")) {
        const auto& m = j.at("modes");
        if (!m.is_array() || m.empty()) throw ConfigError("config.modes: expected a non-empty array");
        for (const auto& e : m) {
            if (!e.is_string() || (e != "normal" && e != "radial"))
                throw ConfigError("config.modes: entries must be normal or radial");
            c.modes.push_back(e.get<std::string>());
        }
    } else {
        c.modes = {"normal", "radial"};
    }
    if (j.contains("orientations")) {
        const auto& o = j.at("orientations");
        if (!o.is_array() || o.empty()) throw ConfigError("config.orientations: expected a non-empty array");
        for (std::size_t i = 0; i < o.size(); ++i)
            c.orientations.push_back(parse_strings(o[i], "config.orientations[" + std::to_string(i) + "]"));
    } else {
        c.orientations = {{"normal", 0.1, {}}, {"radial", 1.5, {}}};
    }

    if (j.contains("lambda"))
        c.lambda = get_lambda(j.at("lambda"), "config.lambda");
    else if (is3d)
        c.lambda = 1.0;
    if (j.contains("mu")) c.mu = get_number(j, "mu", top);
    positive(c.mu, "config.mu");
    if (j.contains("lambda_list")) {
        const auto& l = j.at("lambda_list");
        if (!l.is_array() || l.empty()) throw ConfigError("config.lambda_list: expected a non-empty array");
        for (std::size_t i = 0; i < l.size(); ++i)
            c.lambda_list.push_back(get_lambda(l[i], "config.lambda_list[" + std::to_string(i) + "]"));
    } else if (c.command == "cond_sweep_lambda") {
        c.lambda_list = {1.0, 1e3, 1e8, std::numeric_limits<double>::infinity()};
    }

    auto& s = c.sources;
    const bool star_like = g.kind == "star" || g.kind == "circle" || g.kind == "fourier";
    s.kind = star_like ? "scaled_curve" : "annulus";
    if (g.kind == "random_star") s.count = 200;
    if (j.contains("sources")) {
        const auto& sj = j.at("sources");
        const std::string where = "config.sources";
        require_keys(sj, {"kind", "count", "radius_factor", "r_lo", "r_hi"}, where);
        if (sj.contains("kind")) s.kind = get_string(sj, "kind", where);
        if (s.kind != "scaled_curve" && s.kind != "annulus")
            throw ConfigError(where + ".kind: expected scaled_curve or annulus");
        if (sj.contains("count")) s.count = get_int(sj, "count", where);
        if (sj.contains("radius_factor")) s.radius_factor = get_number(sj, "radius_factor", where);
        if (sj.contains("r_lo")) s.r_lo = get_number(sj, "r_lo", where);
        if (sj.contains("r_hi")) s.r_hi = get_number(sj, "r_hi", where);
    }
    if (s.count < 1 || s.count > 100000) throw ConfigError("config.sources.count: must be in [1, 100000]");
    if (!(s.radius_factor > 1.0)) throw ConfigError("config.sources.radius_factor: must exceed 1");
    if (!(s.r_lo > 1.0) || !(s.r_hi >= s.r_lo)) throw ConfigError("config.sources: need 1 < r_lo <= r_hi");

    if (j.contains("gmres_tol")) c.gmres_tol = get_number(j, "gmres_tol", top);
    if (!(c.gmres_tol > 0.0) || c.gmres_tol >= 1.0) throw ConfigError("config.gmres_tol: must be in (0, 1)");
    if (j.contains("max_iter")) c.max_iter = get_int(j, "max_iter", top);
    if (c.max_iter < 1) throw ConfigError("config.max_iter: must be >= 1");
    if (j.contains("targets")) c.targets = get_int(j, "targets", top);
    if (c.targets < 3 || c.targets > 1000000) throw ConfigError("config.targets: must be in [3, 1000000]");
    if (j.contains("deltas")) {
        c.deltas = get_numbers(j, "deltas", top);
        for (double d : c.deltas) positive(d, "config.deltas");
    } else {
        c.deltas = {1e-2, 1e-3, 1e-4};
    }
    if (j.contains("test_nodes")) c.test_nodes = get_int(j, "test_nodes", top);
    if (c.test_nodes < 1) throw ConfigError("config.test_nodes: must be >= 1");
    c.output = c.command;
    if (j.contains("output")) c.output = get_string(j, "output", top);
    if (c.output.empty() || c.output.find_first_of("/\\") != std::string::npos)
        throw ConfigError("config.output: must be a plain file prefix");

    // Canonical resolved form.
    json r;
    r["command"] = c.command;
    json gj = {{"kind", g.kind}};
    if (g.kind == "circle") gj["radius"] = g.radius;
    if (g.kind == "fourier") gj.update({{"base", g.base}, {"a", g.a}, {"b", g.b}});
    if (g.kind == "cavity") gj.update({{"a", g.cavity_a}, {"b", g.cavity_b}, {"zeta", g.zeta}});
    if (g.kind == "random_star") gj.update({{"seed", g.seed}, {"modes", g.modes}, {"amplitude", g.amplitude}});
    r["geometry"] = gj;
    r["panels"] = c.panels;
    r["order"] = c.order;
    r["panels_list"] = c.panels_list;
    r["until"] = c.until;
    r["max_panels"] = c.max_panels;
    r["strings"] = strings_json(c.strings);
    r["h_list"] = c.h_list;
    r["modes"] = c.modes;
    json ol = json::array();
    for (const auto& o : c.orientations) ol.push_back(strings_json(o));
    r["orientations"] = ol;
    r["lambda"] = lambda_json(c.lambda);
    r["mu"] = c.mu;
    json ll = json::array();
    for (double l : c.lambda_list) ll.push_back(lambda_json(l));
    r["lambda_list"] = ll;
    r["sources"] = {{"kind", s.kind}, {"count", s.count}, {"radius_factor", s.radius_factor}, {"r_lo", s.r_lo},
                    {"r_hi", s.r_hi}};
    r["seed"] = c.seed;
    r["gmres_tol"] = c.gmres_tol;
    r["max_iter"] = c.max_iter;
    r["targets"] = c.targets;
    r["deltas"] = c.deltas;
    r["test_nodes"] = c.test_nodes;
    r["output"] = c.output;
    c.resolved = r;
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

Curve make_curve(const GeometryConfig& g) {
    if (g.kind == "circle") return Curve::circle(g.radius);
    if (g.kind == "star") return Curve::star();
    if (g.kind == "fourier") return Curve::fourier(g.base, g.a, g.b);
    if (g.kind == "cavity") return Curve::cavity(g.cavity_a, g.cavity_b, g.zeta);
    if (g.kind == "random_star") return Curve::random_star(g.seed, g.modes, g.amplitude);
    throw ConfigError("unknown geometry '" + g.kind + "'");
}

StringRule make_rule(const StringConfig& s) {
    if (s.mode == "normal") return StringRule::normal_rule(s.h);
    if (s.mode == "radial") return StringRule::radial_rule(s.h);
    return {StringMode::polyline, s.h, s.waypoints};
}

ManufacturedRun manufactured_run(const ExperimentConfig& cfg, int n_panels, const std::vector<Vec2>* targets) {
    const Curve curve = make_curve(cfg.geometry);
    const ElasticParams params = params_of(cfg);
    const StringRule rule = make_rule(cfg.strings);
    ManufacturedRun run;
    run.panels = build_panels(curve, n_panels, cfg.order);
    const auto& p = run.panels;
    const DenseSystem s = deflate(assemble(p, make_strings(p, rule)), p);
    const auto m = manufacture(p, make_sources(cfg, curve), params);
    run.solve = solve(s, p, m.f, cfg.gmres_tol, cfg.max_iter);
    run.targets = targets ? *targets : interior_grid(p, cfg.targets);
    run.u = eval_displacement(run.solve.rho, p, rule, params, run.targets);
    std::vector<Vec2> uex(run.targets.size());
    for (std::size_t i = 0; i < uex.size(); ++i) uex[i] = m.exact(run.targets[i]);
    run.fit = rigid_body_fit(uex, run.u, run.targets, p.centroid());
    return run;
}

void set_progress_log(bool enabled) { g_progress = enabled; }

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (cfg.command == "solve2d") return run_solve2d(cfg, out_dir);
    if (cfg.command == "convergence2d") return run_convergence(cfg, out_dir);
    if (cfg.command == "cond_sweep_h") return run_cond_h(cfg, out_dir);
    if (cfg.command == "cond_sweep_lambda") return run_cond_lambda(cfg, out_dir);
    if (cfg.command == "cond_orientation") return run_cond_orientation(cfg, out_dir);
    if (cfg.command == "jump_test") return run_jump(cfg, out_dir);
    if (cfg.command == "verify3d") return run_verify3d(cfg, out_dir);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace stringkern
