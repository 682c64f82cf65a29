#pragma once

#include "stringkern/bie2d.hpp"
#include "stringkern/verify3d.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace stringkern {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitGeometry = 3,
    kExitNoConvergence = 4,
};

struct GeometryConfig {
    std::string kind = "star";  // circle | star | fourier | cavity | random_star
    double radius = 1.0;        // circle
    double base = 1.0;          // fourier
    std::vector<double> a, b;   // fourier coefficients
    double cavity_a = 0.397, cavity_b = 8.02, zeta = 3.965;
    std::uint64_t seed = 1;     // random_star
    int modes = 25;
    double amplitude = 1.5;
};

struct StringConfig {
    std::string mode = "normal";  // normal | radial | polyline
    double h = 0.1;
    std::vector<Vec2> waypoints;
};

struct SourceConfig {
    std::string kind;             // scaled_curve | annulus; empty picks the geometry default
    int count = 3;
    double radius_factor = 2.0;   // scaled_curve
    double r_lo = 1.5, r_hi = 3.0;  // annulus, multiples of the curve's max radius
};

struct ExperimentConfig {
    std::string command;
    GeometryConfig geometry;
    int panels = 60;
    int order = 16;
    std::vector<int> panels_list;     // convergence2d
    double until = 0.0;               // convergence2d: keep doubling until residual <= until (0 = off)
    int max_panels = 1024;
    StringConfig strings;
    std::vector<double> h_list;       // cond_sweep_h
    std::vector<std::string> modes;   // cond_sweep_h
    std::vector<StringConfig> orientations;  // cond_orientation
    double lambda = 10.0, mu = 1.0;
    std::vector<double> lambda_list;  // cond_sweep_lambda; +inf allowed as "inf"
    SourceConfig sources;
    std::uint64_t seed = 1;
    double gmres_tol = 1e-10;
    int max_iter = 1000;
    int targets = 400;
    std::vector<double> deltas;       // jump_test
    int test_nodes = 10;              // jump_test
    std::string output;               // file prefix, defaults to command

    nlohmann::json resolved;          // canonical form with defaults filled
};

/// Schema-checked parse. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

Curve make_curve(const GeometryConfig& g);
StringRule make_rule(const StringConfig& s);

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    std::string message;
};

/// Progress messages on stderr (off by default).
void set_progress_log(bool enabled);

/// Executes one experiment and writes its outputs under out_dir.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Manufactured solve followed by the rigid-body-fitted interior residual.
struct ManufacturedRun {
    Panelization panels;
    SolveResult solve;
    std::vector<Vec2> targets;
    std::vector<Vec2> u;
    RigidFit fit;
};
ManufacturedRun manufactured_run(const ExperimentConfig& cfg, int n_panels, const std::vector<Vec2>* targets = nullptr);

}  // namespace stringkern
