#include "stringkern/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

using namespace stringkern;

int main(int argc, char** argv) {
    CLI::App app{"String-kernel elastostatic boundary integral experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one experiment described by a JSON config");
    std::string config_path, out_dir = ".", log_level = "warn";
    int threads = 1;
    bool deterministic = false;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));
    run->add_flag("--deterministic", deterministic, "Single-threaded, byte-stable output");
    run->add_option("--log-level", log_level, "warn or info")->check(CLI::IsMember({"warn", "info"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    set_num_threads(deterministic ? 1 : threads);
    set_progress_log(log_level == "info");

    try {
        const auto cfg = load_config(config_path);
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = run_experiment(cfg, out_dir);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& f : res.files) std::cout << f.string() << "\n";
        if (!res.message.empty()) std::cerr << res.message << "\n";
        if (log_level == "info") std::cerr << "elapsed " << secs << " s\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StringValidationError& e) {
        std::cerr << "string validation failed: " << e.what() << "\n";
        return kExitGeometry;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitGeometry;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
