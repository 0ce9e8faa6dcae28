// Batch experiment runner for the regularized-MDP dynamic-programming lab.
//
//   regmdp run <config.json> | --preset NAME   [--jobs N] [--out DIR]
//   regmdp describe <config.json> | --preset NAME
//   regmdp validate <config.json> | --preset NAME
//
// Exit codes: 0 success, 1 config error, 2 at least one run diverged
// (artifacts are still written). REGMDP_OUT_DIR overrides the output
// directory; REGMDP_PRESET_DIR adds a preset search location.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regmdp/regmdp.hpp"

namespace {

namespace fs = std::filesystem;

fs::path executable_dir() {
    std::error_code ec;
    const fs::path exe = fs::canonical("/proc/self/exe", ec);
    if (ec) return fs::current_path();
    return exe.parent_path();
}

std::string resolve_preset(const std::string& name) {
    std::vector<fs::path> candidates;
    if (const char* dir = std::getenv("REGMDP_PRESET_DIR"))
        candidates.push_back(fs::path(dir) / (name + ".json"));
    candidates.push_back(fs::path("presets") / (name + ".json"));
    candidates.push_back(executable_dir() / "presets" / (name + ".json"));
    candidates.push_back(executable_dir() / ".." / "presets" / (name + ".json"));
    for (const fs::path& p : candidates) {
        std::error_code ec;
        if (fs::exists(p, ec)) return p.string();
    }
    throw regmdp::ConfigError("preset '" + name + "' not found (searched REGMDP_PRESET_DIR, "
                              "./presets and the install presets directory)");
}

regmdp::ExperimentConfig load_config(const std::string& config_path, const std::string& preset) {
    std::string path = config_path;
    if (!preset.empty()) {
        if (!config_path.empty())
            throw regmdp::ConfigError("give either a config file or --preset, not both");
        path = resolve_preset(preset);
    }
    if (path.empty()) throw regmdp::ConfigError("no config file given (use a path or --preset)");
    return regmdp::experiment_from_json(regmdp::load_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regmdp - tabular KL-entropy-regularized dynamic-programming experiments"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    int jobs = 0;

    CLI::App* run = app.add_subcommand("run", "execute the seeds x runs matrix of a config");
    run->add_option("config", config_path, "experiment config file (JSON)");
    run->add_option("--preset", preset, "bundled preset name, e.g. gridworld-d1");
    run->add_option("--jobs", jobs, "worker threads (default: available cores)");
    run->add_option("--out", out_dir, "override the output directory");

    std::string d_config, d_preset;
    CLI::App* desc = app.add_subcommand("describe", "print the resolved run plan, do not execute");
    desc->add_option("config", d_config, "experiment config file (JSON)");
    desc->add_option("--preset", d_preset, "bundled preset name");

    std::string v_config, v_preset;
    CLI::App* val = app.add_subcommand("validate", "parse and validate a config");
    val->add_option("config", v_config, "experiment config file (JSON)");
    val->add_option("--preset", v_preset, "bundled preset name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            regmdp::ExperimentConfig cfg = load_config(config_path, preset);
            if (const char* env_out = std::getenv("REGMDP_OUT_DIR"))
                cfg.outputs.directory = env_out;
            if (!out_dir.empty()) cfg.outputs.directory = out_dir;
            const regmdp::ExperimentResult result = regmdp::run_experiment(cfg, jobs);
            std::cout << "wrote " << result.output_directory
                      << (result.any_diverged ? " (with divergent runs)" : "") << "\n";
            return result.exit_code;
        }
        if (desc->parsed()) {
            std::cout << regmdp::describe(load_config(d_config, d_preset));
            return 0;
        }
        if (val->parsed()) {
            load_config(v_config, v_preset);
            std::cout << "config ok\n";
            return 0;
        }
    } catch (const regmdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
