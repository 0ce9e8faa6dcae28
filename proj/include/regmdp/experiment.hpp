#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "regmdp/analysis.hpp"
#include "regmdp/environments.hpp"
#include "regmdp/io.hpp"
#include "regmdp/solvers.hpp"
#include "regmdp/version.hpp"

namespace regmdp {

struct EnvironmentConfig {
    enum class Type { kGridWorld, kRandomMdp, kFile };
    Type type = Type::kGridWorld;
    GridWorldConfig grid;
    int random_num_states = 5;
    int random_num_actions = 3;
    std::uint64_t random_seed = 0;
    double random_reward_scale = 1.0;
    double random_discount = 0.9;
    std::string file_path;
};

struct RunSpec {
    std::string name;
    Scheme scheme = Scheme::kMvi;
    double alpha = 0.02;
    double kappa = 0.99;
    BoundingFn f = BoundingFn::identity();
    BoundingFn g = BoundingFn::identity();
    PsiInit psi_init = PsiInit::uniform_v_tau_max();
    std::optional<NoiseConfig> noise;
    bool allow_invalid_bounding = false;
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool full_trace = false;  // "full" granularity also dumps per-iteration tables
};

struct ToleranceConfig {
    double value_tol = 1e-10;
    double convergence_tol = 1e-8;
    double divergence_ceiling_factor = 1e6;
};

struct ExperimentConfig {
    EnvironmentConfig environment;
    std::vector<RunSpec> runs;
    std::vector<std::uint64_t> seeds;
    int iterations = 500;
    OutputConfig outputs;
    ToleranceConfig tolerances;
};

// ---------------------------------------------------------------------------
// config parsing

inline EnvironmentConfig environment_from_json(const json& j) {
    using namespace io_detail;
    EnvironmentConfig env;
    const std::string type = field_string(j, "type", "environment");
    if (type == "gridworld") {
        env.type = EnvironmentConfig::Type::kGridWorld;
        env.grid.width = static_cast<int>(field_int_or(j, "width", 5, "environment"));
        env.grid.height = static_cast<int>(field_int_or(j, "height", 5, "environment"));
        env.grid.reward_top_right = field_double_or(j, "reward_top_right", 1.0, "environment");
        env.grid.reward_bottom_left = field_double_or(j, "reward_bottom_left", 1.0, "environment");
        env.grid.reward_bottom_right =
            field_double_or(j, "reward_bottom_right", 2.0, "environment");
        env.grid.slip_probability = field_double_or(j, "slip_probability", 0.1, "environment");
        env.grid.slip_excludes_attempted =
            field_bool_or(j, "slip_excludes_attempted", false, "environment");
        env.grid.discount = field_double_or(j, "discount", 0.99, "environment");
    } else if (type == "random_mdp") {
        env.type = EnvironmentConfig::Type::kRandomMdp;
        env.random_num_states = static_cast<int>(field_int(j, "num_states", "environment"));
        env.random_num_actions = static_cast<int>(field_int(j, "num_actions", "environment"));
        env.random_seed = static_cast<std::uint64_t>(field_int_or(j, "seed", 0, "environment"));
        env.random_reward_scale = field_double_or(j, "reward_scale", 1.0, "environment");
        env.random_discount = field_double_or(j, "discount", 0.9, "environment");
    } else if (type == "file") {
        env.type = EnvironmentConfig::Type::kFile;
        env.file_path = field_string(j, "path", "environment");
    } else {
        throw ConfigError("environment.type: unknown type '" + type + "'");
    }
    return env;
}

inline PsiInit psi_init_from_json(const json& j, const std::string& ctx) {
    using namespace io_detail;
    const std::string type = field_string(j, "type", ctx);
    if (type == "zeros") return PsiInit::zeros();
    if (type == "uniform") return PsiInit::uniform(field_double(j, "magnitude", ctx));
    if (type == "uniform_vtau") return PsiInit::uniform_v_tau_max();
    if (type == "table") {
        const json& values = require_field(j, "values", ctx);
        const json& shape = require_field(j, "shape", ctx);
        QTable t(static_cast<int>(shape.at(0).get<long>()),
                 static_cast<int>(shape.at(1).get<long>()));
        t.values = values.get<std::vector<double>>();
        if (t.values.size() != static_cast<std::size_t>(t.num_states) * t.num_actions)
            throw ConfigError(ctx + ".values: wrong length");
        return PsiInit::explicit_table(std::move(t));
    }
    throw ConfigError(ctx + ".type: unknown psi_init '" + type + "'");
}

inline ExperimentConfig experiment_from_json(const json& j) {
    using namespace io_detail;
    ExperimentConfig cfg;
    cfg.environment = environment_from_json(require_field(j, "environment", "config"));

    const json& runs = require_field(j, "runs", "config");
    if (!runs.is_array() || runs.empty()) throw ConfigError("config.runs: need at least one run");
    std::set<std::string> names;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string ctx = "runs[" + std::to_string(i) + "]";
        const json& rj = runs[i];
        RunSpec spec;
        spec.name = field_string(rj, "name", ctx);
        if (spec.name.empty()) throw ConfigError(ctx + ".name: must be non-empty");
        if (!names.insert(spec.name).second)
            throw ConfigError(ctx + ".name: duplicate run name '" + spec.name + "'");
        const std::string scheme = field_string(rj, "scheme", ctx);
        if (scheme == "mvi") spec.scheme = Scheme::kMvi;
        else if (scheme == "bal") spec.scheme = Scheme::kBal;
        else if (scheme == "mdvi_explicit") spec.scheme = Scheme::kMdviExplicit;
        else throw ConfigError(ctx + ".scheme: unknown scheme '" + scheme + "'");
        spec.alpha = field_double(rj, "alpha", ctx);
        spec.kappa = field_double(rj, "kappa", ctx);
        try {
            RegParams check(spec.alpha, spec.kappa);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
        if (rj.contains("f")) spec.f = bounding_from_json(rj.at("f"), ctx + ".f");
        if (rj.contains("g")) spec.g = bounding_from_json(rj.at("g"), ctx + ".g");
        if (rj.contains("psi_init"))
            spec.psi_init = psi_init_from_json(rj.at("psi_init"), ctx + ".psi_init");
        if (rj.contains("noise")) {
            const json& nj = rj.at("noise");
            NoiseConfig noise;
            const std::string dist = field_string(nj, "distribution", ctx + ".noise");
            if (dist == "uniform") noise.distribution = NoiseConfig::Distribution::kUniform;
            else if (dist == "gaussian") noise.distribution = NoiseConfig::Distribution::kGaussian;
            else throw ConfigError(ctx + ".noise.distribution: unknown distribution");
            noise.magnitude = field_double(nj, "magnitude", ctx + ".noise");
            noise.seed = static_cast<std::uint64_t>(field_int_or(nj, "seed", 0, ctx + ".noise"));
            spec.noise = noise;
        }
        spec.allow_invalid_bounding = field_bool_or(rj, "allow_invalid_bounding", false, ctx);
        cfg.runs.push_back(std::move(spec));
    }

    const json& seeds = require_field(j, "seeds", "config");
    if (!seeds.is_array() || seeds.empty())
        throw ConfigError("config.seeds: need at least one seed");
    for (const json& s : seeds) {
        if (!s.is_number_integer()) throw ConfigError("config.seeds: expected integers");
        cfg.seeds.push_back(static_cast<std::uint64_t>(s.get<long>()));
    }

    cfg.iterations = static_cast<int>(field_int(j, "iterations", "config"));
    if (cfg.iterations < 0) throw ConfigError("config.iterations: must be >= 0");

    if (j.contains("outputs")) {
        const json& oj = j.at("outputs");
        cfg.outputs.directory = oj.contains("directory")
                                    ? field_string(oj, "directory", "outputs")
                                    : cfg.outputs.directory;
        if (oj.contains("formats")) {
            cfg.outputs.csv = false;
            cfg.outputs.json = false;
            for (const json& f : oj.at("formats")) {
                const std::string fmt = f.get<std::string>();
                if (fmt == "csv") cfg.outputs.csv = true;
                else if (fmt == "json") cfg.outputs.json = true;
                else throw ConfigError("outputs.formats: unknown format '" + fmt + "'");
            }
        }
        if (oj.contains("trace")) {
            const std::string t = field_string(oj, "trace", "outputs");
            if (t == "summary") cfg.outputs.full_trace = false;
            else if (t == "full") cfg.outputs.full_trace = true;
            else throw ConfigError("outputs.trace: expected 'summary' or 'full'");
        }
    }
    if (j.contains("tolerances")) {
        const json& tj = j.at("tolerances");
        cfg.tolerances.value_tol = field_double_or(tj, "value_tol", 1e-10, "tolerances");
        cfg.tolerances.convergence_tol =
            field_double_or(tj, "convergence_tol", 1e-8, "tolerances");
        cfg.tolerances.divergence_ceiling_factor =
            field_double_or(tj, "divergence_ceiling_factor", 1e6, "tolerances");
    }
    return cfg;
}

inline json environment_to_json(const EnvironmentConfig& env) {
    switch (env.type) {
        case EnvironmentConfig::Type::kGridWorld:
            return {{"type", "gridworld"},
                    {"width", env.grid.width},
                    {"height", env.grid.height},
                    {"reward_top_right", env.grid.reward_top_right},
                    {"reward_bottom_left", env.grid.reward_bottom_left},
                    {"reward_bottom_right", env.grid.reward_bottom_right},
                    {"slip_probability", env.grid.slip_probability},
                    {"slip_excludes_attempted", env.grid.slip_excludes_attempted},
                    {"discount", env.grid.discount}};
        case EnvironmentConfig::Type::kRandomMdp:
            return {{"type", "random_mdp"},
                    {"num_states", env.random_num_states},
                    {"num_actions", env.random_num_actions},
                    {"seed", env.random_seed},
                    {"reward_scale", env.random_reward_scale},
                    {"discount", env.random_discount}};
        case EnvironmentConfig::Type::kFile: return {{"type", "file"}, {"path", env.file_path}};
    }
    return {};
}

inline json run_spec_to_json(const RunSpec& spec) {
    json j{{"name", spec.name},
           {"scheme", spec.scheme == Scheme::kMvi
                          ? "mvi"
                          : (spec.scheme == Scheme::kBal ? "bal" : "mdvi_explicit")},
           {"alpha", spec.alpha},
           {"kappa", spec.kappa},
           {"f", bounding_to_json(spec.f)},
           {"g", bounding_to_json(spec.g)},
           {"allow_invalid_bounding", spec.allow_invalid_bounding}};
    switch (spec.psi_init.kind) {
        case PsiInit::Kind::kZeros: j["psi_init"] = {{"type", "zeros"}}; break;
        case PsiInit::Kind::kUniform:
            j["psi_init"] = {{"type", "uniform"}, {"magnitude", spec.psi_init.magnitude}};
            break;
        case PsiInit::Kind::kUniformVTauMax: j["psi_init"] = {{"type", "uniform_vtau"}}; break;
        case PsiInit::Kind::kTable: j["psi_init"] = {{"type", "table"}}; break;
    }
    if (spec.noise) {
        j["noise"] = {{"distribution", spec.noise->distribution ==
                                               NoiseConfig::Distribution::kUniform
                                           ? "uniform"
                                           : "gaussian"},
                      {"magnitude", spec.noise->magnitude},
                      {"seed", spec.noise->seed}};
    }
    return j;
}

inline TabularMdp build_environment(const EnvironmentConfig& env) {
    switch (env.type) {
        case EnvironmentConfig::Type::kGridWorld: return build_gridworld(env.grid);
        case EnvironmentConfig::Type::kRandomMdp:
            return build_random_mdp(env.random_num_states, env.random_num_actions,
                                    env.random_seed, env.random_reward_scale,
                                    env.random_discount);
        case EnvironmentConfig::Type::kFile: return mdp_from_json(load_json_file(env.file_path));
    }
    throw ConfigError("environment: unknown type");
}

inline SolverConfig make_solver_config(const ExperimentConfig& cfg, const RunSpec& spec,
                                       std::uint64_t seed, bool store_tables) {
    SolverConfig sc;
    sc.scheme = spec.scheme;
    sc.params = RegParams(spec.alpha, spec.kappa);
    sc.f = spec.f;
    sc.g = spec.g;
    sc.iterations = cfg.iterations;
    sc.seed = seed;
    sc.noise = spec.noise;
    sc.psi_init = spec.psi_init;
    sc.record.store_tables = store_tables;
    sc.record.suboptimality = true;
    sc.allow_invalid_bounding = spec.allow_invalid_bounding;
    sc.divergence_ceiling_factor = cfg.tolerances.divergence_ceiling_factor;
    sc.value_tol = cfg.tolerances.value_tol;
    return sc;
}

// ---------------------------------------------------------------------------
// execution

namespace exp_detail {

struct TaskResult {
    std::string trace_csv;
    std::string tables_json;  // only for full granularity
    std::vector<double> subopt_raw;
    bool diverged = false;
};

inline std::string trace_to_csv(const std::string& run_name, std::uint64_t seed,
                                const RunTrace& trace) {
    std::ostringstream out;
    out << "run_name,seed,iteration,suboptimality,suboptimality_normalized,entropy_mean,"
           "kl_mean,condition_residual_min,gap_mean,diverged\n";
    const double base = !trace.records.empty() && trace.records[0].suboptimality > 0.0
                            ? trace.records[0].suboptimality
                            : 1.0;
    for (const IterationRecord& rec : trace.records) {
        out << run_name << ',' << seed << ',' << rec.iteration << ','
            << format_double(rec.suboptimality) << ','
            << format_double(rec.diverged ? std::numeric_limits<double>::quiet_NaN()
                                          : rec.suboptimality / base)
            << ',' << format_double(rec.entropy_mean) << ',' << format_double(rec.kl_mean) << ','
            << format_double(rec.condition_residual_min) << ',' << format_double(rec.gaps.mean_all)
            << ',' << (rec.diverged ? 1 : 0) << '\n';
    }
    return out.str();
}

inline std::string tables_to_json(const std::string& run_name, std::uint64_t seed,
                                  const RunTrace& trace) {
    json j;
    j["run_name"] = run_name;
    j["seed"] = seed;
    json iters = json::array();
    for (const IterationRecord& rec : trace.records) {
        json r;
        r["iteration"] = rec.iteration;
        r["diverged"] = rec.diverged;
        if (rec.psi)
            r["psi"] = {{"shape", {rec.psi->num_states, rec.psi->num_actions}},
                        {"data", rec.psi->values}};
        if (rec.pi)
            r["pi"] = {{"shape", {rec.pi->num_states, rec.pi->num_actions}},
                       {"data", rec.pi->probs}};
        if (rec.v) r["v"] = *rec.v;
        iters.push_back(std::move(r));
    }
    j["iterations"] = std::move(iters);
    return j.dump(2);
}

}  // namespace exp_detail

struct ExperimentResult {
    int exit_code = 0;
    bool any_diverged = false;
    std::string output_directory;
};

/// Executes the seeds x runs matrix, writing one trace CSV per (run, seed),
/// an IQM aggregate CSV, one bound/error report per run, and a manifest.
/// Workers parallelize over the matrix; all files are written by the
/// coordinating thread in a fixed order, so outputs are byte-identical for
/// identical configs regardless of the job count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 0) {
    namespace fs = std::filesystem;
    const TabularMdp mdp = build_environment(cfg.environment);

    // V*_tau per run (runs may differ in tau)
    std::vector<ValueVector> v_star_tau(cfg.runs.size());
    for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
        const RegParams params(cfg.runs[r].alpha, cfg.runs[r].kappa);
        v_star_tau[r] = soft_optimal_value(mdp, params.tau(), cfg.tolerances.value_tol);
    }

    const std::size_t n_tasks = cfg.runs.size() * cfg.seeds.size();
    std::vector<exp_detail::TaskResult> results(n_tasks);
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(n_tasks));

    std::atomic<std::size_t> next_task{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        for (;;) {
            const std::size_t t = next_task.fetch_add(1);
            if (t >= n_tasks || failed.load()) break;
            const std::size_t r = t / cfg.seeds.size();
            const std::size_t s = t % cfg.seeds.size();
            try {
                const SolverConfig sc =
                    make_solver_config(cfg, cfg.runs[r], cfg.seeds[s], cfg.outputs.full_trace);
                const RunTrace trace = run_scheme(mdp, sc, &v_star_tau[r]);
                exp_detail::TaskResult& res = results[t];
                res.trace_csv = exp_detail::trace_to_csv(cfg.runs[r].name, cfg.seeds[s], trace);
                if (cfg.outputs.full_trace)
                    res.tables_json =
                        exp_detail::tables_to_json(cfg.runs[r].name, cfg.seeds[s], trace);
                res.diverged = trace.diverged;
                for (const IterationRecord& rec : trace.records) {
                    if (rec.diverged) break;
                    res.subopt_raw.push_back(rec.suboptimality);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure_message.empty())
                    failure_message = "run '" + cfg.runs[r].name + "' seed " +
                                      std::to_string(cfg.seeds[s]) + ": " + e.what();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("run_experiment failed: " + failure_message);

    const fs::path out_dir = cfg.outputs.directory;
    fs::create_directories(out_dir / "traces");
    fs::create_directories(out_dir / "reports");

    bool any_diverged = false;
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const std::size_t r = t / cfg.seeds.size();
        const std::size_t s = t % cfg.seeds.size();
        const std::string stem = cfg.runs[r].name + "_seed" + std::to_string(cfg.seeds[s]);
        if (cfg.outputs.csv)
            write_text_file((out_dir / "traces" / (stem + ".csv")).string(),
                            results[t].trace_csv);
        if (cfg.outputs.full_trace && cfg.outputs.json)
            write_text_file((out_dir / "traces" / (stem + "_tables.json")).string(),
                            results[t].tables_json);
        any_diverged = any_diverged || results[t].diverged;
    }

    // aggregate: IQM of raw and normalized suboptimality per (run, iteration)
    if (cfg.outputs.csv) {
        std::ostringstream agg;
        agg << "run_name,iteration,n_seeds,iqm_suboptimality,iqm_suboptimality_normalized\n";
        for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
            std::size_t max_len = 0;
            for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
                max_len = std::max(max_len,
                                   results[r * cfg.seeds.size() + s].subopt_raw.size());
            for (std::size_t k = 0; k < max_len; ++k) {
                std::vector<double> raw, norm;
                for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
                    const auto& curve = results[r * cfg.seeds.size() + s].subopt_raw;
                    if (k < curve.size()) {
                        raw.push_back(curve[k]);
                        norm.push_back(curve[0] > 0.0 ? curve[k] / curve[0] : curve[k]);
                    }
                }
                agg << cfg.runs[r].name << ',' << k << ',' << raw.size() << ','
                    << format_double(iqm(raw)) << ',' << format_double(iqm(norm)) << '\n';
            }
        }
        write_text_file((out_dir / "aggregate.csv").string(), agg.str());
    }

    // per-run bound/error report on the first seed, rerun with stored tables
    if (cfg.outputs.json || cfg.outputs.csv) {
        for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
            const RunSpec& spec = cfg.runs[r];
            const RegParams params(spec.alpha, spec.kappa);
            const SolverConfig sc = make_solver_config(cfg, spec, cfg.seeds[0], true);
            const RunTrace trace = run_scheme(mdp, sc, &v_star_tau[r]);
            json report;
            report["run_name"] = spec.name;
            report["seed"] = cfg.seeds[0];
            report["alpha"] = spec.alpha;
            report["kappa"] = spec.kappa;
            report["tau"] = params.tau();
            report["lambda"] = params.lambda();
            report["diverged"] = trace.diverged;
            if (!trace.diverged) {
                const BoundingFn f_eff =
                    spec.scheme == Scheme::kMvi ? BoundingFn::identity() : spec.f;
                const BoundingFn g_eff =
                    spec.scheme == Scheme::kMvi ? BoundingFn::identity() : spec.g;
                const BoundReport bounds =
                    limit_bound_check(mdp, trace, params, f_eff, g_eff, 1e-6,
                                      cfg.tolerances.convergence_tol, cfg.tolerances.value_tol);
                report["converged"] = bounds.converged;
                report["bounds"] = {
                    {"c_f", std::isfinite(bounds.c_f) ? json(bounds.c_f) : json("inf")},
                    {"delta_bar_g", bounds.delta_bar_g},
                    {"bound_width",
                     std::isfinite(bounds.bound_width) ? json(bounds.bound_width) : json("inf")},
                    {"upper_satisfied", bounds.upper_satisfied},
                    {"lower_satisfied", bounds.lower_satisfied},
                    {"theorem3_lower_applicable", bounds.theorem3_lower_applicable},
                    {"theorem3_lower_satisfied", bounds.theorem3_lower_satisfied},
                    {"psi_upper_satisfied", bounds.psi_upper_satisfied},
                    {"psi_lower_satisfied", bounds.psi_lower_satisfied}};
                if (params.alpha() > 0.0) {
                    const TauOptimal opt =
                        compute_tau_optimal(mdp, params.tau(), cfg.tolerances.value_tol);
                    const ErrorTermReport terms =
                        error_terms(mdp, trace, params, f_eff, g_eff, opt.pi_star, opt.a_star_tau);
                    std::size_t premise_count = 0;
                    double max_xf = 0.0, max_xid = 0.0;
                    bool dominated = true;
                    for (std::size_t k = 0; k < terms.delta_xf.size(); ++k) {
                        max_xf = std::max(max_xf, terms.delta_xf[k]);
                        max_xid = std::max(max_xid, terms.delta_xid[k]);
                        if (terms.delta_xf[k] > terms.delta_xid[k] + 1e-12) dominated = false;
                        if (terms.premise_holds[k]) ++premise_count;
                    }
                    report["error_terms"] = {{"max_delta_xf", max_xf},
                                             {"max_delta_xid", max_xid},
                                             {"xf_dominated_by_identity", dominated},
                                             {"premise_iterations", premise_count}};
                    if (cfg.outputs.csv) {
                        std::ostringstream terms_csv;
                        terms_csv << "run_name,seed,iteration,delta_xf,delta_xid,delta_hg,"
                                     "delta_hid,delta_fg,premise_holds\n";
                        for (std::size_t k = 0; k < terms.delta_xf.size(); ++k) {
                            terms_csv << spec.name << ',' << cfg.seeds[0] << ',' << (k + 1) << ','
                                      << format_double(terms.delta_xf[k]) << ','
                                      << format_double(terms.delta_xid[k]) << ','
                                      << format_double(terms.delta_hg[k]) << ','
                                      << format_double(terms.delta_hid[k]) << ','
                                      << format_double(terms.delta_fg[k]) << ','
                                      << (terms.premise_holds[k] ? 1 : 0) << '\n';
                        }
                        write_text_file(
                            (out_dir / "reports" / (spec.name + "_error_terms.csv")).string(),
                            terms_csv.str());
                    }
                }
                double condition_min = std::numeric_limits<double>::infinity();
                bool has_condition = false;
                for (const IterationRecord& rec : trace.records) {
                    if (rec.iteration == 0 || rec.diverged) continue;
                    if (std::isnan(rec.condition_residual_min)) continue;
                    has_condition = true;
                    condition_min = std::min(condition_min, rec.condition_residual_min);
                }
                if (has_condition)
                    report["condition"] = {{"min_residual", condition_min},
                                      {"all_nonnegative", condition_min >= -1e-12}};
            }
            if (cfg.outputs.json)
                write_text_file((out_dir / "reports" / (spec.name + "_report.json")).string(),
                                report.dump(2) + "\n");
        }
    }

    // manifest: resolved config + tool version
    {
        json manifest;
        manifest["tool"] = "regmdp";
        manifest["version"] = kVersion;
        manifest["environment"] = environment_to_json(cfg.environment);
        json runs = json::array();
        for (const RunSpec& spec : cfg.runs) runs.push_back(run_spec_to_json(spec));
        manifest["runs"] = std::move(runs);
        manifest["seeds"] = cfg.seeds;
        manifest["iterations"] = cfg.iterations;
        manifest["outputs"] = {{"directory", cfg.outputs.directory},
                               {"csv", cfg.outputs.csv},
                               {"json", cfg.outputs.json},
                               {"trace", cfg.outputs.full_trace ? "full" : "summary"}};
        manifest["tolerances"] = {
            {"value_tol", cfg.tolerances.value_tol},
            {"convergence_tol", cfg.tolerances.convergence_tol},
            {"divergence_ceiling_factor", cfg.tolerances.divergence_ceiling_factor}};
        write_text_file((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    }

    ExperimentResult result;
    result.any_diverged = any_diverged;
    result.exit_code = any_diverged ? 2 : 0;
    result.output_directory = out_dir.string();
    return result;
}

/// Human-readable plan: the run matrix with derived coefficients, without
/// executing anything.
inline std::string describe(const ExperimentConfig& cfg) {
    const TabularMdp mdp = build_environment(cfg.environment);
    std::ostringstream out;
    out << "environment: " << environment_to_json(cfg.environment).dump() << "\n";
    out << "states: " << mdp.num_states << ", actions: " << mdp.num_actions
        << ", discount: " << format_short(mdp.discount) << ", r_max: "
        << format_short(mdp.r_max) << "\n";
    out << "seeds: " << cfg.seeds.size() << ", iterations per run: " << cfg.iterations << "\n";
    out << "runs (" << cfg.runs.size() << "):\n";
    for (const RunSpec& spec : cfg.runs) {
        const RegParams params(spec.alpha, spec.kappa);
        out << "  " << spec.name << ": scheme="
            << (spec.scheme == Scheme::kMvi
                    ? "mvi"
                    : (spec.scheme == Scheme::kBal ? "bal" : "mdvi_explicit"))
            << " alpha=" << format_short(spec.alpha) << " kappa=" << format_short(spec.kappa)
            << " tau=" << format_short(params.tau())
            << " lambda=" << format_short(params.lambda())
            << " v_tau_max=" << format_short(v_max(mdp, params.tau())) << " f=" << spec.f.name()
            << " g=" << spec.g.name() << "\n";
    }
    out << "total solver iterations: "
        << static_cast<long long>(cfg.runs.size()) * cfg.seeds.size() * cfg.iterations << "\n";
    return out.str();
}

}  // namespace regmdp
