// Command-line front end: simulate / track / compare / validate.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotrack/cotrack.hpp"

namespace {

void apply_seed_override(cotrack::RunConfig& cfg, std::optional<std::uint64_t> seed) {
    if (!seed) return;
    cfg.seed = *seed;
    if (cfg.scenario) cfg.scenario->seed = *seed;
}

std::filesystem::path resolve_out_dir(const cotrack::RunConfig& cfg,
                                      const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (cfg.out_dir) return *cfg.out_dir;
    throw cotrack::ValidationError("no output directory: pass --out or set output.dir");
}

int run_simulate(const std::string& config_path, const std::string& out_flag,
                 std::optional<std::uint64_t> seed) {
    auto cfg = cotrack::load_run_config(config_path);
    apply_seed_override(cfg, seed);
    if (!cfg.scenario)
        throw cotrack::ValidationError("simulate: config must contain an inline 'scenario'");
    const auto& sc = *cfg.scenario;

    cotrack::Trace trace;
    trace.deployment.aps = sc.aps;
    trace.deployment.c = sc.c;
    std::vector<cotrack::Trajectory> trajs;
    for (int ue = 0; ue < static_cast<int>(sc.ue_inits.size()); ++ue)
        trajs.push_back(cotrack::generate_trajectory(sc, ue));
    for (int t = 0; t < sc.steps; ++t)
        trace.steps.push_back(cotrack::generate_measurements(sc, trajs, t));
    trace.truth = std::move(trajs);

    const auto dir = resolve_out_dir(cfg, out_flag);
    cotrack::save_trace(dir, trace);
    std::cout << "wrote trace (" << sc.steps << " steps, " << sc.aps.size()
              << " APs) to " << dir.string() << "\n";
    return 0;
}

int run_track(const std::string& config_path, const std::string& out_flag,
              std::optional<std::uint64_t> seed, bool timing, bool diag_mixtures) {
    auto cfg = cotrack::load_run_config(config_path);
    apply_seed_override(cfg, seed);
    cotrack::RunOptions opts;
    opts.time_steps = timing;
    opts.log_mixtures = diag_mixtures;

    const auto out = cotrack::run_tracking(cfg, opts);
    const auto dir = resolve_out_dir(cfg, out_flag);
    cotrack::write_run_artifacts(out, dir);

    const auto summary = cotrack::summarize(out);
    std::cout << cotrack::metrics_to_json(summary).dump(2) << "\n";
    if (timing) {
        double total = 0.0;
        for (double us : out.step_wall_us) total += us;
        std::cout << "total tracking wall time: " << total / 1e6 << " s over "
                  << out.step_wall_us.size() << " steps\n";
    }
    std::cout << "artifacts written to " << dir.string() << "\n";
    return 0;
}

int run_compare(const std::vector<std::string>& config_paths, const std::string& out_flag,
                std::optional<std::uint64_t> seed, bool timing) {
    std::vector<cotrack::RunConfig> configs;
    for (const auto& path : config_paths) {
        configs.push_back(cotrack::load_run_config(path));
        apply_seed_override(configs.back(), seed);
    }
    if (out_flag.empty())
        throw cotrack::ValidationError("compare: --out is required");
    cotrack::RunOptions opts;
    opts.time_steps = timing;
    const auto cmp = cotrack::compare_runs(configs, opts);
    cotrack::write_compare_artifacts(cmp, out_flag);
    for (std::size_t i = 0; i < cmp.runs.size(); ++i)
        std::cout << cmp.runs[i].label << ": mean_rmse_m="
                  << cmp.summaries[i].mean_rmse_m
                  << " mean_active_aps=" << cmp.summaries[i].mean_active_aps << "\n";
    std::cout << "comparison written to " << out_flag << "\n";
    return 0;
}

int run_validate(const std::string& config_path) {
    const auto cfg = cotrack::load_run_config(config_path);
    if (cfg.trace_path) {
        const auto trace = cotrack::load_trace(*cfg.trace_path);
        for (const auto& step : trace.steps)
            for (const auto& [ap_id, list] : step.per_ap)
                for (const auto& m : list)
                    if (!cotrack::is_psd(m.cov))
                        throw cotrack::ValidationError(
                            "trace: measurement covariance not PSD (time_step " +
                            std::to_string(m.time_step) + ", ap " + std::to_string(ap_id) +
                            ", path " + std::to_string(m.path_id) + ")");
        std::cout << "trace ok: " << trace.steps.size() << " steps, "
                  << trace.deployment.aps.size() << " APs"
                  << (trace.truth ? ", ground truth present" : "") << "\n";
    }
    std::cout << "config ok: " << config_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative UE tracking for distributed sensing networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> config_paths;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool timing = false;
    bool diag_mixtures = false;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario and save it as a trace");
    sim->add_option("--config", config_path, "run config (JSON)")->required();
    sim->add_option("--out", out_dir, "output trace directory");
    sim->add_option("--seed", seed, "override the config seed");

    auto* track = app.add_subcommand("track", "run a tracker on a scenario or trace");
    track->add_option("--config", config_path, "run config (JSON)")->required();
    track->add_option("--out", out_dir, "output directory");
    track->add_option("--seed", seed, "override the config seed");
    track->add_flag("--timing", timing, "record per-step wall time (timing.csv)");
    track->add_flag("--diag-mixtures", diag_mixtures, "dump per-step mixtures (mixtures.jsonl)");

    auto* cmp = app.add_subcommand("compare", "run several configs on the same scenario realization");
    cmp->add_option("--config", config_paths, "run configs (repeatable)")->required();
    cmp->add_option("--out", out_dir, "output directory")->required();
    cmp->add_option("--seed", seed, "override all config seeds");
    cmp->add_flag("--timing", timing, "record per-step wall time");

    auto* val = app.add_subcommand("validate", "lint a config (and its trace, when present)");
    val->add_option("--config", config_path, "run config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, out_dir, seed);
        if (track->parsed()) return run_track(config_path, out_dir, seed, timing, diag_mixtures);
        if (cmp->parsed()) return run_compare(config_paths, out_dir, seed, timing);
        if (val->parsed()) return run_validate(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
