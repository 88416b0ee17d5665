#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cotrack/ap_manager.hpp"
#include "cotrack/baseline.hpp"
#include "cotrack/config.hpp"
#include "cotrack/metrics.hpp"
#include "cotrack/phd.hpp"
#include "cotrack/scenario.hpp"
#include "cotrack/trace.hpp"

namespace cotrack {

struct RunDiagnostics {
    std::int64_t clamped_delays = 0;
    std::vector<int> empty_gamma_steps;  // fov_aware fallback fired
    std::vector<int> missed_estimate_steps;
};

struct RunOutput {
    std::string label;
    RunResult result;
    std::vector<std::vector<double>> weights; // parallel to result.estimates
    RunDiagnostics diag;
    std::vector<GaussianMixture> mixture_log; // filled when log_mixtures is set
    std::vector<double> step_wall_us;         // filled when time_steps is set
};

struct RunOptions {
    bool log_mixtures = false;
    bool time_steps = false;
};

struct MetricsSummary {
    double mean_rmse_m = std::numeric_limits<double>::quiet_NaN();
    double p50 = std::numeric_limits<double>::quiet_NaN();
    double p90 = std::numeric_limits<double>::quiet_NaN();
    double p95 = std::numeric_limits<double>::quiet_NaN();
    double mean_active_aps = 0.0;
    int missed_steps = 0;
};

namespace runner_detail {

struct ResolvedInputs {
    std::vector<APState> aps;
    double c = kSpeedOfLight;
    std::vector<StepMeasurements> steps;
    std::vector<Trajectory> truth; // may be empty (trace without ground truth)
    MotionModel motion;
    double lambda_c = 0.0;
    std::vector<UEInit> inits;
};

inline ResolvedInputs resolve_inputs(const RunConfig& cfg) {
    ResolvedInputs in;
    if (cfg.scenario) {
        const ScenarioConfig& sc = *cfg.scenario;
        validate_scenario(sc);
        in.aps = sc.aps;
        in.c = sc.c;
        for (int ue = 0; ue < static_cast<int>(sc.ue_inits.size()); ++ue)
            in.truth.push_back(generate_trajectory(sc, ue));
        in.steps.reserve(sc.steps);
        for (int t = 0; t < sc.steps; ++t)
            in.steps.push_back(generate_measurements(sc, in.truth, t));
        in.motion = cfg.filter.motion ? *cfg.filter.motion : sc.motion;
        if (cfg.filter.lambda_c) {
            in.lambda_c = *cfg.filter.lambda_c;
        } else if (sc.clutter_per_ap > 0.0) {
            in.lambda_c = sc.clutter_per_ap * static_cast<double>(sc.aps.size()) /
                          sc.clutter_region.volume();
        }
        in.inits = cfg.filter.init_states ? *cfg.filter.init_states : sc.ue_inits;
    } else {
        Trace trace = load_trace(*cfg.trace_path);
        in.aps = trace.deployment.aps;
        in.c = trace.deployment.c;
        in.steps = std::move(trace.steps);
        if (trace.truth) in.truth = std::move(*trace.truth);
        in.motion = *cfg.filter.motion; // presence validated at config load
        in.lambda_c = *cfg.filter.lambda_c;
        if (cfg.filter.init_states) {
            in.inits = *cfg.filter.init_states;
        } else if (!in.truth.empty()) {
            for (const auto& tr : in.truth) {
                if (tr.positions.empty()) continue;
                UEInit u;
                u.position = tr.positions.front();
                if (tr.velocities && !tr.velocities->empty())
                    u.velocity = tr.velocities->front();
                in.inits.push_back(u);
            }
        }
        if (in.inits.empty())
            throw ValidationError(
                "config: filter.init_states is required for a trace without ground truth");
    }
    validate_motion_model(in.motion);
    return in;
}

inline GaussianMixture initial_mixture(const ResolvedInputs& in, const FilterConfig& f) {
    const Eigen::Index dx = in.motion.state_dim();
    Eigen::VectorXd prior = f.prior_cov_diag;
    if (prior.size() == 0) prior = Eigen::VectorXd::Ones(dx);
    if (prior.size() != dx)
        throw ValidationError("config: filter.prior_cov_diag does not match the state dimension");
    GaussianMixture v;
    v.time_step = -1;
    for (const auto& init : in.inits) {
        GaussianComponent c;
        c.weight = f.init_weight;
        c.mean = Eigen::VectorXd::Zero(dx);
        c.mean.head<3>() = init.position;
        if (dx == 6) c.mean.tail<3>() = init.velocity;
        c.cov = prior.asDiagonal();
        v.components.push_back(std::move(c));
    }
    return v;
}

} // namespace runner_detail

/// Execute one tracking run: per step, predict, select the active APs from
/// the predicted states, transform and cluster the gated measurements, then
/// update / prune / merge (PHD) or associate / update (KF baseline).
inline RunOutput run_tracking(const RunConfig& cfg, const RunOptions& opts = {}) {
    using clock = std::chrono::steady_clock;
    runner_detail::ResolvedInputs in = runner_detail::resolve_inputs(cfg);
    const FilterConfig& f = cfg.filter;
    const UpdateParams params{f.p_d, in.lambda_c};
    const int T = static_cast<int>(in.steps.size());
    const Eigen::Index dx = in.motion.state_dim();

    std::map<int, const APState*> ap_by_id;
    for (const auto& ap : in.aps) ap_by_id[ap.id] = &ap;

    MeasurementBirthParams birth;
    if (f.birth.enabled) {
        birth.weight = f.birth.weight;
        birth.gate = f.birth.gate;
        Eigen::VectorXd d = f.birth.cov_diag;
        if (d.size() == 0) d = Eigen::VectorXd::Ones(dx);
        if (d.size() != dx)
            throw ValidationError("config: filter.birth.cov_diag does not match the state dimension");
        birth.cov = d.asDiagonal();
    }

    GaussianMixture v = runner_detail::initial_mixture(in, f);
    std::vector<KFTrack> tracks;
    if (cfg.tracker == TrackerKind::kf_nn) {
        for (std::size_t i = 0; i < v.components.size(); ++i)
            tracks.push_back({static_cast<int>(i), v.components[i].mean, v.components[i].cov});
    }
    const int extract_count =
        f.extract_count ? *f.extract_count : static_cast<int>(in.inits.size());

    RunOutput out;
    out.label = cfg.label;
    out.result.truth = in.truth;
    out.result.estimates.resize(T);
    out.result.active.resize(T);
    out.weights.resize(T);

    TransformDiagnostics transform_diag;
    ActiveSet gamma_prev;
    gamma_prev.time_step = -1;
    {
        // Algorithm start: Gamma_0 from the initialized states
        const auto init_states = extract_states(v, extract_count);
        gamma_prev = select_active(init_states, in.aps, cfg.policy, gamma_prev);
    }

    for (int t = 0; t < T; ++t) {
        const auto t0 = clock::now();

        // prediction
        std::vector<UEState> predicted;
        std::vector<KFTrack> pred_tracks;
        if (cfg.tracker == TrackerKind::phd) {
            v = predict(v, in.motion);
            v.time_step = t;
            predicted = extract_states(v, extract_count);
        } else {
            for (const auto& track : tracks) {
                KFTrack p = kf_predict(track, in.motion);
                predicted.push_back(state_from_mean(p.mean));
                pred_tracks.push_back(std::move(p));
            }
        }

        // AP handover
        bool fallback_used = false;
        ActiveSet gamma = select_active(predicted, in.aps, cfg.policy, gamma_prev, &fallback_used);
        gamma.time_step = t;
        if (fallback_used) out.diag.empty_gamma_steps.push_back(t);

        // measurement sharing: transform active APs' range-bearing
        // estimates, then fuse co-located ones into proxies
        std::map<int, MeasurementSet> per_ap;
        for (int id : gamma.ap_ids) {
            auto it = in.steps[t].per_ap.find(id);
            if (it == in.steps[t].per_ap.end()) continue;
            MeasurementSet set;
            set.time_step = t;
            for (const auto& rb : it->second)
                set.items.push_back(cubature_transform(rb, *ap_by_id.at(id), in.c, &transform_diag));
            per_ap.emplace(id, std::move(set));
        }
        MeasurementSet Z = gate_measurements(per_ap, gamma);
        Z.time_step = t;
        Z = cluster_proxy(Z, f.cluster_gate_m);

        // update + reduction + extraction
        std::vector<UEState>& est = out.result.estimates[t];
        std::vector<double>& est_w = out.weights[t];
        if (cfg.tracker == TrackerKind::phd) {
            GaussianMixture predicted_mix;
            if (f.birth.enabled) predicted_mix = v;
            v = update(v, Z, params);
            if (f.birth.enabled) v = add_measurement_births(v, predicted_mix, Z, birth);
            const double total_before = v.total_weight();
            v = prune(v, f.prune_threshold);
            if (f.renormalize_after_prune) {
                const double total_after = v.total_weight();
                if (total_after > 0.0)
                    for (auto& c : v.components) c.weight *= total_before / total_after;
            }
            v = merge(v, f.merge_threshold, f.max_components);
            for (std::size_t i : extract_indices(v, extract_count)) {
                est.push_back(state_from_mean(v.components[i].mean));
                est_w.push_back(v.components[i].weight);
            }
            if (opts.log_mixtures) out.mixture_log.push_back(v);
        } else {
            tracks = kf_step_all(tracks, Z, in.motion,
                                 f.kf_gate_m ? *f.kf_gate_m
                                             : std::numeric_limits<double>::infinity());
            for (const auto& track : tracks) {
                est.push_back(state_from_mean(track.mean));
                est_w.push_back(1.0);
            }
        }
        if (est.empty()) out.diag.missed_estimate_steps.push_back(t);

        out.result.active[t] = gamma;
        gamma_prev = std::move(gamma);

        if (opts.time_steps)
            out.step_wall_us.push_back(
                std::chrono::duration<double, std::micro>(clock::now() - t0).count());
    }
    out.diag.clamped_delays = transform_diag.clamped_delays;
    return out;
}

inline MetricsSummary summarize(const RunOutput& out) {
    MetricsSummary s;
    const auto stats = active_ap_stats(out.result);
    s.mean_active_aps = stats.mean;
    if (!out.result.truth.empty()) {
        const auto report = rms_trajectory_error(out.result);
        s.mean_rmse_m = report.mean;
        s.p50 = percentile(report.per_step, 0.50);
        s.p90 = percentile(report.per_step, 0.90);
        s.p95 = percentile(report.per_step, 0.95);
        s.missed_steps = report.missed_steps;
    } else {
        s.missed_steps = static_cast<int>(out.diag.missed_estimate_steps.size());
    }
    return s;
}

inline nlohmann::json metrics_to_json(const MetricsSummary& s) {
    nlohmann::json j;
    j["mean_rmse_m"] = s.mean_rmse_m;
    j["p50"] = s.p50;
    j["p90"] = s.p90;
    j["p95"] = s.p95;
    j["mean_active_aps"] = s.mean_active_aps;
    j["missed_steps"] = s.missed_steps;
    return j;
}

/// Write the artifacts of one run: estimates.csv, active_aps.csv,
/// metrics.json, diagnostics.json, and when ground truth is available
/// per_step.csv; optionally mixtures.jsonl and timing.csv.
inline void write_run_artifacts(const RunOutput& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string est = "time_step,ue_id,x,y,z,weight\n";
    for (std::size_t t = 0; t < out.result.estimates.size(); ++t)
        for (std::size_t i = 0; i < out.result.estimates[t].size(); ++i) {
            const auto& s = out.result.estimates[t][i];
            est += std::to_string(t) + "," + std::to_string(i) + "," +
                   format_double(s.position.x()) + "," + format_double(s.position.y()) + "," +
                   format_double(s.position.z()) + "," + format_double(out.weights[t][i]) + "\n";
        }
    write_text_file((dir / "estimates.csv").string(), est);

    std::string act = "time_step,ap_ids,count\n";
    for (const auto& a : out.result.active) {
        std::string ids;
        for (int id : a.ap_ids) ids += (ids.empty() ? "" : ",") + std::to_string(id);
        act += std::to_string(a.time_step) + ",\"" + ids + "\"," +
               std::to_string(a.ap_ids.size()) + "\n";
    }
    write_text_file((dir / "active_aps.csv").string(), act);

    const MetricsSummary summary = summarize(out);
    write_text_file((dir / "metrics.json").string(), metrics_to_json(summary).dump(2) + "\n");

    nlohmann::json diag;
    diag["clamped_delays"] = out.diag.clamped_delays;
    diag["empty_gamma_steps"] = out.diag.empty_gamma_steps;
    diag["missed_estimate_steps"] = out.diag.missed_estimate_steps;
    write_text_file((dir / "diagnostics.json").string(), diag.dump(2) + "\n");

    if (!out.result.truth.empty()) {
        const auto report = rms_trajectory_error(out.result);
        const auto stats = active_ap_stats(out.result);
        std::string per_step = "time_step,error_m,active_count\n";
        for (std::size_t t = 0; t < report.per_step.size(); ++t)
            per_step += std::to_string(t) + "," + format_double(report.per_step[t]) + "," +
                        std::to_string(stats.per_step[t]) + "\n";
        write_text_file((dir / "per_step.csv").string(), per_step);
    }

    if (!out.mixture_log.empty()) {
        std::string lines;
        for (const auto& mix : out.mixture_log) {
            nlohmann::json jm;
            jm["time_step"] = mix.time_step;
            jm["components"] = nlohmann::json::array();
            for (const auto& c : mix.components) {
                nlohmann::json jc;
                jc["weight"] = c.weight;
                jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
                std::vector<double> cov;
                for (Eigen::Index r = 0; r < c.cov.rows(); ++r)
                    for (Eigen::Index col = 0; col < c.cov.cols(); ++col)
                        cov.push_back(c.cov(r, col));
                jc["cov"] = cov;
                jm["components"].push_back(std::move(jc));
            }
            lines += jm.dump() + "\n";
        }
        write_text_file((dir / "mixtures.jsonl").string(), lines);
    }

    if (!out.step_wall_us.empty()) {
        std::string timing = "time_step,wall_us\n";
        for (std::size_t t = 0; t < out.step_wall_us.size(); ++t)
            timing += std::to_string(t) + "," + format_double(out.step_wall_us[t]) + "\n";
        write_text_file((dir / "timing.csv").string(), timing);
    }
}

struct CompareOutput {
    std::vector<RunOutput> runs;
    std::vector<MetricsSummary> summaries;
};

/// Run several configs against the identical scenario realization (the
/// seeds must match) and collect their metrics side by side.
inline CompareOutput compare_runs(const std::vector<RunConfig>& configs,
                                  const RunOptions& opts = {}) {
    if (configs.empty())
        throw ValidationError("compare: needs at least one config");
    for (const auto& cfg : configs)
        if (cfg.seed != configs.front().seed)
            throw ValidationError("compare: configs must share the scenario seed");
    CompareOutput out;
    for (const auto& cfg : configs) {
        out.runs.push_back(run_tracking(cfg, opts));
        out.summaries.push_back(summarize(out.runs.back()));
    }
    return out;
}

/// Write per-run artifacts plus comparison.json and a long-format CDF table.
inline void write_compare_artifacts(const CompareOutput& cmp,
                                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["runs"] = nlohmann::json::array();
    j["deltas_vs_first"] = nlohmann::json::array();
    std::string cdf_csv = "config,error_m,cum_frac\n";
    for (std::size_t i = 0; i < cmp.runs.size(); ++i) {
        const auto& run = cmp.runs[i];
        std::string label = run.label;
        for (std::size_t k = 0; k < i; ++k)
            if (cmp.runs[k].label == run.label) {
                label += "_" + std::to_string(i);
                break;
            }
        write_run_artifacts(run, dir / label);

        nlohmann::json jr = metrics_to_json(cmp.summaries[i]);
        jr["label"] = label;
        j["runs"].push_back(jr);

        nlohmann::json jd;
        jd["label"] = label;
        jd["d_mean_rmse_m"] = cmp.summaries[i].mean_rmse_m - cmp.summaries[0].mean_rmse_m;
        jd["d_mean_active_aps"] =
            cmp.summaries[i].mean_active_aps - cmp.summaries[0].mean_active_aps;
        j["deltas_vs_first"].push_back(jd);

        if (!run.result.truth.empty()) {
            const auto report = rms_trajectory_error(run.result);
            bool any_finite = false;
            for (double e : report.per_step)
                if (std::isfinite(e)) any_finite = true;
            if (any_finite)
                for (const auto& [value, frac] : error_cdf(report.per_step))
                    cdf_csv += label + "," + format_double(value) + "," + format_double(frac) + "\n";
        }
    }
    write_text_file((dir / "comparison.json").string(), j.dump(2) + "\n");
    write_text_file((dir / "cdf.csv").string(), cdf_csv);
}

} // namespace cotrack
