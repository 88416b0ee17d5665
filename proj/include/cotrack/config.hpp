#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cotrack/ap_manager.hpp"
#include "cotrack/io_util.hpp"
#include "cotrack/phd.hpp"
#include "cotrack/scenario.hpp"
#include "cotrack/trace.hpp"

namespace cotrack {

enum class TrackerKind { phd, kf_nn };

/// Optional measurement-driven birth (off by default; the standard run
/// seeds a fixed UE set from the configured priors).
struct BirthConfig {
    bool enabled = false;
    double weight = 1e-2;
    Eigen::VectorXd cov_diag;
    double gate = 16.0;
};

/// Tracker-side parameters shared by the PHD filter and the KF baseline.
struct FilterConfig {
    double p_d = 0.9;
    std::optional<double> lambda_c;     // m^-3; derived from the scenario when absent
    double prune_threshold = 1e-4;
    double merge_threshold = 4.0;
    int max_components = 500;
    double cluster_gate_m = 0.5;
    bool renormalize_after_prune = false;
    std::optional<MotionModel> motion;  // defaults to the scenario motion model
    std::optional<std::vector<UEInit>> init_states; // defaults to scenario/trace truth
    Eigen::VectorXd prior_cov_diag;     // sized to the motion state dimension
    double init_weight = 1.0;
    std::optional<int> extract_count;   // defaults to the number of initial states
    std::optional<double> kf_gate_m;    // KF association gate (none = pure NN)
    BirthConfig birth;
};

/// One tracking run: scenario or trace input, tracker, AP policy, filter
/// parameters, output directory.
struct RunConfig {
    std::uint64_t seed = 0;
    TrackerKind tracker = TrackerKind::phd;
    ManagementPolicy policy;
    FilterConfig filter;
    std::optional<ScenarioConfig> scenario;
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> out_dir;
    std::string label = "run";
};

namespace config_detail {

using nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError("config: missing required field '" + ctx + key + "'");
    return j.at(key);
}

inline double as_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ParseError("config: '" + ctx + "' must be a number");
    return j.get<double>();
}

inline double req_number(const json& j, const std::string& key, const std::string& ctx) {
    return as_number(require(j, key, ctx), ctx + key);
}

inline int req_int(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_number_integer()) throw ParseError("config: '" + ctx + key + "' must be an integer");
    return v.get<int>();
}

inline std::string req_string(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = require(j, key, ctx);
    if (!v.is_string()) throw ParseError("config: '" + ctx + key + "' must be a string");
    return v.get<std::string>();
}

inline Vec3 as_vec3(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError("config: '" + ctx + "' must be an array of 3 numbers");
    return {as_number(j[0], ctx), as_number(j[1], ctx), as_number(j[2], ctx)};
}

inline Eigen::VectorXd as_vector(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty())
        throw ParseError("config: '" + ctx + "' must be a non-empty array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = as_number(j[i], ctx);
    return v;
}

inline MotionModel parse_motion(const json& j, const std::string& ctx) {
    MotionModel m;
    const std::string kind = req_string(j, "kind", ctx);
    if (kind == "random_walk") {
        m.kind = MotionKind::random_walk;
    } else if (kind == "constant_velocity") {
        m.kind = MotionKind::constant_velocity;
    } else {
        throw ParseError("config: '" + ctx + "kind' must be 'random_walk' or 'constant_velocity'");
    }
    m.dt = j.contains("dt") ? as_number(j.at("dt"), ctx + "dt") : 1.0;
    if (j.contains("q_diag")) {
        const Eigen::VectorXd q = as_vector(j.at("q_diag"), ctx + "q_diag");
        m.Q = q.asDiagonal();
    } else if (j.contains("q")) {
        const Eigen::VectorXd flat = as_vector(j.at("q"), ctx + "q");
        const auto n = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(flat.size())));
        if (n * n != flat.size())
            throw ParseError("config: '" + ctx + "q' must be a row-major square matrix");
        m.Q.resize(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) m.Q(a, b) = flat(a * n + b);
    } else {
        throw ParseError("config: missing required field '" + ctx + "q_diag'");
    }
    validate_motion_model(m);
    return m;
}

inline ScenarioConfig parse_scenario(const json& j, std::uint64_t seed, const std::string& ctx) {
    ScenarioConfig s;
    s.seed = seed;
    s.steps = req_int(j, "steps", ctx);
    const json& japs = require(j, "aps", ctx);
    if (!japs.is_array() || japs.empty())
        throw ParseError("config: '" + ctx + "aps' must be a non-empty array");
    nlohmann::json dep;
    dep["aps"] = japs;
    Deployment deployment = deployment_from_json(dep, ctx + "aps");
    s.aps = deployment.aps;

    const json& jues = require(j, "ues", ctx);
    if (!jues.is_array() || jues.empty())
        throw ParseError("config: '" + ctx + "ues' must be a non-empty array");
    for (std::size_t i = 0; i < jues.size(); ++i) {
        const std::string uctx = ctx + "ues[" + std::to_string(i) + "].";
        UEInit u;
        u.position = as_vec3(require(jues[i], "position", uctx), uctx + "position");
        if (jues[i].contains("velocity"))
            u.velocity = as_vec3(jues[i].at("velocity"), uctx + "velocity");
        s.ue_inits.push_back(u);
    }

    s.motion = parse_motion(require(j, "motion", ctx), ctx + "motion.");
    s.p_d = j.contains("p_d") ? as_number(j.at("p_d"), ctx + "p_d") : 1.0;
    s.clutter_per_ap =
        j.contains("clutter_per_ap") ? as_number(j.at("clutter_per_ap"), ctx + "clutter_per_ap") : 0.0;
    if (j.contains("clutter_region")) {
        const json& jr = j.at("clutter_region");
        s.clutter_region.min = as_vec3(require(jr, "min", ctx + "clutter_region."),
                                       ctx + "clutter_region.min");
        s.clutter_region.max = as_vec3(require(jr, "max", ctx + "clutter_region."),
                                       ctx + "clutter_region.max");
    }

    const json& jn = require(j, "noise", ctx);
    if (jn.contains("cov")) {
        const Eigen::VectorXd flat = as_vector(jn.at("cov"), ctx + "noise.cov");
        if (flat.size() != 9)
            throw ParseError("config: '" + ctx + "noise.cov' must have 9 entries (row-major 3x3)");
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) s.noise(a, b) = flat(a * 3 + b);
    } else {
        const double sr = req_number(jn, "sigma_range_m", ctx + "noise.");
        const double se = req_number(jn, "sigma_elevation_rad", ctx + "noise.");
        const double sa = req_number(jn, "sigma_azimuth_rad", ctx + "noise.");
        s.c = j.contains("c") ? as_number(j.at("c"), ctx + "c") : kSpeedOfLight;
        const double st = sr / s.c; // delay sigma
        s.noise = Vec3(st * st, se * se, sa * sa).asDiagonal();
    }
    if (j.contains("c")) s.c = as_number(j.at("c"), ctx + "c");
    validate_scenario(s);
    return s;
}

} // namespace config_detail

inline RunConfig parse_run_config(const nlohmann::json& j, const std::string& label = "run");

/// Load and validate a run config from a JSON file.
inline RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return parse_run_config(j, path.stem().string());
}

inline RunConfig parse_run_config(const nlohmann::json& j, const std::string& label) {
    using config_detail::as_number;
    using config_detail::as_vector;
    using config_detail::require;
    using nlohmann::json;

    RunConfig cfg;
    cfg.label = label;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw ParseError("config: 'seed' must be an unsigned integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }

    const std::string tracker =
        j.contains("tracker") ? config_detail::req_string(j, "tracker", "") : "phd";
    if (tracker == "phd") {
        cfg.tracker = TrackerKind::phd;
    } else if (tracker == "kf_nn") {
        cfg.tracker = TrackerKind::kf_nn;
    } else {
        throw ParseError("config: 'tracker' must be 'phd' or 'kf_nn'");
    }

    if (j.contains("policy")) {
        const json& jp = j.at("policy");
        const std::string kind = config_detail::req_string(jp, "kind", "policy.");
        if (kind == "fov_aware") {
            cfg.policy.kind = PolicyKind::fov_aware;
        } else if (kind == "all_active") {
            cfg.policy.kind = PolicyKind::all_active;
        } else if (kind == "fixed_subset") {
            cfg.policy.kind = PolicyKind::fixed_subset;
            const json& ids = require(jp, "fixed_ids", "policy.");
            if (!ids.is_array() || ids.empty())
                throw ParseError("config: 'policy.fixed_ids' must be a non-empty array");
            for (const auto& v : ids) cfg.policy.fixed_ids.insert(v.get<int>());
        } else {
            throw ParseError("config: 'policy.kind' must be 'fov_aware', 'all_active' or 'fixed_subset'");
        }
        if (jp.contains("fallback")) {
            const std::string fb = jp.at("fallback").get<std::string>();
            if (fb == "keep_previous") {
                cfg.policy.fallback = EmptyFallback::keep_previous;
            } else if (fb == "all_active") {
                cfg.policy.fallback = EmptyFallback::all_active;
            } else {
                throw ParseError("config: 'policy.fallback' must be 'keep_previous' or 'all_active'");
            }
        }
    }
    validate_policy(cfg.policy);

    const bool has_scenario = j.contains("scenario");
    const bool has_trace = j.contains("trace");
    if (has_scenario == has_trace)
        throw ParseError("config: exactly one of 'scenario' or 'trace' must be present");
    if (has_scenario)
        cfg.scenario = config_detail::parse_scenario(j.at("scenario"), cfg.seed, "scenario.");
    else
        cfg.trace_path = config_detail::req_string(j, "trace", "");

    if (j.contains("output") && j.at("output").contains("dir"))
        cfg.out_dir = j.at("output").at("dir").get<std::string>();

    FilterConfig& f = cfg.filter;
    if (j.contains("filter")) {
        const json& jf = j.at("filter");
        if (jf.contains("p_d")) f.p_d = as_number(jf.at("p_d"), "filter.p_d");
        if (jf.contains("lambda_c")) f.lambda_c = as_number(jf.at("lambda_c"), "filter.lambda_c");
        if (jf.contains("prune_threshold"))
            f.prune_threshold = as_number(jf.at("prune_threshold"), "filter.prune_threshold");
        if (jf.contains("merge_threshold"))
            f.merge_threshold = as_number(jf.at("merge_threshold"), "filter.merge_threshold");
        if (jf.contains("max_components"))
            f.max_components = config_detail::req_int(jf, "max_components", "filter.");
        if (jf.contains("cluster_gate_m"))
            f.cluster_gate_m = as_number(jf.at("cluster_gate_m"), "filter.cluster_gate_m");
        if (jf.contains("renormalize_after_prune")) {
            if (!jf.at("renormalize_after_prune").is_boolean())
                throw ParseError("config: 'filter.renormalize_after_prune' must be a boolean");
            f.renormalize_after_prune = jf.at("renormalize_after_prune").get<bool>();
        }
        if (jf.contains("motion"))
            f.motion = config_detail::parse_motion(jf.at("motion"), "filter.motion.");
        if (jf.contains("init_states")) {
            const json& ji = jf.at("init_states");
            if (!ji.is_array() || ji.empty())
                throw ParseError("config: 'filter.init_states' must be a non-empty array");
            std::vector<UEInit> inits;
            for (std::size_t i = 0; i < ji.size(); ++i) {
                const std::string ctx = "filter.init_states[" + std::to_string(i) + "].";
                UEInit u;
                u.position = config_detail::as_vec3(require(ji[i], "position", ctx), ctx + "position");
                if (ji[i].contains("velocity"))
                    u.velocity = config_detail::as_vec3(ji[i].at("velocity"), ctx + "velocity");
                inits.push_back(u);
            }
            f.init_states = std::move(inits);
        }
        if (jf.contains("prior_cov_diag"))
            f.prior_cov_diag = as_vector(jf.at("prior_cov_diag"), "filter.prior_cov_diag");
        if (jf.contains("init_weight"))
            f.init_weight = as_number(jf.at("init_weight"), "filter.init_weight");
        if (jf.contains("extract_count"))
            f.extract_count = config_detail::req_int(jf, "extract_count", "filter.");
        if (jf.contains("kf_gate_m"))
            f.kf_gate_m = as_number(jf.at("kf_gate_m"), "filter.kf_gate_m");
        if (jf.contains("birth")) {
            const json& jb = jf.at("birth");
            if (jb.contains("enabled")) f.birth.enabled = jb.at("enabled").get<bool>();
            if (jb.contains("weight")) f.birth.weight = as_number(jb.at("weight"), "filter.birth.weight");
            if (jb.contains("cov_diag"))
                f.birth.cov_diag = as_vector(jb.at("cov_diag"), "filter.birth.cov_diag");
            if (jb.contains("gate")) f.birth.gate = as_number(jb.at("gate"), "filter.birth.gate");
        }
    }

    if (!(f.p_d >= 0.0 && f.p_d <= 1.0))
        throw ParseError("config: 'filter.p_d' must be in [0, 1]");
    if (f.lambda_c && *f.lambda_c < 0.0)
        throw ParseError("config: 'filter.lambda_c' must be >= 0");
    if (f.prune_threshold < 0.0)
        throw ParseError("config: 'filter.prune_threshold' must be >= 0");
    if (!(f.merge_threshold > 0.0))
        throw ParseError("config: 'filter.merge_threshold' must be > 0");
    if (f.max_components < 1)
        throw ParseError("config: 'filter.max_components' must be >= 1");
    if (!(f.cluster_gate_m > 0.0))
        throw ParseError("config: 'filter.cluster_gate_m' must be > 0");
    if (!cfg.scenario && !f.lambda_c)
        throw ParseError("config: 'filter.lambda_c' is required when replaying a trace");
    if (!cfg.scenario && !f.motion)
        throw ParseError("config: 'filter.motion' is required when replaying a trace");
    return cfg;
}

} // namespace cotrack
