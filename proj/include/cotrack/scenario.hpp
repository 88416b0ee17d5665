#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cotrack/errors.hpp"
#include "cotrack/geometry.hpp"
#include "cotrack/measurement.hpp"
#include "cotrack/phd.hpp"
#include "cotrack/rng.hpp"

namespace cotrack {

/// Ground-truth track of one UE, one entry per time step.
struct Trajectory {
    int ue_id = 0;
    std::vector<Vec3> positions;
    std::optional<std::vector<Vec3>> velocities;
};

struct Box {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    [[nodiscard]] double volume() const {
        const Vec3 d = max - min;
        return d.x() * d.y() * d.z();
    }
};

struct UEInit {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
};

/// Everything needed to synthesize a deterministic scenario: deployment,
/// UE motion, detection/clutter statistics and the range-bearing noise
/// template (delay, elevation, azimuth covariance).
struct ScenarioConfig {
    std::uint64_t seed = 0;
    int steps = 0;
    std::vector<APState> aps;
    std::vector<UEInit> ue_inits;
    MotionModel motion;
    double p_d = 1.0;
    double clutter_per_ap = 0.0; // expected count per AP per step
    Box clutter_region;
    Mat3 noise = Mat3::Zero();
    double c = kSpeedOfLight;
};

inline void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.steps < 0) throw ValidationError("scenario.steps: must be >= 0");
    if (!(cfg.p_d >= 0.0 && cfg.p_d <= 1.0))
        throw ValidationError("scenario.p_d: must be in [0, 1]");
    if (cfg.clutter_per_ap < 0.0)
        throw ValidationError("scenario.clutter_per_ap: must be >= 0");
    if (cfg.clutter_per_ap > 0.0 && !(cfg.clutter_region.volume() > 0.0))
        throw ValidationError("scenario.clutter_region: must have positive volume");
    if (!is_psd(cfg.noise))
        throw ValidationError("scenario.noise: covariance must be symmetric PSD");
    if (!(cfg.c > 0.0)) throw ValidationError("scenario.c: must be > 0");
    validate_motion_model(cfg.motion);
    std::set<int> ids;
    for (const auto& ap : cfg.aps) {
        if (!ids.insert(ap.id).second)
            throw ValidationError("scenario.aps: duplicate AP id");
        validate_fov(ap.fov);
    }
}

/// Measurements of one time step, keyed by AP.
struct StepMeasurements {
    int time_step = 0;
    std::map<int, std::vector<RangeBearingMeasurement>> per_ap;
};

/// Sample a UE trajectory from the transition density, seeded by
/// (seed, ue_id) so every UE has its own stream.
inline Trajectory generate_trajectory(const ScenarioConfig& cfg, int ue_id) {
    if (ue_id < 0 || ue_id >= static_cast<int>(cfg.ue_inits.size()))
        throw ValidationError("generate_trajectory: unknown ue_id");
    const auto& init = cfg.ue_inits[ue_id];
    const Eigen::Index n = cfg.motion.state_dim();
    const Eigen::MatrixXd F = cfg.motion.transition();
    const Eigen::MatrixXd noise_factor = factorize_psd(cfg.motion.Q);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x.head<3>() = init.position;
    if (n == 6) x.tail<3>() = init.velocity;

    Trajectory traj;
    traj.ue_id = ue_id;
    traj.positions.reserve(cfg.steps);
    if (n == 6) traj.velocities.emplace();

    RandomStream rng(cfg.seed, RngPurpose::trajectory, static_cast<std::uint64_t>(ue_id));
    for (int t = 0; t < cfg.steps; ++t) {
        traj.positions.push_back(Vec3(x.head<3>()));
        if (traj.velocities) traj.velocities->push_back(Vec3(x.tail<3>()));
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.gaussian();
        x = F * x + noise_factor * w;
    }
    return traj;
}

namespace detail {

inline std::uint64_t pair_key(int ap_id, int ue_id) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ap_id)) << 32) |
           static_cast<std::uint32_t>(ue_id);
}

inline RangeBearingMeasurement make_range_bearing(const ScenarioConfig& cfg,
                                                  const APState& ap, const Vec3& p,
                                                  int t, int path_id) {
    const LocalBearing b = local_bearing(ap, p);
    RangeBearingMeasurement m;
    m.time_step = t;
    m.ap_id = ap.id;
    m.path_id = path_id;
    m.delay = b.range / cfg.c;
    m.elevation = b.elevation;
    m.azimuth = b.azimuth;
    m.cov = cfg.noise;
    return m;
}

} // namespace detail

/// Synthesize one step of measurements: per (AP, UE in FoV) a LoS detection
/// with probability p_d, perturbed by the configured noise, plus
/// Poisson-distributed clutter per AP drawn uniformly in the clutter region.
/// UEs outside an AP's FoV produce nothing for that AP; a UE collocated
/// with an AP is skipped.
inline StepMeasurements generate_measurements(const ScenarioConfig& cfg,
                                              const std::vector<Trajectory>& trajs,
                                              int t) {
    if (t < 0 || t >= cfg.steps)
        throw ValidationError("generate_measurements: step out of range");
    const Eigen::MatrixXd noise_factor = factorize_psd(cfg.noise);
    const auto step = static_cast<std::uint64_t>(t);

    StepMeasurements out;
    out.time_step = t;
    for (const auto& ap : cfg.aps) {
        auto& list = out.per_ap[ap.id];
        int path_id = 0;
        for (const auto& traj : trajs) {
            const Vec3 p = traj.positions.at(t);
            if (!fov_contains(ap, p)) continue;
            if ((p - ap.position).norm() < 1e-12) continue;
            RandomStream det(cfg.seed, RngPurpose::detection,
                             detail::pair_key(ap.id, traj.ue_id), step);
            if (det.uniform01() >= cfg.p_d) continue;
            RandomStream noise(cfg.seed, RngPurpose::los_noise,
                               detail::pair_key(ap.id, traj.ue_id), step);
            auto m = detail::make_range_bearing(cfg, ap, p, t, path_id++);
            const Vec3 w = noise_factor * noise.gaussian3();
            m.delay = std::max(0.0, m.delay + w(0));
            m.elevation = std::clamp(m.elevation + w(1), 0.0, M_PI);
            m.azimuth += w(2);
            list.push_back(std::move(m));
        }
        if (cfg.clutter_per_ap > 0.0) {
            RandomStream count_rng(cfg.seed, RngPurpose::clutter_count,
                                   static_cast<std::uint64_t>(ap.id), step);
            const int n_clutter = count_rng.poisson(cfg.clutter_per_ap);
            RandomStream pos_rng(cfg.seed, RngPurpose::clutter_position,
                                 static_cast<std::uint64_t>(ap.id), step);
            for (int i = 0; i < n_clutter; ++i) {
                Vec3 p;
                for (int a = 0; a < 3; ++a)
                    p(a) = pos_rng.uniform(cfg.clutter_region.min(a),
                                           cfg.clutter_region.max(a));
                if ((p - ap.position).norm() < 1e-12) continue;
                list.push_back(detail::make_range_bearing(cfg, ap, p, t, path_id++));
            }
        }
        if (list.empty()) out.per_ap.erase(ap.id);
    }
    return out;
}

} // namespace cotrack
