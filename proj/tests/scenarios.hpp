// Synthetic geometries shared by the runner tests and the acceptance suite.
#pragma once

#include "cotrack/config.hpp"
#include "cotrack/scenario.hpp"

namespace test_scenarios {

using namespace cotrack;

inline APState sector_ap(int id, const Vec3& pos, double yaw, double d_th = 8.5,
                         double theta_th = M_PI / 3) {
    APState ap;
    ap.id = id;
    ap.position = pos;
    ap.orientation = Rotation3::from_yaw_pitch_roll(yaw, 0, 0);
    ap.fov = {FovKind::sector, d_th, theta_th};
    return ap;
}

inline Mat3 range_bearing_noise(double sigma_range_m, double sigma_angle_rad, double c) {
    const double st = sigma_range_m / c;
    return Vec3(st * st, sigma_angle_rad * sigma_angle_rad,
                sigma_angle_rad * sigma_angle_rad)
        .asDiagonal();
}

/// Two facing APs on a 16 m corridor; the UE walks from inside AP 1's FoV
/// through the overlap (x in [7.5, 8.5]) into AP 7's, leaving AP 1's FoV at
/// x = 8.5.
inline RunConfig corridor_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.label = "corridor";

    ScenarioConfig sc;
    sc.seed = seed;
    sc.steps = 280;
    sc.aps = {sector_ap(1, {0, 0, 1}, 0), sector_ap(7, {16, 0, 1}, M_PI)};
    sc.ue_inits = {{{1, 0, 1}, {0.05, 0, 0}}};
    sc.motion.kind = MotionKind::constant_velocity;
    sc.motion.Q = Eigen::MatrixXd::Zero(6, 6);
    sc.motion.dt = 1.0;
    sc.p_d = 1.0;
    sc.clutter_per_ap = 0.0;
    sc.clutter_region = {{-1, -4, 0}, {17, 4, 3}};
    sc.noise = range_bearing_noise(0.1, 0.02, sc.c);
    cfg.scenario = sc;

    cfg.filter.p_d = 1.0;
    cfg.filter.lambda_c = 0.0;
    MotionModel fm;
    fm.kind = MotionKind::random_walk;
    fm.Q = 0.01 * Mat3::Identity();
    cfg.filter.motion = fm;
    cfg.filter.prior_cov_diag = Eigen::VectorXd::Constant(3, 0.25);
    return cfg;
}

/// Dense deployment: eight wall-mounted sector APs (d_th 8.5 m, theta_th
/// 60 deg) around a 14 x 8 m floor, UE crossing 12 m in 780 steps.
inline RunConfig room8_config(std::uint64_t seed, int steps = 780) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.label = "room8";

    ScenarioConfig sc;
    sc.seed = seed;
    sc.steps = steps;
    int id = 1;
    for (double x : {2.4, 5.2, 8.0, 10.8}) {
        sc.aps.push_back(sector_ap(id++, {x, 0, 2.5}, M_PI / 2));  // south wall, facing +y
        sc.aps.push_back(sector_ap(id++, {x, 8, 2.5}, -M_PI / 2)); // north wall, facing -y
    }
    sc.ue_inits = {{{1, 4, 1}, {12.0 / steps, 0, 0}}};
    sc.motion.kind = MotionKind::constant_velocity;
    sc.motion.Q = Eigen::MatrixXd::Zero(6, 6);
    sc.motion.dt = 1.0;
    sc.p_d = 0.9;
    sc.clutter_per_ap = 1.0;
    sc.clutter_region = {{0, 0, 0}, {14, 8, 3}};
    sc.noise = range_bearing_noise(0.1, 0.02, sc.c);
    cfg.scenario = sc;

    cfg.filter.p_d = 0.9;
    MotionModel fm;
    fm.kind = MotionKind::random_walk;
    fm.Q = 0.01 * Mat3::Identity(); // 0.1 m per-axis process noise
    cfg.filter.motion = fm;
    cfg.filter.prune_threshold = 1e-4;
    cfg.filter.merge_threshold = 4.0;
    cfg.filter.max_components = 500;
    cfg.filter.prior_cov_diag = Eigen::VectorXd::Constant(3, 0.25);
    return cfg;
}

/// Small cluttered two-AP scene for the PHD vs KF comparison.
inline RunConfig cluttered_config(std::uint64_t seed, double p_d, double clutter_per_ap) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.label = "cluttered";

    ScenarioConfig sc;
    sc.seed = seed;
    sc.steps = 200;
    sc.aps = {sector_ap(1, {0, 3, 2}, 0, 12.0, M_PI / 2.5),
              sector_ap(2, {10, 3, 2}, M_PI, 12.0, M_PI / 2.5)};
    sc.ue_inits = {{{2, 3, 1}, {0.03, 0, 0}}};
    sc.motion.kind = MotionKind::constant_velocity;
    sc.motion.Q = Eigen::MatrixXd::Zero(6, 6);
    sc.motion.dt = 1.0;
    sc.p_d = p_d;
    sc.clutter_per_ap = clutter_per_ap;
    sc.clutter_region = {{0, 0, 0}, {10, 6, 3}};
    sc.noise = range_bearing_noise(0.1, 0.02, sc.c);
    cfg.scenario = sc;

    cfg.filter.p_d = p_d;
    MotionModel fm;
    fm.kind = MotionKind::random_walk;
    fm.Q = 0.01 * Mat3::Identity();
    cfg.filter.motion = fm;
    cfg.filter.prior_cov_diag = Eigen::VectorXd::Constant(3, 0.25);
    cfg.policy.kind = PolicyKind::all_active;
    return cfg;
}

} // namespace test_scenarios
