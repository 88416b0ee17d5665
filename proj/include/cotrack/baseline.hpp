#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "cotrack/matrix_utils.hpp"
#include "cotrack/measurement.hpp"
#include "cotrack/phd.hpp"

namespace cotrack {

/// Single-hypothesis Kalman track for the nearest-neighbor baseline.
struct KFTrack {
    int ue_id = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline KFTrack kf_predict(const KFTrack& track, const MotionModel& model) {
    if (track.mean.size() != model.state_dim())
        throw ValidationError("kf_predict: state dimension mismatch");
    const Eigen::MatrixXd F = model.transition();
    KFTrack out = track;
    out.mean = F * track.mean;
    out.cov = symmetrized(F * track.cov * F.transpose() + model.Q);
    return out;
}

/// Index of the measurement nearest to the predicted position, or -1 when
/// the set is empty or nothing passes the gate. Ties go to the lowest index
/// (the pipeline orders measurements by (ap_id, path_id)).
inline int nearest_neighbor(const KFTrack& predicted, const MeasurementSet& Z,
                            double gate = std::numeric_limits<double>::infinity()) {
    int best = -1;
    double best_d = gate;
    for (std::size_t i = 0; i < Z.items.size(); ++i) {
        const double d = (Z.items[i].z - Vec3(predicted.mean.head<3>())).norm();
        if (d < best_d || (best < 0 && d <= best_d)) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

inline KFTrack kf_update(const KFTrack& predicted, const PositionMeasurement& pm) {
    const Eigen::MatrixXd S = symmetrized(predicted.cov.topLeftCorner(3, 3) + pm.cov);
    const Eigen::MatrixXd K = predicted.cov.leftCols(3) * invert_spd(S);
    KFTrack out = predicted;
    out.mean = predicted.mean + K * (pm.z - predicted.mean.head<3>());
    out.cov = symmetrized(predicted.cov - K * S * K.transpose());
    return out;
}

/// One predict-associate-update cycle: hard nearest-neighbor association,
/// coasting (predict only) when the measurement set is empty.
inline KFTrack kf_step(const KFTrack& track, const MeasurementSet& Z,
                       const MotionModel& model,
                       double gate = std::numeric_limits<double>::infinity()) {
    KFTrack pred = kf_predict(track, model);
    const int idx = nearest_neighbor(pred, Z, gate);
    if (idx < 0) return pred;
    return kf_update(pred, Z.items[idx]);
}

/// Multi-track variant: greedy assignment in descending track index order,
/// each measurement used at most once.
inline std::vector<KFTrack> kf_step_all(const std::vector<KFTrack>& tracks,
                                        const MeasurementSet& Z, const MotionModel& model,
                                        double gate = std::numeric_limits<double>::infinity()) {
    std::vector<KFTrack> out(tracks.size());
    std::vector<bool> used(Z.items.size(), false);
    for (std::size_t t = tracks.size(); t-- > 0;) {
        KFTrack pred = kf_predict(tracks[t], model);
        int best = -1;
        double best_d = gate;
        for (std::size_t i = 0; i < Z.items.size(); ++i) {
            if (used[i]) continue;
            const double d = (Z.items[i].z - Vec3(pred.mean.head<3>())).norm();
            if (d < best_d || (best < 0 && d <= best_d)) {
                best = static_cast<int>(i);
                best_d = d;
            }
        }
        if (best >= 0) {
            used[best] = true;
            out[t] = kf_update(pred, Z.items[best]);
        } else {
            out[t] = std::move(pred);
        }
    }
    return out;
}

} // namespace cotrack
