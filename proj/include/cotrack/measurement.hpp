#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <vector>

#include "cotrack/errors.hpp"
#include "cotrack/geometry.hpp"
#include "cotrack/matrix_utils.hpp"

namespace cotrack {

/// One multipath estimate from an AP: propagation delay plus arrival angles
/// in the AP's local frame. The covariance is ordered
/// (delay, elevation, azimuth) in (s^2, rad^2, rad^2).
struct RangeBearingMeasurement {
    int time_step = 0;
    int ap_id = 0;
    int path_id = 0;
    double delay = 0.0;     // s, >= 0
    double azimuth = 0.0;   // rad
    double elevation = 0.0; // rad, [0, pi]
    Mat3 cov = Mat3::Zero();
};

/// Position-domain measurement in the global frame, with the set of APs
/// whose range-bearing estimates contributed to it.
struct PositionMeasurement {
    int time_step = 0;
    std::set<int> source_ap_ids;
    Vec3 z = Vec3::Zero();
    Mat3 cov = Mat3::Zero();
};

struct MeasurementSet {
    int time_step = 0;
    std::vector<PositionMeasurement> items;
};

/// Counters reported alongside a run; see cubature_transform.
struct TransformDiagnostics {
    std::int64_t clamped_delays = 0;
};

/// Lower-triangular factor L with L L^T = cov. Semi-definite inputs are
/// handled by zeroing the dependent columns; asymmetric or indefinite
/// inputs (relative to the matrix scale) are rejected.
inline Eigen::MatrixXd factorize_psd(const Eigen::MatrixXd& cov) {
    const auto n = cov.rows();
    if (cov.cols() != n)
        throw ValidationError("factorize_psd: matrix is not square");
    const double scale = std::max(1e-300, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw ValidationError("factorize_psd: matrix is not symmetric");

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double sum = L.row(j).head(j).squaredNorm();
        const double d = cov(j, j) - sum;
        // Pivot tolerances are per column: covariance entries can span many
        // orders of magnitude (delay variance in s^2 next to rad^2 terms).
        const double col_scale = std::max({std::abs(cov(j, j)), sum, 1e-300});
        if (d > 1e-12 * col_scale) {
            L(j, j) = std::sqrt(d);
            for (Eigen::Index i = j + 1; i < n; ++i)
                L(i, j) = (cov(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
        } else if (d >= -1e-9 * col_scale) {
            // Rank deficiency: the column must already be explained by the
            // previous factors, otherwise the matrix is indefinite.
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double resid = cov(i, j) - L.row(i).head(j).dot(L.row(j).head(j));
                const double pair_scale =
                    std::sqrt(std::max(std::abs(cov(i, i)), 1e-300) * col_scale);
                if (std::abs(resid) > 1e-7 * pair_scale)
                    throw ValidationError("factorize_psd: matrix is indefinite");
            }
        } else {
            throw ValidationError("factorize_psd: matrix is indefinite");
        }
    }
    return L;
}

/// Convert a range-bearing measurement into a position-domain measurement
/// by pushing 2d cubature points through the bearing-to-position map
///   u = p_ap + (c * delay) * R_ap * direction(azimuth, elevation).
/// Cubature points with negative delay are clamped to zero and counted in
/// `diag` when provided. The returned covariance is symmetrized and floored
/// to PSD.
inline PositionMeasurement cubature_transform(const RangeBearingMeasurement& m,
                                              const APState& ap,
                                              double c = kSpeedOfLight,
                                              TransformDiagnostics* diag = nullptr) {
    if (!is_psd(m.cov))
        throw ValidationError("cubature_transform: measurement covariance is not PSD");
    if (m.delay < 0.0)
        throw ValidationError("cubature_transform: negative delay");

    constexpr int dz = 3;
    const Eigen::MatrixXd sigma = factorize_psd(m.cov);
    const Vec3 center(m.delay, m.elevation, m.azimuth);
    const double spread = std::sqrt(static_cast<double>(dz));

    Vec3 mean = Vec3::Zero();
    Mat3 second = Mat3::Zero();
    for (int cpt = 0; cpt < 2 * dz; ++cpt) {
        Vec3 e = Vec3::Zero();
        e(cpt % dz) = (cpt < dz) ? spread : -spread;
        const Vec3 zc = sigma * e + center;
        double delay = zc(0);
        if (delay < 0.0) {
            delay = 0.0;
            if (diag) ++diag->clamped_delays;
        }
        const Vec3 u =
            ap.position + (c * delay) * (ap.orientation * bearing_to_direction(zc(2), zc(1)));
        mean += u;
        second += u * u.transpose();
    }
    mean /= 2.0 * dz;
    second /= 2.0 * dz;

    PositionMeasurement out;
    out.time_step = m.time_step;
    out.source_ap_ids = {m.ap_id};
    out.z = mean;
    out.cov = floor_psd(second - mean * mean.transpose());
    return out;
}

namespace detail {

/// Information-form fusion of a cluster of position measurements.
inline PositionMeasurement fuse_cluster(const std::vector<PositionMeasurement>& members) {
    if (members.size() == 1) return members.front();
    Mat3 info = Mat3::Zero();
    Vec3 info_mean = Vec3::Zero();
    PositionMeasurement out;
    out.time_step = members.front().time_step;
    for (const auto& pm : members) {
        const Mat3 inv = invert_spd(pm.cov);
        info += inv;
        info_mean += inv * pm.z;
        out.source_ap_ids.insert(pm.source_ap_ids.begin(), pm.source_ap_ids.end());
    }
    out.cov = invert_spd(info);
    out.z = out.cov * info_mean;
    return out;
}

/// One greedy agglomeration pass in input order. A measurement joins the
/// first cluster that still keeps every member within `gate` of the
/// cluster centroid after insertion.
inline std::vector<std::vector<PositionMeasurement>>
cluster_pass(const std::vector<PositionMeasurement>& items, double gate) {
    std::vector<std::vector<PositionMeasurement>> clusters;
    std::vector<Vec3> sums;
    for (const auto& pm : items) {
        bool placed = false;
        for (std::size_t k = 0; k < clusters.size() && !placed; ++k) {
            const Vec3 centroid =
                (sums[k] + pm.z) / static_cast<double>(clusters[k].size() + 1);
            bool ok = (pm.z - centroid).norm() <= gate;
            for (std::size_t i = 0; ok && i < clusters[k].size(); ++i)
                ok = (clusters[k][i].z - centroid).norm() <= gate;
            if (ok) {
                clusters[k].push_back(pm);
                sums[k] += pm.z;
                placed = true;
            }
        }
        if (!placed) {
            clusters.push_back({pm});
            sums.push_back(pm.z);
        }
    }
    return clusters;
}

} // namespace detail

/// Group measurements that plausibly stem from the same object and fuse
/// each group into a single proxy measurement (information form). Passes
/// repeat until no group has more than one member, which makes the
/// operation idempotent. Processing follows the input order, so a list
/// sorted by (ap_id, path_id) yields a reproducible result.
inline MeasurementSet cluster_proxy(const MeasurementSet& ms, double gate) {
    if (!(gate > 0.0))
        throw ValidationError("cluster_proxy: gate must be > 0");
    MeasurementSet out;
    out.time_step = ms.time_step;
    out.items = ms.items;
    while (true) {
        auto clusters = detail::cluster_pass(out.items, gate);
        if (clusters.size() == out.items.size()) break; // all singletons
        out.items.clear();
        for (const auto& members : clusters)
            out.items.push_back(detail::fuse_cluster(members));
    }
    return out;
}

} // namespace cotrack
