#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cotrack/ap_manager.hpp"
#include "cotrack/errors.hpp"
#include "cotrack/phd.hpp"
#include "cotrack/scenario.hpp"

namespace cotrack {

/// Everything needed to evaluate one tracking run.
struct RunResult {
    std::vector<std::vector<UEState>> estimates; // per step
    std::vector<ActiveSet> active;               // per step
    std::vector<Trajectory> truth;
};

struct TrajectoryErrorReport {
    std::vector<double> per_step; // NaN where no estimate was available
    double mean = 0.0;            // over finite steps
    int missed_steps = 0;
};

/// Per-step RMS position error. Estimates are paired to truth UEs by
/// greedy minimum-distance matching (direct pairing in the single-UE case);
/// steps without any estimate are recorded as NaN and excluded from the
/// run mean.
inline TrajectoryErrorReport rms_trajectory_error(const RunResult& result) {
    if (result.truth.empty())
        throw ValidationError("rms_trajectory_error: no ground truth available");
    const std::size_t steps = result.estimates.size();
    TrajectoryErrorReport report;
    report.per_step.resize(steps, std::numeric_limits<double>::quiet_NaN());

    double sum = 0.0;
    int finite = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<Vec3> truths;
        for (const auto& tr : result.truth)
            if (t < tr.positions.size()) truths.push_back(tr.positions[t]);
        const auto& ests = result.estimates[t];
        if (ests.empty() || truths.empty()) {
            ++report.missed_steps;
            continue;
        }
        if (ests.size() > truths.size())
            throw ValidationError("rms_trajectory_error: more estimates than truth UEs");

        // greedy min-distance matching
        std::vector<bool> e_used(ests.size(), false), u_used(truths.size(), false);
        double sq = 0.0;
        for (std::size_t pair = 0; pair < ests.size(); ++pair) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t be = 0, bu = 0;
            for (std::size_t e = 0; e < ests.size(); ++e) {
                if (e_used[e]) continue;
                for (std::size_t u = 0; u < truths.size(); ++u) {
                    if (u_used[u]) continue;
                    const double d = (ests[e].position - truths[u]).norm();
                    if (d < best) {
                        best = d;
                        be = e;
                        bu = u;
                    }
                }
            }
            e_used[be] = true;
            u_used[bu] = true;
            sq += best * best;
        }
        const double err = std::sqrt(sq / static_cast<double>(ests.size()));
        report.per_step[t] = err;
        sum += err;
        ++finite;
    }
    report.mean = finite > 0 ? sum / finite : std::numeric_limits<double>::quiet_NaN();
    return report;
}

/// Empirical CDF over the finite values: sorted (value, cumulative fraction).
inline std::vector<std::pair<double, double>> error_cdf(std::vector<double> errors) {
    errors.erase(std::remove_if(errors.begin(), errors.end(),
                                [](double v) { return !std::isfinite(v); }),
                 errors.end());
    if (errors.empty())
        throw ValidationError("error_cdf: no finite values");
    std::sort(errors.begin(), errors.end());
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i)
        cdf.emplace_back(errors[i], static_cast<double>(i + 1) / errors.size());
    return cdf;
}

struct ActiveApStats {
    std::vector<int> per_step;
    double mean = 0.0;
};

inline ActiveApStats active_ap_stats(const RunResult& result) {
    ActiveApStats stats;
    stats.per_step.reserve(result.active.size());
    double sum = 0.0;
    for (const auto& a : result.active) {
        stats.per_step.push_back(static_cast<int>(a.ap_ids.size()));
        sum += static_cast<double>(a.ap_ids.size());
    }
    stats.mean = result.active.empty() ? 0.0 : sum / result.active.size();
    return stats;
}

/// Nearest-rank percentile of the finite values; q in (0, 1].
inline double percentile(std::vector<double> values, double q) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

} // namespace cotrack
