#pragma once

#include <map>
#include <set>
#include <vector>

#include "cotrack/geometry.hpp"
#include "cotrack/measurement.hpp"
#include "cotrack/phd.hpp"

namespace cotrack {

/// Indices of the APs active at one time step.
struct ActiveSet {
    int time_step = 0;
    std::set<int> ap_ids;
};

enum class PolicyKind { fov_aware, all_active, fixed_subset };
enum class EmptyFallback { keep_previous, all_active };

struct ManagementPolicy {
    PolicyKind kind = PolicyKind::fov_aware;
    std::set<int> fixed_ids;                              // fixed_subset only
    EmptyFallback fallback = EmptyFallback::keep_previous; // fov_aware only
};

inline void validate_policy(const ManagementPolicy& policy) {
    if (policy.kind == PolicyKind::fixed_subset && policy.fixed_ids.empty())
        throw ValidationError("policy: fixed_subset requires non-empty fixed_ids");
}

/// Select the active AP set from the predicted UE states. Under fov_aware
/// an AP is active when any predicted position lies in its FoV; an empty
/// result triggers the configured fallback (`fallback_used` is set so the
/// step can be flagged in diagnostics).
inline ActiveSet select_active(const std::vector<UEState>& predicted,
                               const std::vector<APState>& aps,
                               const ManagementPolicy& policy,
                               const ActiveSet& previous = {},
                               bool* fallback_used = nullptr) {
    if (fallback_used) *fallback_used = false;
    ActiveSet out;
    out.time_step = previous.time_step;
    switch (policy.kind) {
    case PolicyKind::all_active:
        for (const auto& ap : aps) out.ap_ids.insert(ap.id);
        return out;
    case PolicyKind::fixed_subset:
        out.ap_ids = policy.fixed_ids;
        return out;
    case PolicyKind::fov_aware:
        for (const auto& ap : aps)
            for (const auto& ue : predicted)
                if (fov_contains(ap, ue.position)) {
                    out.ap_ids.insert(ap.id);
                    break;
                }
        if (out.ap_ids.empty()) {
            if (fallback_used) *fallback_used = true;
            if (policy.fallback == EmptyFallback::keep_previous)
                out.ap_ids = previous.ap_ids;
            else
                for (const auto& ap : aps) out.ap_ids.insert(ap.id);
        }
        return out;
    }
    return out;
}

/// Concatenate the measurement sets of exactly the active APs, in ascending
/// ap_id order (each AP's internal measurement order is preserved).
inline MeasurementSet gate_measurements(const std::map<int, MeasurementSet>& per_ap,
                                        const ActiveSet& active) {
    MeasurementSet out;
    out.time_step = active.time_step;
    for (int id : active.ap_ids) {
        auto it = per_ap.find(id);
        if (it == per_ap.end()) continue;
        out.items.insert(out.items.end(), it->second.items.begin(),
                         it->second.items.end());
    }
    return out;
}

} // namespace cotrack
