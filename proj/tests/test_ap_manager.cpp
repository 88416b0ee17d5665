#include <gtest/gtest.h>

#include "cotrack/ap_manager.hpp"

using namespace cotrack;

namespace {

APState sector_ap(int id, const Vec3& pos, double yaw, double d_th = 8.5,
                  double theta_th = M_PI / 3) {
    APState ap;
    ap.id = id;
    ap.position = pos;
    ap.orientation = Rotation3::from_yaw_pitch_roll(yaw, 0, 0);
    ap.fov = {FovKind::sector, d_th, theta_th};
    return ap;
}

std::vector<UEState> predicted_at(std::initializer_list<Vec3> positions) {
    std::vector<UEState> out;
    for (const auto& p : positions) out.push_back({p, std::nullopt});
    return out;
}

PositionMeasurement pm_at(double x, int ap_id) {
    PositionMeasurement p;
    p.z = {x, 0, 0};
    p.cov = Mat3::Identity();
    p.source_ap_ids = {ap_id};
    return p;
}

} // namespace

TEST(SelectActive, AllActiveSelectsEveryone) {
    std::vector<APState> aps;
    for (int i = 0; i < 8; ++i) aps.push_back(sector_ap(i, {double(i), 0, 0}, 0));
    ManagementPolicy policy;
    policy.kind = PolicyKind::all_active;
    const auto active = select_active({}, aps, policy);
    EXPECT_EQ(active.ap_ids.size(), 8u);
}

TEST(SelectActive, FovAwareSelectsCoveringAp) {
    // AP 3 looks along +x from the origin, the others look away
    std::vector<APState> aps = {sector_ap(1, {0, 50, 0}, 0), sector_ap(3, {0, 0, 0}, 0),
                                sector_ap(7, {0, -50, 0}, M_PI)};
    ManagementPolicy policy; // fov_aware
    const auto active = select_active(predicted_at({{3, 0, 0}}), aps, policy);
    EXPECT_EQ(active.ap_ids, (std::set<int>{3}));
}

TEST(SelectActive, OverlappingFovsUnion) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0), sector_ap(7, {16, 0, 0}, M_PI)};
    ManagementPolicy policy;
    const auto active = select_active(predicted_at({{8, 0, 0}}), aps, policy);
    EXPECT_EQ(active.ap_ids, (std::set<int>{1, 7}));
}

TEST(SelectActive, UnionOverMultipleUes) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0), sector_ap(7, {100, 0, 0}, M_PI)};
    ManagementPolicy policy;
    const auto active = select_active(predicted_at({{3, 0, 0}, {97, 0, 0}}), aps, policy);
    EXPECT_EQ(active.ap_ids, (std::set<int>{1, 7}));
}

TEST(SelectActive, FixedSubset) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0), sector_ap(7, {16, 0, 0}, M_PI)};
    ManagementPolicy policy;
    policy.kind = PolicyKind::fixed_subset;
    policy.fixed_ids = {1};
    const auto active = select_active(predicted_at({{15, 0, 0}}), aps, policy);
    EXPECT_EQ(active.ap_ids, (std::set<int>{1}));
}

TEST(SelectActive, EmptyFovAwareKeepsPrevious) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0)};
    ManagementPolicy policy;
    policy.fallback = EmptyFallback::keep_previous;
    ActiveSet previous;
    previous.ap_ids = {1};
    bool fallback_used = false;
    const auto active =
        select_active(predicted_at({{-5, 0, 0}}), aps, policy, previous, &fallback_used);
    EXPECT_TRUE(fallback_used);
    EXPECT_EQ(active.ap_ids, (std::set<int>{1}));
}

TEST(SelectActive, EmptyFovAwareAllActiveFallback) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0), sector_ap(2, {5, 0, 0}, 0)};
    ManagementPolicy policy;
    policy.fallback = EmptyFallback::all_active;
    bool fallback_used = false;
    const auto active = select_active(predicted_at({{-5, 0, 0}}), aps, policy, {}, &fallback_used);
    EXPECT_TRUE(fallback_used);
    EXPECT_EQ(active.ap_ids, (std::set<int>{1, 2}));
}

TEST(SelectActive, NoFallbackFlagWhenNonEmpty) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0)};
    ManagementPolicy policy;
    bool fallback_used = true;
    select_active(predicted_at({{3, 0, 0}}), aps, policy, {}, &fallback_used);
    EXPECT_FALSE(fallback_used);
}

TEST(SelectActive, MonotoneInFovSize) {
    // enlarging every FoV never shrinks the active set
    std::vector<UEState> predicted = predicted_at({{4, 1, 0}, {12, -1, 0}});
    for (int trial = 0; trial < 20; ++trial) {
        const double d_small = 2.0 + 0.5 * trial;
        const double th_small = 0.2 + 0.02 * trial;
        std::vector<APState> small_fov, large_fov;
        for (int i = 0; i < 5; ++i) {
            small_fov.push_back(sector_ap(i, {4.0 * i, 0, 0}, i % 2 ? M_PI : 0, d_small, th_small));
            large_fov.push_back(
                sector_ap(i, {4.0 * i, 0, 0}, i % 2 ? M_PI : 0, d_small + 3.0, th_small + 0.4));
        }
        ManagementPolicy policy;
        policy.fallback = EmptyFallback::keep_previous;
        const auto small_set = select_active(predicted, small_fov, policy);
        const auto large_set = select_active(predicted, large_fov, policy);
        if (small_set.ap_ids.empty()) continue; // fallback semantics differ
        EXPECT_TRUE(std::includes(large_set.ap_ids.begin(), large_set.ap_ids.end(),
                                  small_set.ap_ids.begin(), small_set.ap_ids.end()));
    }
}

TEST(SelectActive, DeterministicInInputs) {
    std::vector<APState> aps = {sector_ap(1, {0, 0, 0}, 0), sector_ap(7, {16, 0, 0}, M_PI)};
    ManagementPolicy policy;
    const auto predicted = predicted_at({{7.9, 0.2, -0.1}});
    const auto a = select_active(predicted, aps, policy);
    const auto b = select_active(predicted, aps, policy);
    EXPECT_EQ(a.ap_ids, b.ap_ids);
}

TEST(GateMeasurements, EmptyActiveSetYieldsNothing) {
    std::map<int, MeasurementSet> per_ap;
    per_ap[1].items = {pm_at(1, 1)};
    const auto out = gate_measurements(per_ap, ActiveSet{});
    EXPECT_TRUE(out.items.empty());
}

TEST(GateMeasurements, AllActiveConcatenatesEverything) {
    std::map<int, MeasurementSet> per_ap;
    ActiveSet active;
    for (int ap = 0; ap < 8; ++ap) {
        per_ap[ap].items = {pm_at(ap, ap), pm_at(ap + 0.5, ap)};
        active.ap_ids.insert(ap);
    }
    const auto out = gate_measurements(per_ap, active);
    EXPECT_EQ(out.items.size(), 16u);
}

TEST(GateMeasurements, SubsetInAscendingApOrder) {
    std::map<int, MeasurementSet> per_ap;
    per_ap[7].items = {pm_at(70, 7), pm_at(71, 7)};
    per_ap[1].items = {pm_at(10, 1)};
    per_ap[4].items = {pm_at(40, 4)}; // inactive, must be dropped
    ActiveSet active;
    active.ap_ids = {1, 7};
    const auto out = gate_measurements(per_ap, active);
    ASSERT_EQ(out.items.size(), 3u);
    EXPECT_EQ(out.items[0].z.x(), 10);
    EXPECT_EQ(out.items[1].z.x(), 70);
    EXPECT_EQ(out.items[2].z.x(), 71);
}

TEST(GateMeasurements, ActiveApWithoutMeasurementsIsFine) {
    std::map<int, MeasurementSet> per_ap;
    per_ap[1].items = {pm_at(10, 1)};
    ActiveSet active;
    active.ap_ids = {1, 9}; // AP 9 has nothing this step
    const auto out = gate_measurements(per_ap, active);
    EXPECT_EQ(out.items.size(), 1u);
}

TEST(ValidatePolicy, FixedSubsetNeedsIds) {
    ManagementPolicy policy;
    policy.kind = PolicyKind::fixed_subset;
    EXPECT_THROW(validate_policy(policy), ValidationError);
    policy.fixed_ids = {1};
    EXPECT_NO_THROW(validate_policy(policy));
}
