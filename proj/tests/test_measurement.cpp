#include <gtest/gtest.h>

#include <cmath>

#include "cotrack/measurement.hpp"
#include "cotrack/rng.hpp"
#include "oracles.hpp"

using namespace cotrack;

namespace {

Mat3 random_spd(RandomStream& rng, double scale = 1.0) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = rng.gaussian();
    return scale * (a * a.transpose()) + 0.05 * scale * Mat3::Identity();
}

APState ap_at(const Vec3& pos, const Rotation3& rot = {}) {
    APState ap;
    ap.position = pos;
    ap.orientation = rot;
    return ap;
}

RangeBearingMeasurement rb(double delay, double elevation, double azimuth,
                           const Mat3& cov = Mat3::Zero()) {
    RangeBearingMeasurement m;
    m.delay = delay;
    m.elevation = elevation;
    m.azimuth = azimuth;
    m.cov = cov;
    return m;
}

PositionMeasurement pm(const Vec3& z, const Mat3& cov, int ap_id = 0) {
    PositionMeasurement p;
    p.z = z;
    p.cov = cov;
    p.source_ap_ids = {ap_id};
    return p;
}

} // namespace

TEST(FactorizePsd, Identity) {
    EXPECT_LT((factorize_psd(Mat3::Identity()) - Mat3::Identity()).norm(), 1e-15);
}

TEST(FactorizePsd, DiagonalSquareRoots) {
    const Mat3 c = Vec3(4, 9, 16).asDiagonal();
    const Mat3 expected = Vec3(2, 3, 4).asDiagonal();
    EXPECT_LT((factorize_psd(c) - expected).norm(), 1e-15);
}

TEST(FactorizePsd, ReconstructsRandomSpd) {
    RandomStream rng(1, RngPurpose::trajectory);
    for (int i = 0; i < 50; ++i) {
        const Mat3 a = random_spd(rng);
        const Eigen::MatrixXd L = factorize_psd(a);
        EXPECT_TRUE(L.isLowerTriangular());
        EXPECT_LT((L * L.transpose() - a).norm(), 1e-10 * std::max(1.0, a.norm()));
    }
}

TEST(FactorizePsd, RankDeficientGetsZeroColumns) {
    const Vec3 v(1.0, -2.0, 0.5);
    const Mat3 a = v * v.transpose(); // rank 1
    const Eigen::MatrixXd L = factorize_psd(a);
    EXPECT_LT((L * L.transpose() - a).norm(), 1e-10);
    EXPECT_LT((factorize_psd(Mat3::Zero())).norm(), 1e-15);
}

TEST(FactorizePsd, TinyDelayScaleStaysRelative) {
    // delay variances live around 1e-19 s^2; the tolerance must scale
    const Mat3 c = Vec3(1.1e-19, 4e-4, 4e-4).asDiagonal();
    const Eigen::MatrixXd L = factorize_psd(c);
    EXPECT_LT((L * L.transpose() - c).norm(), 1e-12);
    EXPECT_GT(L(0, 0), 0.0);
}

TEST(FactorizePsd, RejectsAsymmetricAndIndefinite) {
    Mat3 asym = Mat3::Identity();
    asym(0, 1) = 0.5;
    EXPECT_THROW(factorize_psd(asym), ValidationError);
    const Mat3 indef = Vec3(1, -1, 1).asDiagonal();
    EXPECT_THROW(factorize_psd(indef), ValidationError);
}

TEST(CubatureTransform, ZeroCovarianceOnAxis) {
    const double c = 299792458.0;
    const auto out = cubature_transform(rb(2.0 / c, M_PI / 2, 0.0), ap_at(Vec3::Zero()), c);
    EXPECT_LT((out.z - Vec3(2, 0, 0)).norm(), 1e-12);
    EXPECT_LT(out.cov.norm(), 1e-12);
}

TEST(CubatureTransform, ZeroCovarianceRigidTransform) {
    const double c = 299792458.0;
    const auto rot = Rotation3::from_yaw_pitch_roll(M_PI / 2, 0, 0);
    const auto out = cubature_transform(rb(1.0 / c, M_PI / 2, 0.0), ap_at({1, 1, 0}, rot), c);
    EXPECT_LT((out.z - Vec3(1, 2, 0)).norm(), 1e-12);
    EXPECT_LT(out.cov.norm(), 1e-12);
}

TEST(CubatureTransform, ZeroCovarianceEqualsDeterministicMap) {
    RandomStream rng(2, RngPurpose::trajectory);
    const double c = 299792458.0;
    for (int i = 0; i < 300; ++i) {
        const auto rot = Rotation3::from_yaw_pitch_roll(rng.uniform(-3, 3), rng.uniform(-1.5, 1.5),
                                                        rng.uniform(-3, 3));
        const APState ap = ap_at(5.0 * Vec3(rng.gaussian3()), rot);
        const double range = rng.uniform(0.5, 20.0);
        const double elevation = rng.uniform(0.0, M_PI);
        const double azimuth = rng.uniform(-M_PI, M_PI);
        const auto out = cubature_transform(rb(range / c, elevation, azimuth), ap, c);
        const Vec3 expected =
            ap.position + range * (ap.orientation * bearing_to_direction(azimuth, elevation));
        EXPECT_LT((out.z - expected).norm(), 1e-12 * (1.0 + expected.norm()));
    }
}

TEST(CubatureTransform, OutputCovarianceIsPsd) {
    RandomStream rng(3, RngPurpose::trajectory);
    const double c = 299792458.0;
    for (int i = 0; i < 200; ++i) {
        Mat3 cov = random_spd(rng, 1e-3);
        cov.row(0) *= 1e-8; // bring the delay variance to a physical scale
        cov.col(0) *= 1e-8;
        const auto m = rb(rng.uniform(1e-9, 1e-7), rng.uniform(0.1, M_PI - 0.1),
                          rng.uniform(-M_PI, M_PI), Mat3(symmetrized(cov)));
        const auto out = cubature_transform(m, ap_at(Vec3::Zero()), c);
        EXPECT_TRUE(is_symmetric(out.cov));
        EXPECT_GE(min_eigenvalue(out.cov), -1e-9);
    }
}

TEST(CubatureTransform, MatchesMonteCarloOracle) {
    const double c = 299792458.0;
    const double range = 5.0;
    const double sr = 0.1, sang = 0.02;
    const Mat3 cov = Vec3(sr * sr / (c * c), sang * sang, sang * sang).asDiagonal();
    const auto m = rb(range / c, M_PI / 3, 0.7, cov);
    const APState ap = ap_at({1, -2, 0.5}, Rotation3::from_yaw_pitch_roll(0.4, -0.2, 0.1));

    const auto out = cubature_transform(m, ap, c);
    const auto mc = oracle::mc_push_through(m, ap, c, 1000000, 99);

    EXPECT_LT((out.z - mc.mean).norm(), 1e-2);
    EXPECT_LT((out.cov - mc.cov).norm(), 0.10 * mc.cov.norm());
}

TEST(CubatureTransform, ConvergesToMonteCarloAsSpreadShrinks) {
    const double c = 299792458.0;
    const APState ap = ap_at({0.5, 0.5, 0});
    double prev_mean_err = std::numeric_limits<double>::infinity();
    double prev_cov_err = std::numeric_limits<double>::infinity();
    for (int rung = 0; rung < 3; ++rung) {
        const double scale = std::pow(0.25, rung);
        const double sr = 0.2 * scale, sang = 0.05 * scale;
        const Mat3 cov = Vec3(sr * sr / (c * c), sang * sang, sang * sang).asDiagonal();
        const auto m = rb(4.0 / c, M_PI / 2.3, -0.4, cov);
        const auto out = cubature_transform(m, ap, c);
        const auto mc = oracle::mc_push_through(m, ap, c, 400000, 7);
        const double mean_err = (out.z - mc.mean).norm();
        const double cov_err = (out.cov - mc.cov).norm();
        EXPECT_LT(mean_err, prev_mean_err) << "rung " << rung;
        EXPECT_LT(cov_err, prev_cov_err) << "rung " << rung;
        prev_mean_err = mean_err;
        prev_cov_err = cov_err;
    }
}

TEST(CubatureTransform, ClampsNegativeDelayPoints) {
    const double c = 299792458.0;
    // huge delay variance relative to the delay itself
    const Mat3 cov = Vec3(1e-15, 1e-4, 1e-4).asDiagonal();
    TransformDiagnostics diag;
    const auto out =
        cubature_transform(rb(1e-9, M_PI / 2, 0.0, cov), ap_at(Vec3::Zero()), c, &diag);
    EXPECT_GT(diag.clamped_delays, 0);
    EXPECT_TRUE(out.z.allFinite());
}

TEST(CubatureTransform, RejectsBadInputs) {
    const Mat3 indef = Vec3(1, -1, 1).asDiagonal();
    EXPECT_THROW(cubature_transform(rb(1e-8, 1.0, 0.0, indef), ap_at(Vec3::Zero())),
                 ValidationError);
    EXPECT_THROW(cubature_transform(rb(-1e-9, 1.0, 0.0), ap_at(Vec3::Zero())), ValidationError);
}

TEST(ClusterProxy, IdenticalPairHalvesCovariance) {
    const Mat3 c = 0.04 * Mat3::Identity();
    MeasurementSet set;
    set.items = {pm({1, 2, 3}, c, 1), pm({1, 2, 3}, c, 7)};
    const auto out = cluster_proxy(set, 0.5);
    ASSERT_EQ(out.items.size(), 1u);
    EXPECT_LT((out.items[0].z - Vec3(1, 2, 3)).norm(), 1e-9);
    EXPECT_LT((out.items[0].cov - c / 2).norm(), 1e-9);
    EXPECT_EQ(out.items[0].source_ap_ids, (std::set<int>{1, 7}));
}

TEST(ClusterProxy, WellSeparatedPassThrough) {
    const Mat3 c = 0.04 * Mat3::Identity();
    MeasurementSet set;
    set.items = {pm({0, 0, 0}, c, 1), pm({1.2, 0, 0}, c, 7)}; // farther than the gate
    const auto out = cluster_proxy(set, 0.5);
    ASSERT_EQ(out.items.size(), 2u);
    EXPECT_LT((out.items[0].z - Vec3(0, 0, 0)).norm(), 1e-12);
    EXPECT_LT((out.items[1].z - Vec3(1.2, 0, 0)).norm(), 1e-12);
    EXPECT_LT((out.items[0].cov - c).norm(), 1e-12);
}

TEST(ClusterProxy, ThreeMeasurementExample) {
    const Mat3 c = 0.04 * Mat3::Identity();
    MeasurementSet set;
    set.items = {pm({0, 0, 0}, c, 0), pm({0.1, 0, 0}, c, 1), pm({5, 0, 0}, c, 2)};
    const auto out = cluster_proxy(set, 0.5);
    ASSERT_EQ(out.items.size(), 2u);
    EXPECT_LT((out.items[0].z - Vec3(0.05, 0, 0)).norm(), 1e-12);
    EXPECT_LT((out.items[0].cov - 0.02 * Mat3::Identity()).norm(), 1e-12);
    EXPECT_LT((out.items[1].z - Vec3(5, 0, 0)).norm(), 1e-12);
}

TEST(ClusterProxy, SingularMemberCovarianceIsRegularized) {
    MeasurementSet set;
    set.items = {pm({1, 0, 0}, Mat3::Zero(), 1), pm({1, 0, 0}, Mat3::Zero(), 2)};
    const auto out = cluster_proxy(set, 0.5);
    ASSERT_EQ(out.items.size(), 1u);
    EXPECT_TRUE(out.items[0].z.allFinite());
    EXPECT_LT((out.items[0].z - Vec3(1, 0, 0)).norm(), 1e-9);
}

TEST(ClusterProxy, PropertiesOnRandomSets) {
    RandomStream rng(17, RngPurpose::trajectory);
    for (int trial = 0; trial < 60; ++trial) {
        MeasurementSet set;
        const int n = 2 + static_cast<int>(rng.uniform01() * 10);
        for (int i = 0; i < n; ++i) {
            // anisotropic covariances included
            set.items.push_back(pm(2.0 * Vec3(rng.gaussian3()), random_spd(rng, 0.02), i));
        }
        const double gate = rng.uniform(0.2, 1.5);
        const auto once = cluster_proxy(set, gate);
        const auto twice = cluster_proxy(once, gate);

        // never more outputs than inputs
        EXPECT_LE(once.items.size(), set.items.size());

        // idempotent
        ASSERT_EQ(once.items.size(), twice.items.size());
        for (std::size_t i = 0; i < once.items.size(); ++i) {
            EXPECT_LT((once.items[i].z - twice.items[i].z).norm(), 1e-12);
            EXPECT_LT((once.items[i].cov - twice.items[i].cov).norm(), 1e-12);
        }
    }
}

TEST(ClusterProxy, FusionNeverIncreasesCovariance) {
    RandomStream rng(19, RngPurpose::trajectory);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 4);
        MeasurementSet set;
        for (int i = 0; i < n; ++i)
            set.items.push_back(pm(0.05 * Vec3(rng.gaussian3()), random_spd(rng, 0.05), i));
        const auto out = cluster_proxy(set, 10.0); // everything clusters
        ASSERT_EQ(out.items.size(), 1u);
        for (const auto& member : set.items) {
            // Loewner order: member.cov - proxy.cov is PSD
            EXPECT_GE(min_eigenvalue(member.cov - out.items[0].cov), -1e-9);
        }
    }
}

TEST(ClusterProxy, RejectsNonPositiveGate) {
    EXPECT_THROW(cluster_proxy(MeasurementSet{}, 0.0), ValidationError);
}
