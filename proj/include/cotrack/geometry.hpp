#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cotrack/errors.hpp"

namespace cotrack {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

/// Proper rotation matrix (orthonormal, det +1). Maps AP-local coordinates
/// to the global frame; the AP boresight is local +x.
class Rotation3 {
public:
    Rotation3() : m_(Mat3::Identity()) {}

    /// Validates orthonormality and det = +1 within 1e-9.
    static Rotation3 from_matrix(const Mat3& m) {
        const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (!(ortho <= 1e-9))
            throw ValidationError("Rotation3: matrix is not orthonormal");
        if (!(std::abs(m.determinant() - 1.0) <= 1e-9))
            throw ValidationError("Rotation3: determinant is not +1");
        return Rotation3(m, 0);
    }

    /// Intrinsic Z-Y-X convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
    static Rotation3 from_yaw_pitch_roll(double yaw, double pitch, double roll) {
        Mat3 m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
        return Rotation3(m, 0);
    }

    const Mat3& matrix() const { return m_; }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation3 inverse() const { return Rotation3(m_.transpose(), 0); }

private:
    Rotation3(const Mat3& m, int) : m_(m) {}
    Mat3 m_;
};

enum class FovKind { sector, sphere, all };

/// Service region of an AP. `sector` bounds both range and the angle off
/// boresight; `sphere` bounds range only; `all` is unbounded.
struct FoV {
    FovKind kind = FovKind::all;
    double d_th = 0.0;     // m
    double theta_th = 0.0; // rad, sector only
};

inline void validate_fov(const FoV& fov) {
    if (fov.kind == FovKind::all) return;
    if (!(fov.d_th > 0.0))
        throw ValidationError("FoV: d_th must be > 0");
    if (fov.kind == FovKind::sector &&
        !(fov.theta_th > 0.0 && fov.theta_th <= M_PI))
        throw ValidationError("FoV: theta_th must be in (0, pi]");
}

/// Fixed AP pose and field of view.
struct APState {
    int id = 0;
    Vec3 position = Vec3::Zero();
    Rotation3 orientation;
    FoV fov;

    Vec3 boresight() const { return orientation * Vec3::UnitX(); }
};

/// Angle between two nonzero vectors, clamped to [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw ValidationError("angle_between: zero-norm input");
    const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
    return std::acos(c);
}

/// Unit direction for (azimuth from +x, elevation measured from +z).
inline Vec3 bearing_to_direction(double azimuth, double elevation) {
    const double se = std::sin(elevation);
    return {std::cos(azimuth) * se, std::sin(azimuth) * se, std::cos(elevation)};
}

/// Membership test against the AP's FoV. Boundary points count as inside;
/// a point coincident with the AP is inside.
inline bool fov_contains(const APState& ap, const Vec3& p) {
    if (ap.fov.kind == FovKind::all) return true;
    const Vec3 d = p - ap.position;
    const double range = d.norm();
    if (range > ap.fov.d_th) return false;
    if (ap.fov.kind == FovKind::sphere) return true;
    if (range == 0.0) return true; // angle undefined, treated as inside
    return angle_between(d, ap.boresight()) <= ap.fov.theta_th;
}

/// Range and bearing of `p` in the AP's local frame (the inverse of the
/// bearing-to-position map used by the measurement transform).
struct LocalBearing {
    double range = 0.0;     // m
    double elevation = 0.0; // rad, [0, pi]
    double azimuth = 0.0;   // rad, (-pi, pi]
};

inline LocalBearing local_bearing(const APState& ap, const Vec3& p) {
    const Vec3 d_local = ap.orientation.inverse() * (p - ap.position);
    const double range = d_local.norm();
    if (range == 0.0)
        throw ValidationError("local_bearing: point coincides with AP");
    LocalBearing b;
    b.range = range;
    b.elevation = std::acos(std::clamp(d_local.z() / range, -1.0, 1.0));
    b.azimuth = std::atan2(d_local.y(), d_local.x());
    return b;
}

} // namespace cotrack
