#pragma once

#include "flexpath/error.hpp"
#include "flexpath/trajectory.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace flexpath {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Frame map R(t) from the inertial frame to the moving one, and its time derivative.
struct RotationSample {
    Mat3 R = Mat3::Identity();
    Mat3 Rdot = Mat3::Zero();

    static constexpr double tolerance = 1e-10;

    void validate() const
    {
        if (!R.allFinite() || !Rdot.allFinite()) {
            throw InvalidRotation("rotation sample has non-finite entries");
        }
        const double orth = (R.transpose() * R - Mat3::Identity()).norm();
        if (orth > tolerance) {
            throw InvalidRotation("R^T R deviates from identity by " + std::to_string(orth));
        }
        if (std::abs(R.determinant() - 1.0) > tolerance) {
            throw InvalidRotation("det R is not +1");
        }
    }
};

/// Rotation by `angle` about unit axis `axis` (Rodrigues), with derivative for rate `rate`.
inline RotationSample axis_rotation(const Vec3& axis, double angle, double rate)
{
    const Vec3 n = axis.normalized();
    Mat3 K;
    K << 0.0, -n.z(), n.y(), n.z(), 0.0, -n.x(), -n.y(), n.x(), 0.0;
    const double s = std::sin(angle);
    const double c = std::cos(angle);
    RotationSample rs;
    rs.R = Mat3::Identity() + s * K + (1.0 - c) * K * K;
    rs.Rdot = rate * (c * K + s * K * K);
    return rs;
}

struct AngularVelocity {
    Vec3 omega = Vec3::Zero();
    double skew_defect = 0.0;  // ||Omega + Omega^T||, Omega = Rdot R^T
};

inline AngularVelocity angular_velocity(const RotationSample& rs)
{
    rs.validate();
    const Mat3 Omega = rs.Rdot * rs.R.transpose();
    AngularVelocity out;
    out.omega = Vec3(Omega(2, 1), Omega(0, 2), Omega(1, 0));
    out.skew_defect = (Omega + Omega.transpose()).norm();
    if (out.skew_defect >= 1e-8 * std::max(1.0, Omega.norm())) {
        throw InvalidRotation("Rdot R^T is not skew-symmetric (defect " +
                              std::to_string(out.skew_defect) + ")");
    }
    return out;
}

/// Rotation and translation of the moving frame relative to the inertial one.
struct FrameMotion {
    Vec3 omega = Vec3::Zero();
    Vec3 omega_dot = Vec3::Zero();
    Vec3 A = Vec3::Zero();  // acceleration of the moving origin
};

/// Inertial acceleration of a point with frame-relative position r, velocity Dr, acceleration a.
inline Vec3 inertial_acceleration(const Vec3& a, const FrameMotion& fm, const Vec3& r, const Vec3& Dr)
{
    return a + fm.omega_dot.cross(r) + 2.0 * fm.omega.cross(Dr) + fm.omega.cross(fm.omega.cross(r)) +
           fm.A;
}

struct FictitiousForces {
    Vec3 euler;
    Vec3 coriolis;
    Vec3 centrifugal;
    Vec3 translational;

    [[nodiscard]] Vec3 total() const { return euler + coriolis + centrifugal + translational; }
};

/// Right-hand-side terms of Newton's law written in the moving frame (added to the real force).
inline FictitiousForces fictitious_forces(double m, const FrameMotion& fm, const Vec3& r, const Vec3& Dr)
{
    detail::require(m > 0.0, "mass must be positive");
    return {-m * fm.omega_dot.cross(r), -2.0 * m * fm.omega.cross(Dr),
            -m * fm.omega.cross(fm.omega.cross(r)), m * fm.A};
}

/// Transverse load per unit length on the rotating rod, split into its four contributions.
struct BeamLoad {
    double acceleration = 0.0;  // rho * r_ddot * sin(theta)
    double gravity = 0.0;       // -rho * g * cos(theta)
    double centrifugal = 0.0;   // rho * theta_dot^2 * w
    double euler = 0.0;         // -rho * theta_ddot * x
    double total = 0.0;
};

inline BeamLoad beam_load(double x, double w, const KinematicSample& theta, const KinematicSample& r,
                          double rho, double g)
{
    BeamLoad q;
    q.acceleration = rho * r.d2 * std::sin(theta.value);
    q.gravity = -rho * g * std::cos(theta.value);
    q.centrifugal = rho * theta.d1 * theta.d1 * w;
    q.euler = -rho * theta.d2 * x;
    q.total = q.acceleration + q.gravity + q.centrifugal + q.euler;
    return q;
}

struct DimensionlessGroups {
    double lambda = 0.0;  // E I T^2 / (rho L^4)
    double Fr = 0.0;      // sqrt(W / (g T^2))
    double mu = 0.0;      // R / W
    double nu = 0.0;      // L / W
};

inline DimensionlessGroups nondimensional_groups(double E, double I, double rho, double L, double T,
                                                 double W, double R, double g)
{
    for (double v : {E, I, rho, L, T, W, R, g}) {
        detail::require(v > 0.0 && std::isfinite(v),
                        "non-dimensional groups need strictly positive inputs");
    }
    return {E * I * T * T / (rho * L * L * L * L), std::sqrt(W / (g * T * T)), R / W, L / W};
}

} // namespace flexpath
