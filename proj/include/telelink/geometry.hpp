// SE(3) value types shared by the arm, head, and rendering paths.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace telelink {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Quat = Eigen::Quaterniond;

/// Rigid transform: translation in meters plus a unit quaternion (w, x, y, z).
/// Every factory and operation renormalizes, so the unit-norm invariant holds
/// to well below 1e-9 at all times.
struct Pose6D {
    Vec3 translation{Vec3::Zero()};
    Quat rotation{Quat::Identity()};

    static Pose6D identity() { return {}; }
    static Pose6D from_translation(const Vec3& t) { return {t, Quat::Identity()}; }
    static Pose6D from_axis_angle(const Vec3& axis, double angle);
    static Pose6D from_parts(const Vec3& t, const Quat& q);
};

/// Spatial velocity, [linear; angular], m/s and rad/s.
struct Twist {
    Vec3 linear{Vec3::Zero()};
    Vec3 angular{Vec3::Zero()};

    Vec6 as_vec6() const;
    static Twist from_vec6(const Vec6& v);
};

/// Force/torque pair, [force; torque], N and N*m.
struct Wrench {
    Vec3 force{Vec3::Zero()};
    Vec3 torque{Vec3::Zero()};

    Vec6 as_vec6() const;
    static Wrench from_vec6(const Vec6& v);
};

Pose6D compose(const Pose6D& a, const Pose6D& b);
Pose6D inverse(const Pose6D& p);

/// Axis-angle logarithm of a unit quaternion; angle in [0, pi].
/// At exactly 180 deg the axis sign is canonicalized (largest-magnitude
/// component positive) so the result is deterministic for q and -q.
Vec3 quat_log(const Quat& q);

/// Inverse of quat_log.
Quat quat_exp(const Vec3& axis_angle);

/// 6-vector error [linear; angular]: translation difference in the common
/// reference frame, rotation as quat_log(target * current^-1).
Vec6 pose_error(const Pose6D& target, const Pose6D& current);

/// Angle of the relative rotation between two unit quaternions, in [0, pi].
double quat_angle(const Quat& a, const Quat& b);

bool is_finite(const Pose6D& p);
bool is_finite(const Twist& t);
bool is_finite(const Wrench& w);

/// Unit norm within tol and all components finite.
bool is_valid(const Pose6D& p, double tol = 1e-9);

}  // namespace telelink
