// Serial-chain forward kinematics, geometric Jacobian, joint-limit proximity,
// and the operator-side avatar state predictor.
#pragma once

#include <vector>

#include "telelink/geometry.hpp"

namespace telelink {

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// One revolute joint: fixed parent-to-joint transform, then rotation about
/// `axis` (unit, expressed in the joint frame).
struct RevoluteJoint {
    Vec3 axis{Vec3::UnitZ()};
    Pose6D origin{};
};

/// Fixed-base serial chain. `tool` is the end-effector (palm) frame relative
/// to the last joint frame. Limit vectors are sized dof(); q_min < q_max,
/// qd_max > 0, tau_max > 0 throughout.
struct ChainModel {
    std::vector<RevoluteJoint> joints;
    VecX q_min, q_max;
    VecX qd_max;
    VecX tau_max;
    Pose6D tool{};

    int dof() const { return static_cast<int>(joints.size()); }

    /// Throws std::invalid_argument on inconsistent sizes or bad limits.
    void validate() const;

    /// Conservative reach bound: sum of joint-origin and tool offsets (m).
    double total_length() const;
};

struct JointState {
    VecX q;
    VecX qd;
};

struct PredictedAvatarState {
    JointState state;
    double prediction_horizon = 0.0;  // seconds actually integrated
    bool stale = false;
};

/// T = prod_i (origin_i * Rot(axis_i, q_i)) * tool.
Pose6D forward_kinematics(const ChainModel& model, const VecX& q);

/// Geometric Jacobian, rows [linear; angular], world frame.
/// Column i: linear = z_i x (p_eef - p_i), angular = z_i.
Jacobian jacobian(const ChainModel& model, const VecX& q);

/// Signed proximity to the joint limits. Zero when q is further than `margin`
/// from both limits; ramps linearly to +margin at the upper limit and -margin
/// at the lower limit. Continuous in q.
VecX limit_proximity(const ChainModel& model, const VecX& q, double margin);

/// Dead-reckons the avatar arm from its last reported state toward the last
/// commanded pose with damped-least-squares resolved-rate steps, each step
/// clamped to qd_max and to the position limits. Integration is capped at
/// `staleness_horizon`; beyond it the result is flagged stale.
PredictedAvatarState predict_avatar(const ChainModel& model, const JointState& last_reported,
                                    const Pose6D& last_command, double elapsed,
                                    double staleness_horizon = 0.1);

}  // namespace telelink
