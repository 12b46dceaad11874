// Force-feedback processing: Cartesian impedance, wrench filtering, joint
// limit repulsion, fade-in after communication loss, and hand retargeting.
#pragma once

#include "telelink/kinematics.hpp"

namespace telelink {

struct ImpedanceGains {
    double kp_lin = 400.0;  // N/m
    double kd_lin = 40.0;   // N*s/m
    double kp_ang = 30.0;   // N*m/rad
    double kd_ang = 3.0;    // N*m*s/rad

    void validate() const;  // throws on negative gains
};

/// First-order low-pass, y += alpha * (x - y), alpha = dt / (tau + dt) with
/// tau = 1 / (2*pi*cutoff). State is the last output vector.
class LowPassFilter {
  public:
    /// Requires 0 < cutoff_hz < sample_hz / 2.
    LowPassFilter(double cutoff_hz, double sample_hz, int dims);

    const VecX& step(const VecX& sample);
    void reset(const VecX& value);
    const VecX& state() const { return state_; }
    double alpha() const { return alpha_; }

  private:
    double alpha_;
    VecX state_;
};

/// Transparency-mode velocity from a measured operator-side wrench: zero inside
/// the deadband, then linear in the excess magnitude along the wrench direction.
Twist weightless_assist(const Wrench& measured, double gain_lin, double gain_ang,
                        double deadband);

/// Cartesian impedance law: F = Kp * e_pose + Kd * (target_twist - twist).
Wrench impedance_wrench(const Pose6D& target, const Twist& target_twist, const Pose6D& pose,
                        const Twist& twist, const ImpedanceGains& gains);

/// Joint torques tau = J^T * impedance_wrench(...), clamped elementwise to
/// +-tau_max. Pose and twist of the end effector are taken from the chain state.
VecX impedance_step(const ChainModel& model, const JointState& state, const Pose6D& target,
                    const Twist& target_twist, const ImpedanceGains& gains);

/// Repulsive joint torques pushing away from the position limits:
/// tau = -k_rep * limit_proximity(model, q, margin). Zero outside the margin.
VecX limit_repulsion(const ChainModel& model, const VecX& q, double margin, double k_rep);

/// Ramp state for resuming control after a communication loss.
struct FadeState {
    Pose6D start_pose{};
    double progress = 0.0;  // [0, 1]
    double duration = 1.0;  // seconds, > 0
};

/// Advances the fade by dt and returns the blended target: smoothstep
/// (3u^2 - 2u^3) interpolation of translation (lerp) and rotation (slerp)
/// from start_pose to final_target. Returns final_target exactly at u = 1.
Pose6D fade_target(FadeState& fade, const Pose6D& final_target, double dt);

/// Linear retargeting from 20 glove joint angles to the actuated hand DoF,
/// clamped to the output range rows.
struct HandMapping {
    Eigen::MatrixXd retarget;  // (actuated_dof x 20)
    VecX out_min, out_max;     // sized actuated_dof
    VecX brake_threshold;      // amperes, one per finger (5)

    int actuated_dof() const { return static_cast<int>(retarget.rows()); }
    void validate() const;
};

VecX retarget_fingers(const HandMapping& mapping, const VecX& glove_joints);

/// Per-finger brake latch with 10% release hysteresis: engages when the motor
/// current exceeds the threshold, releases below 0.9x the threshold.
struct FingerBrakes {
    std::vector<bool> engaged;
};

const std::vector<bool>& finger_feedback(const HandMapping& mapping, FingerBrakes& brakes,
                                         const VecX& motor_currents);

}  // namespace telelink
