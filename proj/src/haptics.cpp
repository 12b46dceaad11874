#include "telelink/haptics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telelink {

void ImpedanceGains::validate() const {
    if (!(kp_lin >= 0.0) || !(kd_lin >= 0.0) || !(kp_ang >= 0.0) || !(kd_ang >= 0.0))
        throw std::invalid_argument("impedance gains must be non-negative");
}

LowPassFilter::LowPassFilter(double cutoff_hz, double sample_hz, int dims) {
    if (!(cutoff_hz > 0.0) || !(sample_hz > 0.0) || cutoff_hz >= sample_hz / 2.0)
        throw std::invalid_argument("lowpass: need 0 < cutoff < sample_rate / 2");
    if (dims <= 0) throw std::invalid_argument("lowpass: dims must be positive");
    const double dt = 1.0 / sample_hz;
    const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
    alpha_ = dt / (tau + dt);
    state_ = VecX::Zero(dims);
}

const VecX& LowPassFilter::step(const VecX& sample) {
    if (sample.size() != state_.size())
        throw std::invalid_argument("lowpass: sample size mismatch");
    state_ += alpha_ * (sample - state_);
    return state_;
}

void LowPassFilter::reset(const VecX& value) {
    if (value.size() != state_.size())
        throw std::invalid_argument("lowpass: reset size mismatch");
    state_ = value;
}

namespace {

Vec3 deadband_scale(const Vec3& v, double gain, double deadband) {
    const double n = v.norm();
    if (n <= deadband) return Vec3::Zero();
    return v * (gain * (n - deadband) / n);
}

}  // namespace

Twist weightless_assist(const Wrench& measured, double gain_lin, double gain_ang,
                        double deadband) {
    if (!(gain_lin >= 0.0) || !(gain_ang >= 0.0) || !(deadband >= 0.0))
        throw std::invalid_argument("weightless_assist: gains and deadband must be >= 0");
    if (!is_finite(measured)) throw std::invalid_argument("weightless_assist: non-finite wrench");
    Twist out;
    out.linear = deadband_scale(measured.force, gain_lin, deadband);
    out.angular = deadband_scale(measured.torque, gain_ang, deadband);
    return out;
}

Wrench impedance_wrench(const Pose6D& target, const Twist& target_twist, const Pose6D& pose,
                        const Twist& twist, const ImpedanceGains& gains) {
    gains.validate();
    const Vec6 e = pose_error(target, pose);
    Wrench f;
    f.force = gains.kp_lin * e.head<3>() + gains.kd_lin * (target_twist.linear - twist.linear);
    f.torque = gains.kp_ang * e.tail<3>() + gains.kd_ang * (target_twist.angular - twist.angular);
    return f;
}

VecX impedance_step(const ChainModel& model, const JointState& state, const Pose6D& target,
                    const Twist& target_twist, const ImpedanceGains& gains) {
    if (state.q.size() != model.dof() || state.qd.size() != model.dof())
        throw std::invalid_argument("impedance_step: state size mismatch");
    const Pose6D pose = forward_kinematics(model, state.q);
    const Jacobian j = jacobian(model, state.q);
    const Twist twist = Twist::from_vec6(j * state.qd);
    const Wrench f = impedance_wrench(target, target_twist, pose, twist, gains);
    VecX tau = j.transpose() * f.as_vec6();
    return tau.cwiseMax(-model.tau_max).cwiseMin(model.tau_max);
}

VecX limit_repulsion(const ChainModel& model, const VecX& q, double margin, double k_rep) {
    if (!(k_rep >= 0.0)) throw std::invalid_argument("limit_repulsion: k_rep must be >= 0");
    return -k_rep * limit_proximity(model, q, margin);
}

Pose6D fade_target(FadeState& fade, const Pose6D& final_target, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("fade_target: dt must be >= 0");
    if (!(fade.duration > 0.0)) throw std::invalid_argument("fade_target: duration must be > 0");
    fade.progress = std::min(1.0, fade.progress + dt / fade.duration);
    const double u = fade.progress;
    if (u >= 1.0) return final_target;
    const double s = u * u * (3.0 - 2.0 * u);
    Pose6D out;
    out.translation =
        (1.0 - s) * fade.start_pose.translation + s * final_target.translation;
    out.rotation = fade.start_pose.rotation.slerp(s, final_target.rotation).normalized();
    return out;
}

void HandMapping::validate() const {
    if (retarget.cols() != 20) throw std::invalid_argument("hand: retarget must have 20 columns");
    const int n = actuated_dof();
    if (n <= 0) throw std::invalid_argument("hand: no actuated joints");
    if (out_min.size() != n || out_max.size() != n)
        throw std::invalid_argument("hand: output range size mismatch");
    for (int i = 0; i < n; ++i)
        if (!(out_min[i] <= out_max[i]))
            throw std::invalid_argument("hand: out_min must be <= out_max");
    if (brake_threshold.size() != 5)
        throw std::invalid_argument("hand: need one brake threshold per finger");
    if ((brake_threshold.array() <= 0.0).any())
        throw std::invalid_argument("hand: brake thresholds must be positive");
}

VecX retarget_fingers(const HandMapping& mapping, const VecX& glove_joints) {
    if (glove_joints.size() != 20)
        throw std::invalid_argument("retarget_fingers: expected 20 glove joints");
    VecX out = mapping.retarget * glove_joints;
    return out.cwiseMax(mapping.out_min).cwiseMin(mapping.out_max);
}

const std::vector<bool>& finger_feedback(const HandMapping& mapping, FingerBrakes& brakes,
                                         const VecX& motor_currents) {
    if (motor_currents.size() != mapping.brake_threshold.size())
        throw std::invalid_argument("finger_feedback: expected one current per finger");
    if ((motor_currents.array() < 0.0).any() || !motor_currents.allFinite())
        throw std::invalid_argument("finger_feedback: currents must be finite and >= 0");
    brakes.engaged.resize(mapping.brake_threshold.size(), false);
    for (int i = 0; i < motor_currents.size(); ++i) {
        const double thr = mapping.brake_threshold[i];
        if (!brakes.engaged[i] && motor_currents[i] > thr)
            brakes.engaged[i] = true;
        else if (brakes.engaged[i] && motor_currents[i] < 0.9 * thr)
            brakes.engaged[i] = false;
    }
    return brakes.engaged;
}

}  // namespace telelink
