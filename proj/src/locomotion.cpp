#include "telelink/locomotion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telelink {

namespace {

double deadzone_map(double angle, double gain, double deadzone) {
    const double mag = std::abs(angle);
    if (mag <= deadzone) return 0.0;
    return std::copysign(gain * (mag - deadzone), angle);
}

}  // namespace

void RudderState::validate() const {
    const double lim = std::numbers::pi / 2.0;
    if (!(std::abs(pitch) <= lim && std::abs(roll) <= lim && std::abs(yaw) <= lim))
        throw std::invalid_argument("rudder: deflections must be within +-pi/2");
    if (!std::isfinite(pitch) || !std::isfinite(roll) || !std::isfinite(yaw))
        throw std::invalid_argument("rudder: deflections must be finite");
}

void MecanumBase::validate() const {
    if (!(wheel_radius > 0.0)) throw std::invalid_argument("base: wheel radius must be > 0");
    if (!(half_length > 0.0 && half_width > 0.0))
        throw std::invalid_argument("base: geometry must be positive");
    if (!(wheel_speed_limit > 0.0))
        throw std::invalid_argument("base: wheel speed limit must be > 0");
}

void TwistLimits::validate() const {
    if (!(v_cap > 0.0 && v_cap <= v_capability))
        throw std::invalid_argument("limits: need 0 < v_cap <= v_capability");
    if (!(w_cap > 0.0)) throw std::invalid_argument("limits: w_cap must be > 0");
}

Twist rudder_to_twist(const RudderState& rudder, double k_lin, double k_ang, double deadzone) {
    rudder.validate();
    if (!(k_lin >= 0.0) || !(k_ang >= 0.0) || !(deadzone >= 0.0))
        throw std::invalid_argument("rudder_to_twist: gains and deadzone must be >= 0");
    Twist t;
    t.linear.x() = deadzone_map(rudder.pitch, k_lin, deadzone);
    t.linear.y() = deadzone_map(rudder.roll, k_lin, deadzone);
    t.angular.z() = deadzone_map(rudder.yaw, k_ang, deadzone);
    return t;
}

Twist clamp_twist(const Twist& twist, const TwistLimits& limits) {
    limits.validate();
    Twist out;  // non-planar components cannot be executed by the base
    out.linear.x() = twist.linear.x();
    out.linear.y() = twist.linear.y();
    const double v = out.linear.head<2>().norm();
    if (v > limits.v_cap) out.linear.head<2>() *= limits.v_cap / v;
    out.angular.z() = std::clamp(twist.angular.z(), -limits.w_cap, limits.w_cap);
    return out;
}

WheelSpeeds twist_to_wheels(const MecanumBase& base, const Twist& twist) {
    base.validate();
    const double vx = twist.linear.x();
    const double vy = twist.linear.y();
    const double wz = twist.angular.z();
    const double l = base.half_length + base.half_width;
    const double r = base.wheel_radius;
    WheelSpeeds out;
    out.speeds = {
        (vx - vy - l * wz) / r,
        (vx + vy + l * wz) / r,
        (vx + vy - l * wz) / r,
        (vx - vy + l * wz) / r,
    };
    double peak = 0.0;
    for (double w : out.speeds) peak = std::max(peak, std::abs(w));
    out.within_limits = peak <= base.wheel_speed_limit;
    out.feasible_scale = peak > base.wheel_speed_limit ? base.wheel_speed_limit / peak : 1.0;
    return out;
}

TwistEstimate wheels_to_twist(const MecanumBase& base, const std::array<double, 4>& wheels) {
    base.validate();
    const double l = base.half_length + base.half_width;
    const double r = base.wheel_radius;
    const auto& [fl, fr, rl, rr] = wheels;
    TwistEstimate out;
    out.twist.linear.x() = r * (fl + fr + rl + rr) / 4.0;
    out.twist.linear.y() = r * (-fl + fr + rl - rr) / 4.0;
    out.twist.angular.z() = r * (-fl + fr - rl + rr) / (4.0 * l);
    const auto refit = twist_to_wheels(base, out.twist).speeds;
    double ss = 0.0;
    for (int i = 0; i < 4; ++i) ss += (refit[i] - wheels[i]) * (refit[i] - wheels[i]);
    out.residual = std::sqrt(ss);
    return out;
}

PlanarPose integrate_odometry(const PlanarPose& pose, const Twist& body_twist, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("integrate_odometry: dt must be >= 0");
    const double vx = body_twist.linear.x();
    const double vy = body_twist.linear.y();
    const double w = body_twist.angular.z();
    double dxb, dyb;
    if (std::abs(w * dt) < 1e-8) {
        // second-order series, continuous with the exact arc below
        dxb = vx * dt - 0.5 * vy * w * dt * dt;
        dyb = vy * dt + 0.5 * vx * w * dt * dt;
    } else {
        const double s = std::sin(w * dt), c = std::cos(w * dt);
        dxb = (vx * s + vy * (c - 1.0)) / w;
        dyb = (vx * (1.0 - c) + vy * s) / w;
    }
    PlanarPose out;
    const double cth = std::cos(pose.theta), sth = std::sin(pose.theta);
    out.x = pose.x + cth * dxb - sth * dyb;
    out.y = pose.y + sth * dxb + cth * dyb;
    out.theta = pose.theta + w * dt;
    return out;
}

}  // namespace telelink
