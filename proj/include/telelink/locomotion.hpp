// Omnidirectional base: rudder mapping, velocity caps, Mecanum inverse and
// forward kinematics, and planar odometry.
#pragma once

#include <array>

#include "telelink/geometry.hpp"

namespace telelink {

/// Foot rudder deflections in radians, each within [-pi/2, pi/2].
/// pitch -> forward, roll -> lateral, yaw -> turn.
struct RudderState {
    double pitch = 0.0;
    double roll = 0.0;
    double yaw = 0.0;

    void validate() const;
};

/// Mecanum base geometry, rollers at 45 deg. Wheel order: front-left,
/// front-right, rear-left, rear-right.
struct MecanumBase {
    double wheel_radius = 0.05;      // m
    double half_length = 0.25;       // lx, m
    double half_width = 0.25;        // ly, m
    double wheel_speed_limit = 80.0; // rad/s

    void validate() const;
};

struct TwistLimits {
    double v_cap = 1.5;         // commanded linear speed cap, m/s
    double v_capability = 2.5;  // platform capability, m/s (cap must stay below)
    double w_cap = 1.5;         // rad/s

    void validate() const;
};

struct PlanarPose {
    double x = 0.0, y = 0.0, theta = 0.0;
};

struct WheelSpeeds {
    std::array<double, 4> speeds{};  // rad/s, {fl, fr, rl, rr}
    bool within_limits = true;
    double feasible_scale = 1.0;  // largest s <= 1 with s * speeds feasible
};

struct TwistEstimate {
    Twist twist{};
    double residual = 0.0;  // least-squares residual of the wheel fit, rad/s
};

/// Linear mapping with a continuous deadzone: zero inside, then
/// gain * (|angle| - deadzone) in the deflection direction.
Twist rudder_to_twist(const RudderState& rudder, double k_lin, double k_ang, double deadzone);

/// Scales the planar components down to the caps, preserving the direction of
/// (vx, vy). Exact at the cap boundary.
Twist clamp_twist(const Twist& twist, const TwistLimits& limits);

/// Inverse kinematics. With L = lx + ly and R the wheel radius:
///   w_fl = (vx - vy - L*wz) / R      w_fr = (vx + vy + L*wz) / R
///   w_rl = (vx + vy - L*wz) / R      w_rr = (vx - vy + L*wz) / R
WheelSpeeds twist_to_wheels(const MecanumBase& base, const Twist& twist);

/// Least-squares forward kinematics (closed form, pseudoinverse of the IK
/// matrix). Exact inverse of twist_to_wheels for consistent wheel speeds.
TwistEstimate wheels_to_twist(const MecanumBase& base, const std::array<double, 4>& wheels);

/// Integrates a body twist over dt exactly (constant-twist arc), returning the
/// new world pose. Series fallback near wz = 0 keeps the result smooth.
PlanarPose integrate_odometry(const PlanarPose& pose, const Twist& body_twist, double dt);

}  // namespace telelink
