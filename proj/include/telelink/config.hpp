// System configuration: a strict, line-diagnosed YAML schema covering the
// arms, hands, base, camera head, network model, and simulation parameters.
#pragma once

#include <stdexcept>
#include <string>

#include "telelink/haptics.hpp"
#include "telelink/kinematics.hpp"
#include "telelink/locomotion.hpp"
#include "telelink/netlink/channel.hpp"
#include "telelink/televis.hpp"

namespace telelink {

/// Schema violation with 1-based source line context (-1 when unknown).
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& msg, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

struct SessionParams {
    double operator_rate = 1000.0;  // Hz, command loop
    double sensor_rate = 500.0;     // Hz, F/T sampling
    double video_rate = 45.0;       // Hz per stream
    int video_streams = 2;
    std::size_t video_frame_bytes = 270000;
    double keypoint_rate = 30.0;
    std::size_t keypoint_bytes = 272;
    double duration = 10.0;      // s
    double scene_depth = 2.0;    // m, nominal content distance for televis
    double exposure_time = 0.008;
    double encode_latency = 0.010;
    double decode_latency = 0.012;
};

struct SafetyParams {
    int comm_loss_intervals = 3;      // missed command intervals before Holding
    double fade_duration = 1.0;       // s
    double staleness_horizon = 0.1;   // s, predictor limit
};

struct SimulationParams {
    double hand_mass = 1.0;     // kg, operator hand model
    double trace_spring = 200.0;  // N/m, hand-to-trace coupling
    double eef_mass = 1.0;      // kg, avatar end effector
    double eef_inertia = 1.0;   // kg m^2, isotropic
};

struct AssistParams {
    double gain_lin = 0.02;  // (m/s)/N beyond the deadband
    double gain_ang = 0.05;
    double deadband = 2.0;   // N and N*m
};

struct RepulsionParams {
    double margin = 0.1;  // rad
    double k_rep = 50.0;
};

struct RudderParams {
    double k_lin = 5.0;
    double k_ang = 2.0;
    double deadzone = 0.1;  // rad
};

struct HeadParams {
    double v_max = 1.0;
    double w_max = 3.14159265358979;
};

struct SystemConfig {
    SessionParams session;
    ChannelModel channel;
    SafetyParams safety;
    SimulationParams simulation;
    ImpedanceGains gains;
    AssistParams assist;
    RepulsionParams repulsion;
    double filter_cutoff_hz = 15.0;
    ChainModel chain_left, chain_right;
    HandMapping hand_left, hand_right;
    MecanumBase base;
    TwistLimits limits;
    RudderParams rudder;
    SphereCamera camera;
    HeadParams head;
};

/// Parses and validates a config file. Throws ConfigError on any schema
/// violation: missing or unknown keys, wrong types, out-of-range values,
/// inconsistent cross-field constraints.
SystemConfig load_config(const std::string& path);

/// Same, from an in-memory document (used by tests).
SystemConfig parse_config(const std::string& text);

}  // namespace telelink
