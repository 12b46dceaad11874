// Closed-loop desk simulation of one teleoperation session. An operator model
// (hand masses pulled along a recorded trace) and an avatar model (Cartesian
// end-effector masses under the impedance law, a camera head follower, and the
// wheeled base) exchange every command and feedback message over two
// deterministic network channels using the binary wire format. The safety
// state machine reacts to communication loss exactly as the avatar controller
// would: Running -> Holding on loss, Holding -> Fading on the first fresh
// command, Fading -> Running when the fade completes, and any -> EStopped.
//
// Everything is driven by a fixed-rate event loop, so identical inputs give
// byte-identical metrics.
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "telelink/config.hpp"
#include "telelink/haptics.hpp"
#include "telelink/metrics.hpp"
#include "telelink/netlink/channel.hpp"
#include "telelink/netlink/wire.hpp"
#include "telelink/televis.hpp"
#include "telelink/trace.hpp"

namespace telelink {

struct SessionOptions {
    double duration = 0.0;  // seconds; <= 0 uses the configured duration
    std::optional<std::uint64_t> seed;  // overrides the channel seed
    std::optional<double> blackout_start;
    double blackout_duration = 0.0;
    std::optional<double> estop_time;
    double energy_abort = 0.0;  // > 0: stop once the energy ledger exceeds this
    bool video = true;          // stability sweeps turn the video path off
};

class Session {
  public:
    Session(const SystemConfig& cfg, const OperatorTrace& trace, SessionOptions opt = {});

    void run();

    const MetricsLog& log() const { return log_; }
    MetricsLog take_log() { return std::move(log_); }
    SessionMode mode() const { return mode_; }
    double peak_energy() const { return peak_energy_; }
    bool energy_aborted() const { return energy_aborted_; }

    /// Decoded message counts by wire msg_type (index type-1), per receiver.
    const std::array<std::uint64_t, 10>& operator_rx_counts() const { return op_rx_; }
    const std::array<std::uint64_t, 10>& avatar_rx_counts() const { return av_rx_; }

  private:
    struct ArmSide {
        // avatar end effector, world frame
        Pose6D eef_pose{};
        Vec3 eef_vel{Vec3::Zero()};
        Vec3 eef_omega{Vec3::Zero()};
        JointState shadow;  // logged joint-space mirror of the end effector
        Pose6D target{};    // pose the impedance law currently pursues
        Twist target_twist{};
        Pose6D live_target{};  // last commanded pose off the wire
        Twist live_twist{};
        Wrench f_imp{};  // latest impedance wrench on the end effector
        VecX tau;        // latest clamped torque log
        FadeState fade{};
        // operator hand
        Vec3 hand_pos{Vec3::Zero()};
        Vec3 hand_vel{Vec3::Zero()};
        Quat hand_rot_prev{Quat::Identity()};
        Wrench feedback{};  // filtered wrench as received
        LowPassFilter filter;
        FingerBrakes brakes;
        double last_cmd_sent_at = 0.0;  // operator send time of the applied command
        JointState last_report;
        double last_report_at = -1.0;

        ArmSide(const SystemConfig& cfg, Side side, const TraceSample& start);
    };

    struct SendInfo {
        std::uint32_t seq = 0;
        std::size_t wire_bytes = 0;
    };

    void operator_tick(std::uint64_t k);
    void sensor_tick(std::uint64_t k);
    void avatar_tick(std::uint64_t k);
    void video_capture(std::uint64_t k);
    void video_send();
    void keypoint_send(std::uint64_t k);
    void trigger_estop(double t);

    void dispatch_to_avatar(const DecodedFrame& f, double t);
    void dispatch_to_operator(const DecodedFrame& f, double arrival, double t);
    void process_displays(double t);
    void update_arm(ArmSide& a, Side side, double dt);
    void update_base(double dt);
    void enter_mode(SessionMode to, double t);
    double energy(double t) const;
    SendInfo send_up(const Message& msg, double t);
    SendInfo send_down(const Message& msg, double t);
    const ChainModel& chain(Side s) const;
    const HandMapping& hand(Side s) const;

    SystemConfig cfg_;
    OperatorTrace trace_;
    SessionOptions opt_;
    double duration_;
    double dt_op_, dt_sensor_, dt_video_, dt_keypoint_;
    Channel ch_up_, ch_down_;
    std::uint32_t up_seq_ = 0, down_seq_ = 0;

    SessionMode mode_ = SessionMode::running;
    bool any_cmd_rx_ = false;
    double last_cmd_rx_time_ = 0.0;
    bool fresh_cmd_rx_ = false;  // an EefPoseCmd arrived since entering Holding

    std::array<ArmSide, 2> sides_;
    HeadFollower follower_;
    Pose6D head_target_;
    Twist base_cmd_{};
    PlanarPose odom_{};
    WheelSpeeds wheels_{};

    struct PendingSend {
        double t;
        int stream;
        std::uint64_t capture_ns;
    };
    struct PendingDisplay {
        double ready;
        int stream;
        std::uint64_t capture_ns;
    };
    std::deque<PendingSend> video_sends_;
    std::deque<PendingDisplay> displays_;
    std::map<std::pair<int, std::uint64_t>, Pose6D> capture_truth_;
    std::map<std::pair<int, std::uint64_t>, std::size_t> frame_index_;
    std::map<std::uint32_t, double> rtt_origin_;  // feedback seq -> command send time

    double last_rtt_ = std::numeric_limits<double>::quiet_NaN();
    double last_televis_ = std::numeric_limits<double>::quiet_NaN();

    MetricsLog log_;
    double peak_energy_ = 0.0;
    bool energy_aborted_ = false;
    std::array<std::uint64_t, 10> op_rx_{}, av_rx_{};
};

MetricsLog run_session(const SystemConfig& cfg, const OperatorTrace& trace,
                       const SessionOptions& opt = {});

struct SweepPoint {
    double delay = 0.0;        // one-way base latency, s
    double peak_energy = 0.0;  // J over the run
    bool diverged = false;
};

/// Runs the session once per delay value (video off, same seed) and flags
/// divergence against a delay-free reference: peak energy beyond 100x the
/// reference peak. With rising delays the flags are expected to switch from
/// false to true exactly once, bracketing the stability margin.
std::vector<SweepPoint> stability_sweep(const SystemConfig& cfg, const OperatorTrace& trace,
                                        const std::vector<double>& delays,
                                        double duration = 6.0);

}  // namespace telelink
