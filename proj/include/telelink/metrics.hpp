// Session telemetry: per-tick records, video frame timing, safety-mode
// transitions, and byte-stable CSV serialization.
//
// CSV layout (one row per avatar control tick):
//
//   # telelink-metrics v1
//   # seed <channel seed>
//   tick,t,mode,eef_err_lin_left,eef_err_ang_left,eef_err_lin_right,
//   eef_err_ang_right,wrench_rtt,televis_err,bandwidth_bps,energy,
//   torque_norm_left,torque_norm_right,wheel_norm,base_x,base_y,base_theta
//
// Doubles are written with std::to_chars (shortest round-trip form), so two
// runs with identical inputs produce identical bytes.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace telelink {

enum class SessionMode : std::uint8_t { running, holding, fading, estopped };

const char* to_string(SessionMode m);

struct TickRecord {
    std::uint64_t tick = 0;
    double t = 0.0;
    SessionMode mode = SessionMode::running;
    std::array<double, 2> eef_err_lin{};  // m, indexed by Side
    std::array<double, 2> eef_err_ang{};  // rad
    double wrench_rtt = std::numeric_limits<double>::quiet_NaN();   // s
    double televis_err = std::numeric_limits<double>::quiet_NaN();  // rad
    double bandwidth_bps = 0.0;  // downlink, trailing window
    double energy = 0.0;         // J, total ledger
    std::array<double, 2> torque_norm{};
    double wheel_norm = 0.0;  // rad/s
    double base_x = 0.0, base_y = 0.0, base_theta = 0.0;
};

/// Life of one video frame. recv_t and display_t stay NaN if the frame was
/// lost in transit (or the session ended first).
struct FrameRecord {
    int stream = 0;
    double capture_t = 0.0;
    double send_t = 0.0;
    double recv_t = std::numeric_limits<double>::quiet_NaN();
    double display_t = std::numeric_limits<double>::quiet_NaN();
    std::size_t bytes = 0;  // encoded frame size on the wire
};

struct ModeTransition {
    double t = 0.0;
    SessionMode from = SessionMode::running;
    SessionMode to = SessionMode::running;
};

struct MetricsLog {
    std::uint64_t seed = 0;
    std::vector<TickRecord> ticks;
    std::vector<FrameRecord> frames;
    std::vector<ModeTransition> transitions;

    std::string to_csv() const;
    std::string frames_csv() const;
    void save_csv(const std::string& path) const;
};

/// Glass-to-glass latency decomposition. Exposure, encode, and decode are
/// pipeline constants; transmit is averaged over frames that arrived.
struct LatencyBudget {
    double exposure = 0.0;
    double encode = 0.0;
    double transmit = 0.0;
    double decode = 0.0;
    int frames = 0;  // frames the transmit average is over

    double glass_to_glass() const { return exposure + encode + transmit + decode; }
};

LatencyBudget latency_budget(const std::vector<FrameRecord>& frames, double exposure,
                             double encode, double decode);

}  // namespace telelink
