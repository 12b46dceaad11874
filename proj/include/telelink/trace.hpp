// Operator input traces: time-stamped palm poses, glove joints, head pose,
// and rudder deflections, stored as a columnar text file.
//
//   # telelink-trace v1
//   # rate <Hz>
//   # columns: t palm_left(7) palm_right(7) fingers_left(20) fingers_right(20)
//   #          head(7) rudder(3)
//   <65 whitespace-separated numbers per line>
//
// Poses serialize as x y z qw qx qy qz. Timestamps must be strictly
// increasing and uniformly spaced within 1e-9 s.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "telelink/geometry.hpp"
#include "telelink/locomotion.hpp"
#include "telelink/netlink/messages.hpp"

namespace telelink {

class TraceError : public std::runtime_error {
  public:
    TraceError(const std::string& msg, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

struct TraceSample {
    double t = 0.0;
    Pose6D palm_left{}, palm_right{};
    VecX fingers_left{VecX::Zero(20)}, fingers_right{VecX::Zero(20)};
    Pose6D head{};
    RudderState rudder{};

    const Pose6D& palm(Side s) const { return s == Side::left ? palm_left : palm_right; }
    const VecX& fingers(Side s) const { return s == Side::left ? fingers_left : fingers_right; }
};

class OperatorTrace {
  public:
    /// Validates ordering, uniform spacing, finiteness, unit quaternions, and
    /// rudder range. Throws TraceError (with a line number for file input).
    static OperatorTrace from_samples(std::vector<TraceSample> samples);
    static OperatorTrace load(const std::string& path);

    void save(const std::string& path) const;

    /// Zero-order hold: the last sample at or before t; clamps at both ends.
    const TraceSample& at(double t) const;

    const std::vector<TraceSample>& samples() const { return samples_; }
    double period() const { return period_; }  // 0 for single-sample traces
    double start_time() const { return samples_.front().t; }
    double end_time() const { return samples_.back().t; }

  private:
    OperatorTrace() = default;

    std::vector<TraceSample> samples_;
    double period_ = 0.0;
};

enum class TraceKind { hold, reach, circle, locomote };

/// Parses "hold" / "reach" / "circle" / "locomote"; throws std::invalid_argument.
TraceKind trace_kind_from(const std::string& name);

/// Synthesizes a canonical trace at the given rate:
///   hold      neutral posture throughout
///   reach     right palm +0.3 m in x over 2 s (smoothstep), then hold
///   circle    right palm on a 0.1 m radius circle in the y-z plane at 0.2 Hz
///   locomote  rudder pulses: forward, lateral, then turn
OperatorTrace gen_trace(TraceKind kind, double duration, double rate);

}  // namespace telelink
