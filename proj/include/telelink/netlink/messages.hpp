// In-memory message types carried between the operator station and the avatar.
#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "telelink/geometry.hpp"

namespace telelink {

enum class Side : std::uint8_t { left = 0, right = 1 };

/// Operator -> avatar: end-effector pose command in the avatar base frame,
/// plus the commanded twist for the damping term.
struct EefPoseCmd {
    Side side = Side::left;
    Pose6D pose{};
    Twist twist{};
};

/// Operator -> avatar: actuated finger joint targets after retargeting.
/// 9 values for the right (SVH-class) hand, 5 for the left (SIH-class).
struct HandJointCmd {
    Side side = Side::left;
    VecX joints;
};

/// Operator -> avatar: head pose target for the camera arm.
struct HeadPoseCmd {
    Pose6D pose{};
};

/// Operator -> avatar: planar base velocity from the rudder, capped on receipt.
struct BaseVelocityCmd {
    Twist twist{};
};

/// Avatar -> operator: filtered end-effector wrench for force feedback.
struct WrenchFeedback {
    Side side = Side::left;
    Wrench wrench{};
};

/// Avatar -> operator: hand motor currents driving the per-finger brakes.
struct HandCurrentFeedback {
    Side side = Side::left;
    std::array<double, 5> currents{};
};

/// Avatar -> operator: measured arm joint state for the predictor.
struct ArmStateFeedback {
    Side side = Side::left;
    VecX q;
    VecX qd;
};

/// Avatar -> operator: one encoded camera frame (payload is opaque here).
struct VideoFrame {
    std::uint8_t stream_id = 0;
    std::uint64_t capture_timestamp_ns = 0;
    std::vector<std::uint8_t> payload;
};

/// Operator -> avatar: facial keypoints for the avatar face display (opaque).
struct FaceKeypoints {
    std::vector<std::uint8_t> payload;
};

/// Avatar -> operator: a fault indicator for the operator overlay.
struct ErrorState {
    Side side = Side::left;
    std::uint32_t code = 0;
};

using Message = std::variant<EefPoseCmd, HandJointCmd, HeadPoseCmd, BaseVelocityCmd,
                             WrenchFeedback, HandCurrentFeedback, ArmStateFeedback, VideoFrame,
                             FaceKeypoints, ErrorState>;

}  // namespace telelink
