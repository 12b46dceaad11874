// Random wire-message generator shared by the codec tests and the
// acceptance harness.
#pragma once

#include <random>

#include "telelink/netlink/messages.hpp"

namespace telelink::testing {

class RandomMessageGen {
  public:
    explicit RandomMessageGen(std::uint64_t seed, std::size_t max_blob = 256)
        : rng_(seed), max_blob_(max_blob) {}

    Message next() {
        switch (rng_() % 10) {
            case 0: return eef();
            case 1: return hand_joints();
            case 2: return HeadPoseCmd{pose()};
            case 3: return BaseVelocityCmd{twist()};
            case 4: return WrenchFeedback{side(), wrench()};
            case 5: return currents();
            case 6: return arm_state();
            case 7: return video();
            case 8: return keypoints();
            default: return ErrorState{side(), static_cast<std::uint32_t>(rng_())};
        }
    }

    std::mt19937_64& engine() { return rng_; }

  private:
    double num(double lo = -10.0, double hi = 10.0) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    Side side() { return rng_() % 2 ? Side::right : Side::left; }
    Vec3 vec3() { return {num(), num(), num()}; }
    Quat quat() {
        Quat q(num(-1, 1), num(-1, 1), num(-1, 1), num(-1, 1));
        if (q.norm() < 1e-3) q = Quat::Identity();
        return q.normalized();
    }
    Pose6D pose() { return Pose6D::from_parts(vec3(), quat()); }
    Twist twist() { return {vec3(), vec3()}; }
    Wrench wrench() { return {vec3(), vec3()}; }
    std::vector<std::uint8_t> blob(std::size_t max) {
        std::vector<std::uint8_t> b(rng_() % (max + 1));
        for (auto& x : b) x = static_cast<std::uint8_t>(rng_());
        return b;
    }

    Message eef() { return EefPoseCmd{side(), pose(), twist()}; }
    Message hand_joints() {
        HandJointCmd m;
        m.side = side();
        m.joints.resize(rng_() % 2 ? 9 : 5);
        for (int i = 0; i < m.joints.size(); ++i) m.joints[i] = num(0, 1.5);
        return m;
    }
    Message currents() {
        HandCurrentFeedback m;
        m.side = side();
        for (auto& c : m.currents) c = num(0, 2.0);
        return m;
    }
    Message arm_state() {
        ArmStateFeedback m;
        m.side = side();
        const int n = 1 + static_cast<int>(rng_() % 16);
        m.q.resize(n);
        m.qd.resize(n);
        for (int i = 0; i < n; ++i) {
            m.q[i] = num(-3, 3);
            m.qd[i] = num(-2, 2);
        }
        return m;
    }
    Message video() {
        VideoFrame m;
        m.stream_id = static_cast<std::uint8_t>(rng_() % 4);
        m.capture_timestamp_ns = rng_();
        m.payload = blob(max_blob_);
        return m;
    }
    Message keypoints() { return FaceKeypoints{blob(max_blob_)}; }

    std::mt19937_64 rng_;
    std::size_t max_blob_;
};

}  // namespace telelink::testing
