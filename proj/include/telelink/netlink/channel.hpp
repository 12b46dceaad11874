// Deterministic one-way network model: base latency, gaussian jitter, i.i.d.
// loss, and a single-server serialization queue for the bandwidth limit.
// Identical seed and call sequence give identical deliveries, bit for bit.
#pragma once

#include <cstdint>
#include <queue>
#include <random>
#include <vector>

namespace telelink {

/// mt19937_64 behind fixed, implementation-independent draw recipes.
/// std::*_distribution is deliberately avoided: its output is not pinned by
/// the standard, and channel behavior must be reproducible everywhere.
class DeterministicRng {
  public:
    explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01();

    /// Standard normal via Box-Muller (two uniforms per call).
    double gaussian();

  private:
    std::mt19937_64 state_;
};

struct ChannelModel {
    double base_latency = 0.0;     // s
    double jitter_std = 0.0;       // s, gaussian, clamped at +-3 sigma
    double loss_prob = 0.0;        // [0, 1)
    double bandwidth_limit = 0.0;  // bit/s; 0 disables serialization delay
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
};

struct Delivery {
    double time = 0.0;  // exact delivery instant, <= the poll time
    std::vector<std::uint8_t> bytes;
};

class Channel {
  public:
    explicit Channel(const ChannelModel& model);

    /// Enqueues a packet at simulation time `now`. Time must be monotonic
    /// across send/poll calls. Total delay is serialization wait plus
    /// max(base_latency + jitter, 1 ns), so delivery is strictly after send.
    void send(std::vector<std::uint8_t> bytes, double now);

    /// Pops every packet whose delivery time is <= now, ordered by
    /// (delivery time, send order).
    std::vector<Delivery> poll(double now);

    /// Delivered bits over the trailing `window` seconds, divided by the
    /// window (bit/s).
    double bandwidth_meter(double window) const;

    /// Packets sent during [start, end) are dropped deterministically,
    /// modeling a tether pull or access-point outage.
    void set_blackout(double start, double end);

    std::uint64_t sent() const { return sent_; }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t in_flight() const { return queue_.size(); }
    double now() const { return now_; }

  private:
    struct Pending {
        double delivery;
        std::uint64_t order;
        std::vector<std::uint8_t> bytes;
        bool operator>(const Pending& o) const {
            return delivery != o.delivery ? delivery > o.delivery : order > o.order;
        }
    };

    void advance(double now);

    ChannelModel model_;
    DeterministicRng rng_;
    double now_ = 0.0;
    double serializer_free_ = 0.0;
    double blackout_start_ = 0.0, blackout_end_ = -1.0;
    std::uint64_t sent_ = 0, dropped_ = 0, delivered_ = 0;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::vector<std::pair<double, std::uint64_t>> delivered_bits_;  // (time, bits)
};

}  // namespace telelink
