#include "telelink/netlink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telelink {

double DeterministicRng::uniform01() {
    return static_cast<double>(state_() >> 11) * 0x1.0p-53;
}

double DeterministicRng::gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1-u1 in (0,1], log is safe
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

void ChannelModel::validate() const {
    if (!(base_latency >= 0.0)) throw std::invalid_argument("channel: base_latency must be >= 0");
    if (!(jitter_std >= 0.0)) throw std::invalid_argument("channel: jitter_std must be >= 0");
    if (!(loss_prob >= 0.0 && loss_prob < 1.0))
        throw std::invalid_argument("channel: loss_prob must be in [0, 1)");
    if (!(bandwidth_limit >= 0.0))
        throw std::invalid_argument("channel: bandwidth_limit must be >= 0");
}

Channel::Channel(const ChannelModel& model) : model_(model), rng_(model.seed) {
    model_.validate();
}

void Channel::advance(double now) {
    if (now < now_) throw std::logic_error("channel: time must be monotonic");
    now_ = now;
}

void Channel::set_blackout(double start, double end) {
    if (!(end >= start)) throw std::invalid_argument("channel: blackout end before start");
    blackout_start_ = start;
    blackout_end_ = end;
}

void Channel::send(std::vector<std::uint8_t> bytes, double now) {
    advance(now);
    ++sent_;
    if (now >= blackout_start_ && now < blackout_end_) {
        ++dropped_;
        return;
    }
    // Loss is drawn before scheduling; a dropped packet never occupies the link.
    if (rng_.uniform01() < model_.loss_prob) {
        ++dropped_;
        return;
    }
    double serialization = 0.0;
    if (model_.bandwidth_limit > 0.0)
        serialization = static_cast<double>(bytes.size()) * 8.0 / model_.bandwidth_limit;
    const double start = std::max(now, serializer_free_);
    serializer_free_ = start + serialization;

    double jitter = 0.0;
    if (model_.jitter_std > 0.0)
        jitter = std::clamp(rng_.gaussian(), -3.0, 3.0) * model_.jitter_std;
    const double link = std::max(model_.base_latency + jitter, 1e-9);
    queue_.push(Pending{serializer_free_ + link, sent_, std::move(bytes)});
}

std::vector<Delivery> Channel::poll(double now) {
    advance(now);
    std::vector<Delivery> out;
    while (!queue_.empty() && queue_.top().delivery <= now) {
        auto& top = const_cast<Pending&>(queue_.top());
        delivered_bits_.emplace_back(top.delivery, top.bytes.size() * 8);
        out.push_back(Delivery{top.delivery, std::move(top.bytes)});
        queue_.pop();
        ++delivered_;
    }
    return out;
}

double Channel::bandwidth_meter(double window) const {
    if (!(window > 0.0)) throw std::invalid_argument("channel: meter window must be > 0");
    const double cutoff = now_ - window;
    double bits = 0.0;
    for (auto it = delivered_bits_.rbegin(); it != delivered_bits_.rend(); ++it) {
        if (it->first <= cutoff) break;  // records are time-ordered
        bits += static_cast<double>(it->second);
    }
    return bits / window;
}

}  // namespace telelink
