#include "telelink/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace telelink {

namespace {

void append_num(std::string& out, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, r.ptr);
}

void append_num(std::string& out, std::uint64_t v) {
    char buf[24];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, r.ptr);
}

}  // namespace

const char* to_string(SessionMode m) {
    switch (m) {
        case SessionMode::running: return "running";
        case SessionMode::holding: return "holding";
        case SessionMode::fading: return "fading";
        case SessionMode::estopped: return "estopped";
    }
    return "?";
}

std::string MetricsLog::to_csv() const {
    std::string out = "# telelink-metrics v1\n# seed ";
    append_num(out, seed);
    out +=
        "\ntick,t,mode,eef_err_lin_left,eef_err_ang_left,eef_err_lin_right,eef_err_ang_right,"
        "wrench_rtt,televis_err,bandwidth_bps,energy,torque_norm_left,torque_norm_right,"
        "wheel_norm,base_x,base_y,base_theta\n";
    for (const TickRecord& r : ticks) {
        append_num(out, r.tick);
        out += ',';
        append_num(out, r.t);
        out += ',';
        out += to_string(r.mode);
        for (double v : {r.eef_err_lin[0], r.eef_err_ang[0], r.eef_err_lin[1],
                         r.eef_err_ang[1], r.wrench_rtt, r.televis_err, r.bandwidth_bps,
                         r.energy, r.torque_norm[0], r.torque_norm[1], r.wheel_norm, r.base_x,
                         r.base_y, r.base_theta}) {
            out += ',';
            append_num(out, v);
        }
        out += '\n';
    }
    return out;
}

std::string MetricsLog::frames_csv() const {
    std::string out = "# telelink-frames v1\nstream,capture_t,send_t,recv_t,display_t,bytes\n";
    for (const FrameRecord& f : frames) {
        append_num(out, static_cast<std::uint64_t>(f.stream));
        for (double v : {f.capture_t, f.send_t, f.recv_t, f.display_t}) {
            out += ',';
            append_num(out, v);
        }
        out += ',';
        append_num(out, static_cast<std::uint64_t>(f.bytes));
        out += '\n';
    }
    return out;
}

void MetricsLog::save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const std::string csv = to_csv();
    out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

LatencyBudget latency_budget(const std::vector<FrameRecord>& frames, double exposure,
                             double encode, double decode) {
    LatencyBudget b;
    b.exposure = exposure;
    b.encode = encode;
    b.decode = decode;
    double sum = 0.0;
    for (const FrameRecord& f : frames) {
        if (std::isnan(f.recv_t)) continue;
        sum += f.recv_t - f.send_t;
        ++b.frames;
    }
    b.transmit = b.frames > 0 ? sum / b.frames : 0.0;
    return b;
}

}  // namespace telelink
