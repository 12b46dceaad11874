// telelink: command-line frontend for the teleoperation library. Runs closed
// loop sessions, delay sweeps, codec self-checks, and exports the televis
// error map, all as CSV artifacts that carry their own seed.
//
// Exit codes: 0 success, 1 runtime error, 2 config or usage error,
// 3 trace error. TELELINK_LOG = error | info | debug picks verbosity.
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "telelink/config.hpp"
#include "telelink/netlink/wire.hpp"
#include "telelink/session.hpp"
#include "telelink/televis.hpp"
#include "telelink/trace.hpp"

namespace {

using namespace telelink;

int log_level() {
    static const int v = [] {
        const char* e = std::getenv("TELELINK_LOG");
        if (!e) return 1;
        const std::string s(e);
        if (s == "error") return 0;
        if (s == "debug") return 2;
        return 1;
    }();
    return v;
}

void info(const char* text) {
    if (log_level() >= 1) std::fputs(text, stdout);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
    if (log_level() >= 1) std::printf(fmt, args...);
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
    if (log_level() >= 2) std::printf(fmt, args...);
}

void append_num(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, p);
}

/// "a:b:step" inclusive of both ends, or a single value.
std::vector<double> parse_delays(const std::string& range) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (pos <= range.size()) {
        const std::size_t colon = range.find(':', pos);
        const std::string tok = range.substr(pos, colon == std::string::npos ? colon : colon - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("--delays: '" + tok + "' is not a number");
        }
        if (used != tok.size()) throw std::invalid_argument("--delays: '" + tok + "' is not a number");
        parts.push_back(v);
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() == 1) {
        if (parts[0] < 0) throw std::invalid_argument("--delays: delay must be >= 0");
        return parts;
    }
    if (parts.size() != 3) throw std::invalid_argument("--delays: expected a single value or start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (start < 0 || stop < start || step <= 0)
        throw std::invalid_argument("--delays: need start >= 0, stop >= start, step > 0");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) out.push_back(start + i * step);
    return out;
}

struct TraceArgs {
    std::string path;
    std::string gen;
};

OperatorTrace make_trace(const TraceArgs& t, const SystemConfig& cfg, double duration) {
    if (!t.path.empty()) return OperatorTrace::load(t.path);
    const std::string kind = t.gen.empty() ? "circle" : t.gen;
    const double span = duration > 0 ? duration : cfg.session.duration;
    if (t.gen.empty()) debug("no trace given; generating a %s trace (%.1f s)\n", kind.c_str(), span);
    return gen_trace(trace_kind_from(kind), span, cfg.session.operator_rate);
}

void add_trace_flags(CLI::App* sub, TraceArgs& t) {
    auto* path = sub->add_option("--trace", t.path, "operator trace file");
    sub->add_option("--gen", t.gen, "generate a trace instead: hold|reach|circle|locomote")
        ->excludes(path);
}

// ---------------------------------------------------------------- run

struct RunArgs {
    std::string config, out, frames_out;
    TraceArgs trace;
    std::optional<std::uint64_t> seed;
    double duration = 0.0;
    double blackout_start = -1.0, blackout_duration = 0.5;
    double estop = -1.0;
    bool no_video = false;
};

int cmd_run(const RunArgs& a) {
    const SystemConfig cfg = load_config(a.config);
    const OperatorTrace trace = make_trace(a.trace, cfg, a.duration);

    SessionOptions opt;
    opt.duration = a.duration;
    opt.seed = a.seed;
    if (a.blackout_start >= 0) {
        opt.blackout_start = a.blackout_start;
        opt.blackout_duration = a.blackout_duration;
    }
    if (a.estop >= 0) opt.estop_time = a.estop;
    opt.video = !a.no_video;

    Session session(cfg, trace, opt);
    session.run();
    const MetricsLog& log = session.log();
    if (log.ticks.empty()) throw std::runtime_error("session produced no ticks");

    const double t_end = log.ticks.back().t;
    double settle = 0.0, peak_bw = 0.0, mean_bw = 0.0;
    int n_settle = 0, n_bw = 0;
    for (const auto& r : log.ticks) {
        peak_bw = std::max(peak_bw, r.bandwidth_bps);
        if (r.t >= 1.0) mean_bw += r.bandwidth_bps, ++n_bw;
        if (r.mode == SessionMode::running && r.t >= 0.8 * t_end) {
            settle += std::max(r.eef_err_lin[0], r.eef_err_lin[1]);
            ++n_settle;
        }
    }
    if (n_settle) settle /= n_settle;
    if (n_bw) mean_bw /= n_bw;

    info("mode: %s   ticks: %zu   t: %.3f s   peak energy: %.4g J\n", to_string(session.mode()),
         log.ticks.size(), t_end, session.peak_energy());
    if (n_settle)
        info("settle error: %.3f mm (worse arm, mean over final 20%% of running ticks)\n",
             settle * 1e3);
    const double rtt = log.ticks.back().wrench_rtt;
    if (std::isfinite(rtt)) info("wrench round trip: %.1f ms\n", rtt * 1e3);
    info("bandwidth: peak %.1f Mbit/s, mean %.1f Mbit/s after t=1 s\n", peak_bw / 1e6,
         mean_bw / 1e6);
    const LatencyBudget budget = latency_budget(log.frames, cfg.session.exposure_time,
                                                cfg.session.encode_latency,
                                                cfg.session.decode_latency);
    if (budget.frames > 0)
        info("glass-to-glass: %.1f ms (exposure %.1f + encode %.1f + transmit %.1f + decode %.1f, "
             "%d frames)\n",
             budget.glass_to_glass() * 1e3, budget.exposure * 1e3, budget.encode * 1e3,
             budget.transmit * 1e3, budget.decode * 1e3, budget.frames);
    else
        info("glass-to-glass: n/a (no displayed frames)\n");
    for (const auto& tr : log.transitions)
        debug("t=%.4f  %s -> %s\n", tr.t, to_string(tr.from), to_string(tr.to));

    if (!a.out.empty()) {
        log.save_csv(a.out);
        info("metrics: %s\n", a.out.c_str());
    }
    if (!a.frames_out.empty()) {
        std::ofstream f(a.frames_out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + a.frames_out);
        f << log.frames_csv();
        info("frames: %s\n", a.frames_out.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string config, out, delays;
    TraceArgs trace;
    std::optional<std::uint64_t> seed;
    double duration = 6.0;
};

int cmd_sweep(const SweepArgs& a) {
    SystemConfig cfg = load_config(a.config);
    if (a.seed) cfg.channel.seed = *a.seed;
    const std::vector<double> delays = parse_delays(a.delays);
    const OperatorTrace trace = make_trace(a.trace, cfg, a.duration);

    const std::vector<SweepPoint> pts = stability_sweep(cfg, trace, delays, a.duration);
    for (const auto& p : pts)
        debug("delay %.4f s  peak %.6g J  diverged %d\n", p.delay, p.peak_energy, p.diverged);

    if (!a.out.empty()) {
        std::string csv = "# telelink-sweep v1\n# seed " + std::to_string(cfg.channel.seed) +
                          "\ndelay,peak_energy,diverged\n";
        for (const auto& p : pts) {
            append_num(csv, p.delay);
            csv += ',';
            append_num(csv, p.peak_energy);
            csv += ',';
            csv += p.diverged ? '1' : '0';
            csv += '\n';
        }
        std::ofstream f(a.out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        f << csv;
        info("sweep: %s\n", a.out.c_str());
    }

    int flips = 0;
    std::size_t flip_at = 0;
    bool monotone = true;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!pts[i - 1].diverged && pts[i].diverged) ++flips, flip_at = i;
        if (pts[i - 1].diverged && !pts[i].diverged) monotone = false;
    }
    if (!monotone || flips > 1)
        info("divergence pattern is not a single transition (%d upward flips)\n", flips);
    else if (pts.front().diverged)
        info("diverged from the smallest tested delay (%g s)\n", pts.front().delay);
    else if (flips == 0)
        info("no divergence up to %g s one-way delay\n", pts.back().delay);
    else
        info("stability threshold between %g s and %g s one-way delay\n", pts[flip_at - 1].delay,
             pts[flip_at].delay);
    return 0;
}

// ---------------------------------------------------------------- codec

struct CodecArgs {
    std::uint64_t count = 100000;
    std::uint64_t seed = 20240817;
};

class MessageSampler {
  public:
    explicit MessageSampler(std::uint64_t seed) : rng_(seed) {}

    Message next() {
        switch (rng_() % 10) {
            case 0: return EefPoseCmd{side(), pose(), {vec3(), vec3()}};
            case 1: {
                HandJointCmd m{side(), VecX(rng_() % 2 ? 9 : 5)};
                for (int i = 0; i < m.joints.size(); ++i) m.joints[i] = num(0, 1.5);
                return m;
            }
            case 2: return HeadPoseCmd{pose()};
            case 3: return BaseVelocityCmd{Twist{vec3(), vec3()}};
            case 4: return WrenchFeedback{side(), Wrench{vec3(), vec3()}};
            case 5: {
                HandCurrentFeedback m{side(), {}};
                for (auto& c : m.currents) c = num(0, 2);
                return m;
            }
            case 6: {
                ArmStateFeedback m;
                m.side = side();
                const int n = 1 + static_cast<int>(rng_() % 16);
                m.q = VecX(n);
                m.qd = VecX(n);
                for (int i = 0; i < n; ++i) m.q[i] = num(-3, 3), m.qd[i] = num(-2, 2);
                return m;
            }
            case 7: {
                VideoFrame m{static_cast<std::uint8_t>(rng_() % 4), rng_(), blob(512)};
                return m;
            }
            case 8: return FaceKeypoints{blob(256)};
            default: return ErrorState{side(), static_cast<std::uint32_t>(rng_())};
        }
    }

  private:
    double num(double lo = -10, double hi = 10) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    Side side() { return rng_() % 2 ? Side::right : Side::left; }
    Vec3 vec3() { return {num(), num(), num()}; }
    Pose6D pose() {
        Quat q(num(-1, 1), num(-1, 1), num(-1, 1), num(-1, 1));
        if (q.norm() < 1e-3) q = Quat::Identity();
        return Pose6D::from_parts(vec3(), q.normalized());
    }
    std::vector<std::uint8_t> blob(std::size_t max) {
        std::vector<std::uint8_t> b(rng_() % (max + 1));
        for (auto& x : b) x = static_cast<std::uint8_t>(rng_());
        return b;
    }

    std::mt19937_64 rng_;
};

int cmd_codec(const CodecArgs& a) {
    MessageSampler gen(a.seed);
    std::uint64_t bytes = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < a.count; ++i) {
        const Message msg = gen.next();
        const auto frame = encode(msg, static_cast<std::uint32_t>(i), i * 1000);
        const DecodeResult dec = decode(frame);
        if (!dec.ok()) {
            std::cerr << "round trip " << i << " failed to decode: " << to_string(dec.status)
                      << " at offset " << dec.error_offset << "\n";
            return 1;
        }
        const auto again = encode(dec.frame->message, dec.frame->seq, dec.frame->timestamp_ns);
        if (again != frame) {
            std::cerr << "round trip " << i << " re-encoded differently\n";
            return 1;
        }
        bytes += frame.size();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    info("codec: %llu round trips byte-exact, %.1f MB on the wire, %.2f s\n",
         static_cast<unsigned long long>(a.count), bytes / 1e6, secs);
    info("frame overhead: %zu bytes (%zu header + 4 crc), seed %llu\n", kFrameOverhead,
         kHeaderSize, static_cast<unsigned long long>(a.seed));
    return 0;
}

// ---------------------------------------------------------------- televis-map

struct TelevisArgs {
    std::string config, out;
    double depth = 0.0;   // 0: use the configured scene depth
    double offset = 0.1;  // lateral eye displacement, m
    int grid = 33;
};

int cmd_televis_map(const TelevisArgs& a) {
    const SystemConfig cfg = load_config(a.config);
    SphereCamera cam = cfg.camera;
    cam.capture_pose = Pose6D{};
    const double depth = a.depth > 0 ? a.depth : cfg.session.scene_depth;
    if (a.grid < 2) throw std::invalid_argument("--grid must be at least 2");

    const Pose6D eye = Pose6D::from_parts(Vec3(a.offset, 0, 0), Quat::Identity());
    const double r_max = cam.intrinsics.focal * cam.fov_h / 2.0;

    std::string csv = "# telelink-televis-map v1\n";
    csv += "# offset " + std::to_string(a.offset) + " m, depth " + std::to_string(depth) +
           " m, fov " + std::to_string(cam.fov_h) + " rad\n";
    csv += "px,py,theta_deg,error_deg\n";
    int rows = 0;
    for (int j = 0; j < a.grid; ++j) {
        for (int i = 0; i < a.grid; ++i) {
            const double px = cam.intrinsics.cx + r_max * (2.0 * i / (a.grid - 1) - 1.0);
            const double py = cam.intrinsics.cy + r_max * (2.0 * j / (a.grid - 1) - 1.0);
            const auto ray = pixel_to_ray(cam, px, py);
            if (!ray) continue;
            const auto err = angular_error(cam, *ray, eye, depth);
            if (!err) continue;
            const double theta = std::hypot(px - cam.intrinsics.cx, py - cam.intrinsics.cy) /
                                 cam.intrinsics.focal;
            append_num(csv, px);
            csv += ',';
            append_num(csv, py);
            csv += ',';
            append_num(csv, theta * 180.0 / 3.14159265358979323846);
            csv += ',';
            append_num(csv, *err * 180.0 / 3.14159265358979323846);
            csv += '\n';
            ++rows;
        }
    }
    if (rows == 0) throw std::runtime_error("no rays fell inside the field of view");
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << csv;
    info("televis map: %s (%d rays, depth %.2f m, eye offset %.3f m)\n", a.out.c_str(), rows,
         depth, a.offset);
    return 0;
}

// ---------------------------------------------------------------- the rest

int cmd_validate(const std::string& path) {
    const SystemConfig cfg = load_config(path);
    info("OK: %s (arms %dx%d dof, rates %g/%g Hz, %d video streams)\n", path.c_str(),
         static_cast<int>(cfg.chain_left.joints.size()),
         static_cast<int>(cfg.chain_right.joints.size()), cfg.session.operator_rate,
         cfg.session.sensor_rate, cfg.session.video_streams);
    return 0;
}

struct GenArgs {
    std::string kind, out;
    double duration = 10.0;
    double rate = 1000.0;
};

int cmd_gen_trace(const GenArgs& a) {
    if (a.duration <= 0) throw std::invalid_argument("--duration must be > 0");
    if (a.rate <= 0) throw std::invalid_argument("--rate must be > 0");
    const OperatorTrace trace = gen_trace(trace_kind_from(a.kind), a.duration, a.rate);
    trace.save(a.out);
    info("trace: %s (%s, %zu samples at %g Hz)\n", a.out.c_str(), a.kind.c_str(),
         trace.samples().size(), a.rate);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"telelink: desk-scale bilateral teleoperation rig"};
    app.require_subcommand(1);

    RunArgs run;
    auto* sub_run = app.add_subcommand("run", "run one closed-loop session");
    sub_run->add_option("--config", run.config, "system config YAML")->required();
    add_trace_flags(sub_run, run.trace);
    sub_run->add_option("--out", run.out, "metrics CSV path");
    sub_run->add_option("--frames-out", run.frames_out, "video frame log CSV path");
    sub_run->add_option("--seed", run.seed, "override the channel seed");
    sub_run->add_option("--duration", run.duration, "session length, s (default from config)");
    sub_run->add_option("--blackout-start", run.blackout_start, "drop both channels at this time, s");
    sub_run->add_option("--blackout-duration", run.blackout_duration,
                        "blackout length, s (default 0.5)");
    sub_run->add_option("--estop", run.estop, "trigger the emergency stop at this time, s");
    sub_run->add_flag("--no-video", run.no_video, "skip the video pipeline");

    SweepArgs sweep;
    auto* sub_sweep = app.add_subcommand("sweep", "stability vs one-way delay");
    sub_sweep->add_option("--config", sweep.config, "system config YAML")->required();
    add_trace_flags(sub_sweep, sweep.trace);
    sub_sweep->add_option("--delays", sweep.delays, "start:stop:step seconds, inclusive")
        ->required();
    sub_sweep->add_option("--duration", sweep.duration, "seconds per point (default 6)");
    sub_sweep->add_option("--seed", sweep.seed, "override the channel seed");
    sub_sweep->add_option("--out", sweep.out, "sweep CSV path");

    CodecArgs codec;
    auto* sub_codec = app.add_subcommand("codec", "wire codec self-check");
    sub_codec->add_option("--count", codec.count, "round trips (default 100000)");
    sub_codec->add_option("--seed", codec.seed, "message generator seed");

    TelevisArgs televis;
    auto* sub_televis = app.add_subcommand("televis-map", "angular error map as CSV");
    sub_televis->add_option("--config", televis.config, "system config YAML")->required();
    sub_televis->add_option("--out", televis.out, "map CSV path")->required();
    sub_televis->add_option("--depth", televis.depth, "content depth, m (default from config)");
    sub_televis->add_option("--offset", televis.offset, "lateral eye offset, m (default 0.1)");
    sub_televis->add_option("--grid", televis.grid, "samples per image axis (default 33)");

    std::string validate_path;
    auto* sub_validate = app.add_subcommand("validate-config", "parse and check a config");
    sub_validate->add_option("--config", validate_path, "system config YAML")->required();

    GenArgs gen;
    auto* sub_gen = app.add_subcommand("gen-trace", "synthesize an operator trace");
    sub_gen->add_option("--kind", gen.kind, "hold|reach|circle|locomote")->required();
    sub_gen->add_option("--duration", gen.duration, "seconds (default 10)");
    sub_gen->add_option("--rate", gen.rate, "samples per second (default 1000)");
    sub_gen->add_option("--out", gen.out, "trace file path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sub_run) return cmd_run(run);
        if (*sub_sweep) return cmd_sweep(sweep);
        if (*sub_codec) return cmd_codec(codec);
        if (*sub_televis) return cmd_televis_map(televis);
        if (*sub_validate) return cmd_validate(validate_path);
        if (*sub_gen) return cmd_gen_trace(gen);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TraceError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
