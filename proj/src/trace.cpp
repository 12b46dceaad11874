#include "telelink/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace telelink {

namespace {

constexpr const char* kHeader = "# telelink-trace v1";
constexpr int kColumns = 65;

void check_pose(const Pose6D& p, int line, const char* what) {
    if (!is_finite(p)) throw TraceError(std::string(what) + ": non-finite pose", line);
    if (std::abs(p.rotation.norm() - 1.0) > 1e-6)
        throw TraceError(std::string(what) + ": quaternion is not unit length", line);
}

void validate_sample(const TraceSample& s, int line) {
    if (!std::isfinite(s.t)) throw TraceError("non-finite timestamp", line);
    check_pose(s.palm_left, line, "palm_left");
    check_pose(s.palm_right, line, "palm_right");
    check_pose(s.head, line, "head");
    if (!s.fingers_left.allFinite() || !s.fingers_right.allFinite())
        throw TraceError("non-finite finger joints", line);
    try {
        s.rudder.validate();
    } catch (const std::invalid_argument& e) {
        throw TraceError(e.what(), line);
    }
}

void write_pose(std::ostream& out, const Pose6D& p) {
    const Quat& q = p.rotation;
    out << ' ' << p.translation.x() << ' ' << p.translation.y() << ' ' << p.translation.z()
        << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z();
}

TraceSample neutral() {
    TraceSample s;
    s.palm_left = Pose6D::from_translation(Vec3(0.35, 0.25, 0.7));
    s.palm_right = Pose6D::from_translation(Vec3(0.35, -0.25, 0.7));
    s.fingers_left = VecX::Constant(20, 0.2);
    s.fingers_right = VecX::Constant(20, 0.2);
    s.head = Pose6D::from_translation(Vec3(0, 0, 1.45));
    return s;
}

double smoothstep01(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

/// 0 -> 1 -> 0 pulse over [t0, t1] with `ramp`-second smoothstep edges.
double pulse(double t, double t0, double t1, double ramp) {
    if (t <= t0 || t >= t1) return 0.0;
    return smoothstep01((t - t0) / ramp) * smoothstep01((t1 - t) / ramp);
}

}  // namespace

OperatorTrace OperatorTrace::from_samples(std::vector<TraceSample> samples) {
    if (samples.empty()) throw TraceError("trace has no samples", -1);
    for (std::size_t i = 0; i < samples.size(); ++i) validate_sample(samples[i], -1);
    OperatorTrace tr;
    tr.samples_ = std::move(samples);
    if (tr.samples_.size() >= 2) {
        const double span = tr.samples_.back().t - tr.samples_.front().t;
        tr.period_ = span / static_cast<double>(tr.samples_.size() - 1);
        for (std::size_t i = 1; i < tr.samples_.size(); ++i) {
            const double dt = tr.samples_[i].t - tr.samples_[i - 1].t;
            if (!(dt > 0.0)) throw TraceError("timestamps must be strictly increasing", -1);
            if (std::abs(dt - tr.period_) > 1e-9)
                throw TraceError("timestamps must be uniformly spaced", -1);
        }
    }
    return tr;
}

OperatorTrace OperatorTrace::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open '" + path + "'", -1);

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw TraceError("empty file", 1);
    ++lineno;
    if (line != kHeader) throw TraceError("bad header, expected '" + std::string(kHeader) + "'", 1);

    std::vector<TraceSample> samples;
    std::vector<int> lines;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double v[kColumns];
        for (int c = 0; c < kColumns; ++c)
            if (!(ss >> v[c]))
                throw TraceError("expected 65 numeric columns, failed at column " +
                                     std::to_string(c + 1),
                                 lineno);
        std::string extra;
        if (ss >> extra) throw TraceError("trailing data after column 65", lineno);

        TraceSample s;
        int k = 0;
        s.t = v[k++];
        auto read_pose = [&](Pose6D& p) {
            p.translation = Vec3(v[k], v[k + 1], v[k + 2]);
            p.rotation = Quat(v[k + 3], v[k + 4], v[k + 5], v[k + 6]);
            k += 7;
        };
        read_pose(s.palm_left);
        read_pose(s.palm_right);
        for (int i = 0; i < 20; ++i) s.fingers_left[i] = v[k++];
        for (int i = 0; i < 20; ++i) s.fingers_right[i] = v[k++];
        read_pose(s.head);
        s.rudder.pitch = v[k++];
        s.rudder.roll = v[k++];
        s.rudder.yaw = v[k++];
        validate_sample(s, lineno);
        samples.push_back(std::move(s));
        lines.push_back(lineno);
    }
    if (samples.empty()) throw TraceError("trace has no samples", lineno);

    // re-run the spacing checks with line context
    if (samples.size() >= 2) {
        const double period =
            (samples.back().t - samples.front().t) / static_cast<double>(samples.size() - 1);
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const double dt = samples[i].t - samples[i - 1].t;
            if (!(dt > 0.0))
                throw TraceError("timestamps must be strictly increasing", lines[i]);
            if (std::abs(dt - period) > 1e-9)
                throw TraceError("timestamps must be uniformly spaced", lines[i]);
        }
    }
    return from_samples(std::move(samples));
}

void OperatorTrace::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot write '" + path + "'", -1);
    out.precision(17);
    out << kHeader << '\n';
    out << "# rate " << (period_ > 0.0 ? 1.0 / period_ : 0.0) << '\n';
    out << "# columns: t palm_left(x y z qw qx qy qz) palm_right(7) fingers_left(20)"
           " fingers_right(20) head(7) rudder(pitch roll yaw)\n";
    for (const auto& s : samples_) {
        out << s.t;
        write_pose(out, s.palm_left);
        write_pose(out, s.palm_right);
        for (int i = 0; i < 20; ++i) out << ' ' << s.fingers_left[i];
        for (int i = 0; i < 20; ++i) out << ' ' << s.fingers_right[i];
        write_pose(out, s.head);
        out << ' ' << s.rudder.pitch << ' ' << s.rudder.roll << ' ' << s.rudder.yaw << '\n';
    }
    if (!out) throw TraceError("write failed for '" + path + "'", -1);
}

const TraceSample& OperatorTrace::at(double t) const {
    if (samples_.size() == 1 || t <= samples_.front().t) return samples_.front();
    if (t >= samples_.back().t) return samples_.back();
    const auto idx = static_cast<std::size_t>((t - samples_.front().t) / period_ + 1e-9);
    return samples_[std::min(idx, samples_.size() - 1)];
}

TraceKind trace_kind_from(const std::string& name) {
    if (name == "hold") return TraceKind::hold;
    if (name == "reach") return TraceKind::reach;
    if (name == "circle") return TraceKind::circle;
    if (name == "locomote") return TraceKind::locomote;
    throw std::invalid_argument("unknown trace kind '" + name + "'");
}

OperatorTrace gen_trace(TraceKind kind, double duration, double rate) {
    if (!(duration > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gen_trace: duration and rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration * rate)) + 1;
    std::vector<TraceSample> samples;
    samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        TraceSample s = neutral();
        s.t = t;
        switch (kind) {
            case TraceKind::hold:
                break;
            case TraceKind::reach:
                s.palm_right.translation.x() += 0.3 * smoothstep01(t / 2.0);
                break;
            case TraceKind::circle: {
                const double w = 2.0 * std::numbers::pi * 0.2;
                s.palm_right.translation.y() += 0.1 * std::sin(w * t);
                s.palm_right.translation.z() += 0.1 * (1.0 - std::cos(w * t));
                break;
            }
            case TraceKind::locomote:
                s.rudder.pitch = 0.3 * pulse(t, 1.0, 3.0, 0.3);
                s.rudder.roll = 0.3 * pulse(t, 4.0, 6.0, 0.3);
                s.rudder.yaw = 0.4 * pulse(t, 7.0, 9.0, 0.3);
                break;
        }
        samples.push_back(std::move(s));
    }
    return OperatorTrace::from_samples(std::move(samples));
}

}  // namespace telelink
