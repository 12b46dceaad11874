#include "telelink/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace telelink {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& at, const std::string& msg) {
    throw ConfigError(msg, line_of(at));
}

YAML::Node req(const YAML::Node& parent, const std::string& key) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) fail(parent, "missing key '" + key + "'");
    return n;
}

/// Typo guard: every key in `node` must be one of `allowed`.
void only_keys(const YAML::Node& node, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) fail(node, "expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "'", line_of(kv.first));
    }
}

double num(const YAML::Node& parent, const std::string& key) {
    const YAML::Node n = req(parent, key);
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        fail(n, "'" + key + "' must be a number");
    }
}

double num_where(const YAML::Node& parent, const std::string& key, bool ok_value,
                 const char* constraint, double value) {
    if (!ok_value) fail(parent[key], "'" + key + "' must be " + constraint);
    return value;
}

double positive(const YAML::Node& parent, const std::string& key) {
    const double v = num(parent, key);
    return num_where(parent, key, v > 0.0 && std::isfinite(v), "a positive number", v);
}

double non_negative(const YAML::Node& parent, const std::string& key) {
    const double v = num(parent, key);
    return num_where(parent, key, v >= 0.0 && std::isfinite(v), "non-negative", v);
}

int integer(const YAML::Node& parent, const std::string& key) {
    const YAML::Node n = req(parent, key);
    try {
        return n.as<int>();
    } catch (const YAML::Exception&) {
        fail(n, "'" + key + "' must be an integer");
    }
}

std::uint64_t u64(const YAML::Node& parent, const std::string& key) {
    const YAML::Node n = req(parent, key);
    try {
        return n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
        fail(n, "'" + key + "' must be a non-negative integer");
    }
}

std::vector<double> num_list(const YAML::Node& parent, const std::string& key,
                             std::size_t want) {
    const YAML::Node n = req(parent, key);
    std::vector<double> out;
    try {
        out = n.as<std::vector<double>>();
    } catch (const YAML::Exception&) {
        fail(n, "'" + key + "' must be a list of numbers");
    }
    if (out.size() != want)
        fail(n, "'" + key + "' must have " + std::to_string(want) + " entries, has " +
                    std::to_string(out.size()));
    for (double v : out)
        if (!std::isfinite(v)) fail(n, "'" + key + "' contains a non-finite entry");
    return out;
}

Vec3 vec3_of(const YAML::Node& parent, const std::string& key) {
    const auto v = num_list(parent, key, 3);
    return {v[0], v[1], v[2]};
}

/// rpy -> rotation, extrinsic x-y-z (roll about x first).
Quat rpy_to_quat(const Vec3& rpy) {
    return Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
        .normalized();
}

Pose6D pose_of(const YAML::Node& node) {
    only_keys(node, {"origin", "rpy"});
    return Pose6D::from_parts(vec3_of(node, "origin"), rpy_to_quat(vec3_of(node, "rpy")));
}

SessionParams load_session(const YAML::Node& n) {
    only_keys(n, {"operator_rate", "sensor_rate", "video_rate", "video_streams",
                  "video_frame_bytes", "keypoint_rate", "keypoint_bytes", "duration",
                  "scene_depth", "exposure_time", "encode_latency", "decode_latency"});
    SessionParams s;
    s.operator_rate = positive(n, "operator_rate");
    s.sensor_rate = positive(n, "sensor_rate");
    s.video_rate = positive(n, "video_rate");
    s.video_streams = integer(n, "video_streams");
    if (s.video_streams < 1 || s.video_streams > 4)
        fail(n["video_streams"], "'video_streams' must be between 1 and 4");
    const int vfb = integer(n, "video_frame_bytes");
    if (vfb < 1) fail(n["video_frame_bytes"], "'video_frame_bytes' must be positive");
    s.video_frame_bytes = static_cast<std::size_t>(vfb);
    s.keypoint_rate = positive(n, "keypoint_rate");
    const int kpb = integer(n, "keypoint_bytes");
    if (kpb < 0) fail(n["keypoint_bytes"], "'keypoint_bytes' must be non-negative");
    s.keypoint_bytes = static_cast<std::size_t>(kpb);
    s.duration = positive(n, "duration");
    s.scene_depth = positive(n, "scene_depth");
    s.exposure_time = non_negative(n, "exposure_time");
    s.encode_latency = non_negative(n, "encode_latency");
    s.decode_latency = non_negative(n, "decode_latency");
    return s;
}

ChannelModel load_channel(const YAML::Node& n) {
    only_keys(n, {"base_latency", "jitter_std", "loss_prob", "bandwidth_limit", "seed"});
    ChannelModel c;
    c.base_latency = non_negative(n, "base_latency");
    c.jitter_std = non_negative(n, "jitter_std");
    c.loss_prob = num(n, "loss_prob");
    if (!(c.loss_prob >= 0.0 && c.loss_prob < 1.0))
        fail(n["loss_prob"], "'loss_prob' must be in [0, 1)");
    c.bandwidth_limit = non_negative(n, "bandwidth_limit");
    c.seed = u64(n, "seed");
    return c;
}

SafetyParams load_safety(const YAML::Node& n) {
    only_keys(n, {"comm_loss_intervals", "fade_duration", "staleness_horizon"});
    SafetyParams s;
    s.comm_loss_intervals = integer(n, "comm_loss_intervals");
    if (s.comm_loss_intervals < 1)
        fail(n["comm_loss_intervals"], "'comm_loss_intervals' must be >= 1");
    s.fade_duration = positive(n, "fade_duration");
    s.staleness_horizon = positive(n, "staleness_horizon");
    return s;
}

SimulationParams load_simulation(const YAML::Node& n) {
    only_keys(n, {"hand_mass", "trace_spring", "eef_mass", "eef_inertia"});
    SimulationParams s;
    s.hand_mass = positive(n, "hand_mass");
    s.trace_spring = positive(n, "trace_spring");
    s.eef_mass = positive(n, "eef_mass");
    s.eef_inertia = positive(n, "eef_inertia");
    return s;
}

ImpedanceGains load_gains(const YAML::Node& n) {
    only_keys(n, {"kp_lin", "kd_lin", "kp_ang", "kd_ang"});
    ImpedanceGains g;
    g.kp_lin = non_negative(n, "kp_lin");
    g.kd_lin = non_negative(n, "kd_lin");
    g.kp_ang = non_negative(n, "kp_ang");
    g.kd_ang = non_negative(n, "kd_ang");
    return g;
}

ChainModel load_chain(const YAML::Node& n) {
    only_keys(n, {"joints", "tool"});
    const YAML::Node joints = req(n, "joints");
    if (!joints.IsSequence() || joints.size() == 0) fail(joints, "'joints' must be a non-empty list");
    ChainModel m;
    const int dof = static_cast<int>(joints.size());
    m.q_min.resize(dof);
    m.q_max.resize(dof);
    m.qd_max.resize(dof);
    m.tau_max.resize(dof);
    for (int i = 0; i < dof; ++i) {
        const YAML::Node j = joints[i];
        only_keys(j, {"axis", "origin", "rpy", "q_min", "q_max", "qd_max", "tau_max"});
        RevoluteJoint joint;
        joint.axis = vec3_of(j, "axis");
        if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
            fail(j["axis"], "'axis' must be a unit vector");
        joint.origin = Pose6D::from_parts(vec3_of(j, "origin"), rpy_to_quat(vec3_of(j, "rpy")));
        m.joints.push_back(joint);
        m.q_min[i] = num(j, "q_min");
        m.q_max[i] = num(j, "q_max");
        if (!(m.q_min[i] < m.q_max[i])) fail(j["q_min"], "'q_min' must be below 'q_max'");
        m.qd_max[i] = positive(j, "qd_max");
        m.tau_max[i] = positive(j, "tau_max");
    }
    m.tool = pose_of(req(n, "tool"));
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        fail(n, e.what());
    }
    return m;
}

HandMapping load_hand(const YAML::Node& n, int dof) {
    only_keys(n, {"retarget", "out_min", "out_max", "brake_threshold"});
    HandMapping h;
    const auto flat = num_list(n, "retarget", static_cast<std::size_t>(dof) * 20);
    h.retarget.resize(dof, 20);
    for (int r = 0; r < dof; ++r)
        for (int c = 0; c < 20; ++c) h.retarget(r, c) = flat[r * 20 + c];
    const auto lo = num_list(n, "out_min", dof);
    const auto hi = num_list(n, "out_max", dof);
    h.out_min = Eigen::Map<const VecX>(lo.data(), dof);
    h.out_max = Eigen::Map<const VecX>(hi.data(), dof);
    const auto thr = num_list(n, "brake_threshold", 5);
    h.brake_threshold = Eigen::Map<const VecX>(thr.data(), 5);
    try {
        h.validate();
    } catch (const std::invalid_argument& e) {
        fail(n, e.what());
    }
    return h;
}

MecanumBase load_base(const YAML::Node& n) {
    only_keys(n, {"wheel_radius", "half_length", "half_width", "wheel_speed_limit"});
    MecanumBase b;
    b.wheel_radius = positive(n, "wheel_radius");
    b.half_length = positive(n, "half_length");
    b.half_width = positive(n, "half_width");
    b.wheel_speed_limit = positive(n, "wheel_speed_limit");
    return b;
}

TwistLimits load_limits(const YAML::Node& n) {
    only_keys(n, {"v_cap", "v_capability", "w_cap"});
    TwistLimits l;
    l.v_cap = positive(n, "v_cap");
    l.v_capability = positive(n, "v_capability");
    if (l.v_cap > l.v_capability)
        fail(n["v_cap"], "'v_cap' must not exceed 'v_capability'");
    l.w_cap = positive(n, "w_cap");
    return l;
}

RudderParams load_rudder(const YAML::Node& n) {
    only_keys(n, {"k_lin", "k_ang", "deadzone"});
    RudderParams r;
    r.k_lin = non_negative(n, "k_lin");
    r.k_ang = non_negative(n, "k_ang");
    r.deadzone = non_negative(n, "deadzone");
    return r;
}

SphereCamera load_camera(const YAML::Node& n) {
    only_keys(n, {"radius", "fov_h", "focal", "cx", "cy"});
    SphereCamera c;
    c.radius = positive(n, "radius");
    c.fov_h = positive(n, "fov_h");
    c.intrinsics.focal = positive(n, "focal");
    c.intrinsics.cx = num(n, "cx");
    c.intrinsics.cy = num(n, "cy");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        fail(n, e.what());
    }
    return c;
}

HeadParams load_head(const YAML::Node& n) {
    only_keys(n, {"v_max", "w_max"});
    HeadParams h;
    h.v_max = positive(n, "v_max");
    h.w_max = positive(n, "w_max");
    return h;
}

AssistParams load_assist(const YAML::Node& n) {
    only_keys(n, {"gain_lin", "gain_ang", "deadband"});
    AssistParams a;
    a.gain_lin = non_negative(n, "gain_lin");
    a.gain_ang = non_negative(n, "gain_ang");
    a.deadband = non_negative(n, "deadband");
    return a;
}

RepulsionParams load_repulsion(const YAML::Node& n) {
    only_keys(n, {"margin", "k_rep"});
    RepulsionParams r;
    r.margin = positive(n, "margin");
    r.k_rep = non_negative(n, "k_rep");
    return r;
}

SystemConfig load_tree(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("top level must be a mapping", 1);
    only_keys(root, {"session", "channel", "safety", "simulation", "gains", "assist",
                     "repulsion", "filter", "chains", "hands", "base", "limits", "rudder",
                     "camera", "head"});
    SystemConfig cfg;
    cfg.session = load_session(req(root, "session"));
    cfg.channel = load_channel(req(root, "channel"));
    cfg.safety = load_safety(req(root, "safety"));
    cfg.simulation = load_simulation(req(root, "simulation"));
    cfg.gains = load_gains(req(root, "gains"));
    cfg.assist = load_assist(req(root, "assist"));
    cfg.repulsion = load_repulsion(req(root, "repulsion"));

    const YAML::Node filter = req(root, "filter");
    only_keys(filter, {"cutoff_hz"});
    cfg.filter_cutoff_hz = positive(filter, "cutoff_hz");
    if (cfg.filter_cutoff_hz >= cfg.session.sensor_rate / 2.0)
        fail(filter["cutoff_hz"], "'cutoff_hz' must be below half the sensor rate");

    const YAML::Node chains = req(root, "chains");
    only_keys(chains, {"left", "right"});
    cfg.chain_left = load_chain(req(chains, "left"));
    cfg.chain_right = load_chain(req(chains, "right"));

    const YAML::Node hands = req(root, "hands");
    only_keys(hands, {"left", "right"});
    cfg.hand_left = load_hand(req(hands, "left"), 5);
    cfg.hand_right = load_hand(req(hands, "right"), 9);

    cfg.base = load_base(req(root, "base"));
    cfg.limits = load_limits(req(root, "limits"));
    cfg.rudder = load_rudder(req(root, "rudder"));
    cfg.camera = load_camera(req(root, "camera"));
    cfg.head = load_head(req(root, "head"));
    return cfg;
}

SystemConfig load_root(const YAML::Node& root) {
    try {
        return load_tree(root);
    } catch (const ConfigError&) {
        throw;
    } catch (const YAML::Exception& e) {
        throw ConfigError(e.msg, e.mark.line + 1);
    }
}

}  // namespace

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'", -1);
    try {
        return load_root(YAML::Load(in));
    } catch (const ConfigError&) {
        throw;
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line + 1);
    }
}

SystemConfig parse_config(const std::string& text) {
    try {
        return load_root(YAML::Load(text));
    } catch (const ConfigError&) {
        throw;
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line + 1);
    }
}

}  // namespace telelink
