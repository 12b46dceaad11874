#include "telelink/session.hpp"

#include <algorithm>
#include <cmath>

#include "telelink/kinematics.hpp"
#include "telelink/locomotion.hpp"

namespace telelink {

namespace {

constexpr double kDlsLambda = 0.01;

std::uint64_t ns_of(double t) { return static_cast<std::uint64_t>(std::llround(t * 1e9)); }

ChannelModel channel_model(const SystemConfig& cfg, const SessionOptions& opt,
                           std::uint64_t stream) {
    ChannelModel m = cfg.channel;
    if (opt.seed) m.seed = *opt.seed;
    m.seed += stream;
    return m;
}

/// Damped-least-squares joint velocity pursuing `err` over dt, unclamped.
VecX dls_velocity(const Jacobian& J, const Vec6& err, double dt) {
    const int n = static_cast<int>(J.cols());
    const Eigen::MatrixXd A =
        J.transpose() * J + kDlsLambda * kDlsLambda * Eigen::MatrixXd::Identity(n, n);
    return A.ldlt().solve(J.transpose() * (err / dt));
}

/// Camera mount for stream c on the head rig: a stereo pair 64 mm apart,
/// further pairs stacked 2 cm up.
Pose6D stream_mount(int c) {
    return Pose6D::from_translation(
        Vec3(c % 2 == 0 ? -0.032 : 0.032, 0.0, 0.02 * (c / 2)));
}

}  // namespace

Session::ArmSide::ArmSide(const SystemConfig& cfg, Side side, const TraceSample& start)
    : filter(cfg.filter_cutoff_hz, cfg.session.sensor_rate, 6) {
    const Pose6D& palm = start.palm(side);
    eef_pose = palm;
    target = palm;
    live_target = palm;
    hand_pos = palm.translation;
    hand_rot_prev = palm.rotation;

    const ChainModel& model = side == Side::left ? cfg.chain_left : cfg.chain_right;
    const int n = model.dof();
    shadow.q = 0.5 * (model.q_min + model.q_max);
    shadow.qd = VecX::Zero(n);
    // settle the joint-space mirror onto the start pose
    for (int it = 0; it < 500; ++it) {
        const Vec6 e = pose_error(palm, forward_kinematics(model, shadow.q));
        if (e.norm() < 1e-10) break;
        const VecX dq = dls_velocity(jacobian(model, shadow.q), e, 1.0);
        shadow.q = (shadow.q + dq).cwiseMax(model.q_min).cwiseMin(model.q_max);
    }
    tau = VecX::Zero(n);
    brakes.engaged.assign(5, false);
}

Session::Session(const SystemConfig& cfg, const OperatorTrace& trace, SessionOptions opt)
    : cfg_(cfg),
      trace_(trace),
      opt_(opt),
      duration_(opt.duration > 0.0 ? opt.duration : cfg.session.duration),
      dt_op_(1.0 / cfg.session.operator_rate),
      dt_sensor_(1.0 / cfg.session.sensor_rate),
      dt_video_(1.0 / cfg.session.video_rate),
      dt_keypoint_(1.0 / cfg.session.keypoint_rate),
      ch_up_(channel_model(cfg, opt, 0)),
      ch_down_(channel_model(cfg, opt, 1)),
      sides_{ArmSide(cfg, Side::left, trace.samples().front()),
             ArmSide(cfg, Side::right, trace.samples().front())} {
    const TraceSample& start = trace_.samples().front();
    follower_.pose = start.head;
    follower_.v_max = cfg_.head.v_max;
    follower_.w_max = cfg_.head.w_max;
    head_target_ = start.head;

    if (opt_.blackout_start && opt_.blackout_duration > 0.0) {
        ch_up_.set_blackout(*opt_.blackout_start, *opt_.blackout_start + opt_.blackout_duration);
        ch_down_.set_blackout(*opt_.blackout_start,
                              *opt_.blackout_start + opt_.blackout_duration);
    }
    log_.seed = channel_model(cfg, opt, 0).seed;
}

const ChainModel& Session::chain(Side s) const {
    return s == Side::left ? cfg_.chain_left : cfg_.chain_right;
}

const HandMapping& Session::hand(Side s) const {
    return s == Side::left ? cfg_.hand_left : cfg_.hand_right;
}

Session::SendInfo Session::send_up(const Message& msg, double t) {
    std::vector<std::uint8_t> bytes = encode(msg, up_seq_, ns_of(t));
    const SendInfo info{up_seq_++, bytes.size()};
    ch_up_.send(std::move(bytes), t);
    return info;
}

Session::SendInfo Session::send_down(const Message& msg, double t) {
    std::vector<std::uint8_t> bytes = encode(msg, down_seq_, ns_of(t));
    const SendInfo info{down_seq_++, bytes.size()};
    ch_down_.send(std::move(bytes), t);
    return info;
}

void Session::enter_mode(SessionMode to, double t) {
    log_.transitions.push_back({t, mode_, to});
    mode_ = to;
    send_down(ErrorState{Side::left, static_cast<std::uint32_t>(to)}, t);
}

void Session::trigger_estop(double t) {
    if (mode_ == SessionMode::estopped) return;
    enter_mode(SessionMode::estopped, t);
    for (ArmSide& a : sides_) {
        a.f_imp = {};
        a.tau.setZero();
        a.eef_vel.setZero();
        a.eef_omega.setZero();
        a.target_twist = {};
    }
    base_cmd_ = {};
    wheels_ = {};
}

void Session::run() {
    std::uint64_t k_op = 0, k_sensor = 0, k_avatar = 0, k_video = 0, k_keypoint = 0;
    bool estop_pending = opt_.estop_time.has_value();
    const bool video_on = opt_.video;
    const double inf = std::numeric_limits<double>::infinity();

    while (!energy_aborted_) {
        // candidate next event per stream; priority breaks time ties
        const double times[7] = {
            estop_pending ? *opt_.estop_time : inf,
            static_cast<double>(k_op) * dt_op_,
            static_cast<double>(k_sensor) * dt_sensor_,
            static_cast<double>(k_avatar) * dt_op_,
            video_on ? static_cast<double>(k_video) * dt_video_ : inf,
            video_on && !video_sends_.empty() ? video_sends_.front().t : inf,
            static_cast<double>(k_keypoint) * dt_keypoint_,
        };
        int best = 0;
        for (int i = 1; i < 7; ++i)
            if (times[i] < times[best]) best = i;
        if (times[best] >= duration_) break;

        switch (best) {
            case 0:
                trigger_estop(times[0]);
                estop_pending = false;
                break;
            case 1: operator_tick(k_op++); break;
            case 2: sensor_tick(k_sensor++); break;
            case 3: avatar_tick(k_avatar++); break;
            case 4: video_capture(k_video++); break;
            case 5: video_send(); break;
            case 6: keypoint_send(k_keypoint++); break;
        }
    }
}

void Session::operator_tick(std::uint64_t k) {
    const double t = static_cast<double>(k) * dt_op_;

    for (const Delivery& d : ch_down_.poll(t)) {
        const DecodeResult r = decode(d.bytes);
        if (r.ok()) dispatch_to_operator(*r.frame, d.time, t);
    }
    process_displays(t);

    const TraceSample& s = trace_.at(t);
    for (Side side : {Side::left, Side::right}) {
        ArmSide& a = sides_[static_cast<int>(side)];
        const Pose6D& palm = s.palm(side);

        const Vec3 f = cfg_.simulation.trace_spring * (palm.translation - a.hand_pos) -
                       a.feedback.force;
        a.hand_vel += dt_op_ * f / cfg_.simulation.hand_mass;
        a.hand_pos += dt_op_ * a.hand_vel;
        Vec3 w = Vec3::Zero();
        if (k > 0) w = quat_log(palm.rotation * a.hand_rot_prev.conjugate()) / dt_op_;
        a.hand_rot_prev = palm.rotation;

        send_up(EefPoseCmd{side, Pose6D::from_parts(a.hand_pos, palm.rotation),
                           Twist{a.hand_vel, w}},
                t);
        send_up(HandJointCmd{side, retarget_fingers(hand(side), s.fingers(side))}, t);
    }
    send_up(HeadPoseCmd{s.head}, t);
    send_up(BaseVelocityCmd{rudder_to_twist(s.rudder, cfg_.rudder.k_lin, cfg_.rudder.k_ang,
                                            cfg_.rudder.deadzone)},
            t);
}

void Session::dispatch_to_operator(const DecodedFrame& f, double arrival, double t) {
    ++op_rx_[msg_type_of(f.message) - 1];

    if (const auto* wf = std::get_if<WrenchFeedback>(&f.message)) {
        sides_[static_cast<int>(wf->side)].feedback = wf->wrench;
        const auto it = rtt_origin_.find(f.seq);
        if (it != rtt_origin_.end()) {
            last_rtt_ = t - it->second;
            rtt_origin_.erase(it);
        }
    } else if (const auto* hc = std::get_if<HandCurrentFeedback>(&f.message)) {
        const VecX currents = Eigen::Map<const VecX>(hc->currents.data(), 5);
        finger_feedback(hand(hc->side), sides_[static_cast<int>(hc->side)].brakes, currents);
    } else if (const auto* af = std::get_if<ArmStateFeedback>(&f.message)) {
        ArmSide& a = sides_[static_cast<int>(af->side)];
        a.last_report = {af->q, af->qd};
        a.last_report_at = static_cast<double>(f.timestamp_ns) * 1e-9;
    } else if (const auto* vf = std::get_if<VideoFrame>(&f.message)) {
        const auto key = std::make_pair(static_cast<int>(vf->stream_id),
                                        vf->capture_timestamp_ns);
        const auto fi = frame_index_.find(key);
        if (fi != frame_index_.end()) log_.frames[fi->second].recv_t = arrival;
        displays_.push_back(
            {arrival + cfg_.session.decode_latency, key.first, key.second});
    }
    // ErrorState: counted above, shown on the operator overlay only
}

void Session::process_displays(double t) {
    while (!displays_.empty() && displays_.front().ready <= t) {
        const PendingDisplay d = displays_.front();
        displays_.pop_front();
        const auto key = std::make_pair(d.stream, d.capture_ns);

        const auto truth = capture_truth_.find(key);
        if (truth != capture_truth_.end()) {
            SphereCamera cam = cfg_.camera;
            cam.capture_pose = truth->second;
            const Pose6D eye = compose(trace_.at(t).head, stream_mount(d.stream));
            const auto err =
                angular_error(cam, Vec3::UnitZ(), eye, cfg_.session.scene_depth);
            if (err) last_televis_ = *err;
            capture_truth_.erase(truth);
        }
        const auto fi = frame_index_.find(key);
        if (fi != frame_index_.end()) {
            log_.frames[fi->second].display_t = t;
            frame_index_.erase(fi);
        }
    }
}

void Session::sensor_tick(std::uint64_t k) {
    const double t = static_cast<double>(k) * dt_sensor_;
    for (Side side : {Side::left, Side::right}) {
        ArmSide& a = sides_[static_cast<int>(side)];
        const Vec6 filtered = a.filter.step(a.f_imp.as_vec6());
        const SendInfo info = send_down(WrenchFeedback{side, Wrench::from_vec6(filtered)}, t);
        if (any_cmd_rx_) rtt_origin_[info.seq] = a.last_cmd_sent_at;
        send_down(HandCurrentFeedback{side, {}}, t);
        send_down(ArmStateFeedback{side, a.shadow.q, a.shadow.qd}, t);
    }
    while (rtt_origin_.size() > 4096) rtt_origin_.erase(rtt_origin_.begin());
}

void Session::dispatch_to_avatar(const DecodedFrame& f, double t) {
    ++av_rx_[msg_type_of(f.message) - 1];

    if (const auto* c = std::get_if<EefPoseCmd>(&f.message)) {
        ArmSide& a = sides_[static_cast<int>(c->side)];
        a.live_target = c->pose;
        a.live_twist = c->twist;
        a.last_cmd_sent_at = static_cast<double>(f.timestamp_ns) * 1e-9;
        any_cmd_rx_ = true;
        last_cmd_rx_time_ = t;
        fresh_cmd_rx_ = true;
    } else if (const auto* h = std::get_if<HeadPoseCmd>(&f.message)) {
        head_target_ = h->pose;
    } else if (const auto* b = std::get_if<BaseVelocityCmd>(&f.message)) {
        base_cmd_ = b->twist;
    }
    // HandJointCmd and FaceKeypoints drive hardware this model does not carry
}

void Session::update_arm(ArmSide& a, Side side, double dt) {
    if (mode_ == SessionMode::fading) {
        a.target = fade_target(a.fade, a.live_target, dt);
        a.target_twist = a.live_twist;
    } else {
        a.target = a.live_target;
        a.target_twist = a.live_twist;
    }

    const Twist eef_twist{a.eef_vel, a.eef_omega};
    a.f_imp = impedance_wrench(a.target, a.target_twist, a.eef_pose, eef_twist, cfg_.gains);

    a.eef_vel += dt * a.f_imp.force / cfg_.simulation.eef_mass;
    a.eef_pose.translation += dt * a.eef_vel;
    a.eef_omega += dt * a.f_imp.torque / cfg_.simulation.eef_inertia;
    a.eef_pose.rotation = (quat_exp(a.eef_omega * dt) * a.eef_pose.rotation).normalized();

    const ChainModel& model = chain(side);
    const Jacobian J = jacobian(model, a.shadow.q);
    const Vec6 e = pose_error(a.eef_pose, forward_kinematics(model, a.shadow.q));
    VecX qd = dls_velocity(J, e, dt);
    qd = qd.cwiseMax(-model.qd_max).cwiseMin(model.qd_max);
    a.shadow.q = (a.shadow.q + qd * dt).cwiseMax(model.q_min).cwiseMin(model.q_max);
    a.shadow.qd = qd;

    const VecX raw = J.transpose() * a.f_imp.as_vec6() +
                     limit_repulsion(model, a.shadow.q, cfg_.repulsion.margin,
                                     cfg_.repulsion.k_rep);
    a.tau = raw.cwiseMax(-model.tau_max).cwiseMin(model.tau_max);
}

void Session::update_base(double dt) {
    const Twist tw = clamp_twist(base_cmd_, cfg_.limits);
    wheels_ = twist_to_wheels(cfg_.base, tw);
    if (!wheels_.within_limits)
        for (double& w : wheels_.speeds) w *= wheels_.feasible_scale;
    const TwistEstimate applied = wheels_to_twist(cfg_.base, wheels_.speeds);
    odom_ = integrate_odometry(odom_, applied.twist, dt);
}

void Session::avatar_tick(std::uint64_t k) {
    const double t = static_cast<double>(k) * dt_op_;

    for (const Delivery& d : ch_up_.poll(t)) {
        const DecodeResult r = decode(d.bytes);
        if (r.ok()) dispatch_to_avatar(*r.frame, t);
    }

    if (mode_ != SessionMode::estopped) {
        const bool comm_lost =
            any_cmd_rx_ &&
            t - last_cmd_rx_time_ > cfg_.safety.comm_loss_intervals * dt_op_;
        if ((mode_ == SessionMode::running || mode_ == SessionMode::fading) && comm_lost) {
            enter_mode(SessionMode::holding, t);
            for (ArmSide& a : sides_) {
                a.target = a.eef_pose;  // pin exactly where the arm is
                a.target_twist = {};
                a.eef_vel.setZero();
                a.eef_omega.setZero();
                a.f_imp = {};
            }
            base_cmd_ = {};
            wheels_ = {};
            head_target_ = follower_.pose;
            fresh_cmd_rx_ = false;
        }
        if (mode_ == SessionMode::holding && fresh_cmd_rx_) {
            enter_mode(SessionMode::fading, t);
            for (ArmSide& a : sides_)
                a.fade = FadeState{a.eef_pose, 0.0, cfg_.safety.fade_duration};
        }

        if (mode_ == SessionMode::running || mode_ == SessionMode::fading) {
            update_arm(sides_[0], Side::left, dt_op_);
            update_arm(sides_[1], Side::right, dt_op_);
            if (mode_ == SessionMode::fading && sides_[0].fade.progress >= 1.0 &&
                sides_[1].fade.progress >= 1.0)
                enter_mode(SessionMode::running, t);
            head_follow_step(follower_, head_target_, dt_op_);
            update_base(dt_op_);
        } else {  // holding: everything pinned, torque is repulsion only
            for (Side side : {Side::left, Side::right}) {
                ArmSide& a = sides_[static_cast<int>(side)];
                const ChainModel& model = chain(side);
                const VecX rep = limit_repulsion(model, a.shadow.q, cfg_.repulsion.margin,
                                                 cfg_.repulsion.k_rep);
                a.tau = rep.cwiseMax(-model.tau_max).cwiseMin(model.tau_max);
                a.shadow.qd.setZero();
            }
        }
    }

    TickRecord r;
    r.tick = k;
    r.t = t;
    r.mode = mode_;
    for (int i = 0; i < 2; ++i) {
        const Vec6 e = pose_error(sides_[i].target, sides_[i].eef_pose);
        r.eef_err_lin[i] = e.head<3>().norm();
        r.eef_err_ang[i] = e.tail<3>().norm();
        r.torque_norm[i] = sides_[i].tau.norm();
    }
    r.wrench_rtt = last_rtt_;
    r.televis_err = last_televis_;
    r.bandwidth_bps = ch_down_.bandwidth_meter(0.5);
    r.energy = energy(t);
    double wheel_sq = 0.0;
    for (double w : wheels_.speeds) wheel_sq += w * w;
    r.wheel_norm = std::sqrt(wheel_sq);
    r.base_x = odom_.x;
    r.base_y = odom_.y;
    r.base_theta = odom_.theta;
    log_.ticks.push_back(r);

    peak_energy_ = std::max(peak_energy_, r.energy);
    if (opt_.energy_abort > 0.0 && r.energy > opt_.energy_abort) energy_aborted_ = true;
}

double Session::energy(double t) const {
    const TraceSample& s = trace_.at(t);
    double e_total = 0.0;
    for (Side side : {Side::left, Side::right}) {
        const ArmSide& a = sides_[static_cast<int>(side)];
        const Vec3 stretch = s.palm(side).translation - a.hand_pos;
        e_total += 0.5 * cfg_.simulation.hand_mass * a.hand_vel.squaredNorm();
        e_total += 0.5 * cfg_.simulation.trace_spring * stretch.squaredNorm();
        e_total += 0.5 * cfg_.simulation.eef_mass * a.eef_vel.squaredNorm();
        e_total += 0.5 * cfg_.simulation.eef_inertia * a.eef_omega.squaredNorm();
        const Vec6 err = pose_error(a.target, a.eef_pose);
        e_total += 0.5 * cfg_.gains.kp_lin * err.head<3>().squaredNorm();
        e_total += 0.5 * cfg_.gains.kp_ang * err.tail<3>().squaredNorm();
    }
    return e_total;
}

void Session::video_capture(std::uint64_t k) {
    const double t = static_cast<double>(k) * dt_video_;
    for (int c = 0; c < cfg_.session.video_streams; ++c) {
        const std::uint64_t cap_ns = ns_of(t);
        const Pose6D truth = compose(follower_.pose, stream_mount(c));
        capture_truth_[{c, cap_ns}] = truth;

        FrameRecord fr;
        fr.stream = c;
        fr.capture_t = t;
        fr.send_t = t + cfg_.session.exposure_time + cfg_.session.encode_latency;
        log_.frames.push_back(fr);
        frame_index_[{c, cap_ns}] = log_.frames.size() - 1;
        video_sends_.push_back({fr.send_t, c, cap_ns});
    }
    // lost frames leave entries behind; keep both maps bounded
    while (capture_truth_.size() > 1024) capture_truth_.erase(capture_truth_.begin());
    while (frame_index_.size() > 1024) frame_index_.erase(frame_index_.begin());
}

void Session::video_send() {
    const PendingSend ps = video_sends_.front();
    video_sends_.pop_front();
    VideoFrame vf;
    vf.stream_id = static_cast<std::uint8_t>(ps.stream);
    vf.capture_timestamp_ns = ps.capture_ns;
    vf.payload.assign(cfg_.session.video_frame_bytes, 0);
    const SendInfo info = send_down(vf, ps.t);
    const auto fi = frame_index_.find({ps.stream, ps.capture_ns});
    if (fi != frame_index_.end()) log_.frames[fi->second].bytes = info.wire_bytes;
}

void Session::keypoint_send(std::uint64_t k) {
    const double t = static_cast<double>(k) * dt_keypoint_;
    FaceKeypoints kp;
    kp.payload.assign(cfg_.session.keypoint_bytes, 0);
    send_up(kp, t);
}

MetricsLog run_session(const SystemConfig& cfg, const OperatorTrace& trace,
                       const SessionOptions& opt) {
    Session s(cfg, trace, opt);
    s.run();
    return s.take_log();
}

std::vector<SweepPoint> stability_sweep(const SystemConfig& cfg, const OperatorTrace& trace,
                                        const std::vector<double>& delays, double duration) {
    SessionOptions opt;
    opt.duration = duration;
    opt.video = false;

    const auto run_with_delay = [&](double delay, double abort_at) {
        SystemConfig c = cfg;
        c.channel.base_latency = delay;
        SessionOptions o = opt;
        o.energy_abort = abort_at;
        Session s(c, trace, o);
        s.run();
        return s.peak_energy();
    };

    const double e0 = run_with_delay(0.0, 0.0);
    const double threshold = 100.0 * std::max(e0, 1e-9);

    std::vector<SweepPoint> out;
    out.reserve(delays.size());
    for (double d : delays) {
        const double peak = run_with_delay(d, threshold);
        out.push_back({d, peak, peak > threshold});
    }
    return out;
}

}  // namespace telelink
