#include "telelink/kinematics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace telelink {

namespace {

void check_q(const ChainModel& model, const VecX& q, const char* who) {
    if (q.size() != model.dof())
        throw std::invalid_argument(std::string(who) + ": joint vector size mismatch");
    if (!q.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite joints");
}

Pose6D joint_rotation(const RevoluteJoint& j, double q) {
    Pose6D p;
    p.rotation = Quat(Eigen::AngleAxisd(q, j.axis)).normalized();
    return p;
}

}  // namespace

void ChainModel::validate() const {
    const int n = dof();
    if (n == 0) throw std::invalid_argument("chain: no joints");
    if (q_min.size() != n || q_max.size() != n || qd_max.size() != n || tau_max.size() != n)
        throw std::invalid_argument("chain: limit vector size mismatch");
    for (int i = 0; i < n; ++i) {
        if (std::abs(joints[i].axis.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("chain: joint axis must be unit length");
        if (!is_valid(joints[i].origin, 1e-9))
            throw std::invalid_argument("chain: joint origin must be a valid pose");
        if (!(q_min[i] < q_max[i])) throw std::invalid_argument("chain: q_min must be < q_max");
        if (!(qd_max[i] > 0.0)) throw std::invalid_argument("chain: qd_max must be positive");
        if (!(tau_max[i] > 0.0)) throw std::invalid_argument("chain: tau_max must be positive");
    }
    if (!is_valid(tool, 1e-9)) throw std::invalid_argument("chain: tool must be a valid pose");
}

double ChainModel::total_length() const {
    double len = tool.translation.norm();
    for (const auto& j : joints) len += j.origin.translation.norm();
    return len;
}

Pose6D forward_kinematics(const ChainModel& model, const VecX& q) {
    check_q(model, q, "forward_kinematics");
    Pose6D t = Pose6D::identity();
    for (int i = 0; i < model.dof(); ++i) {
        t = compose(t, model.joints[i].origin);
        t = compose(t, joint_rotation(model.joints[i], q[i]));
    }
    return compose(t, model.tool);
}

Jacobian jacobian(const ChainModel& model, const VecX& q) {
    check_q(model, q, "jacobian");
    const int n = model.dof();
    std::vector<Vec3> z(n), p(n);
    Pose6D t = Pose6D::identity();
    for (int i = 0; i < n; ++i) {
        t = compose(t, model.joints[i].origin);
        p[i] = t.translation;
        z[i] = t.rotation * model.joints[i].axis;
        t = compose(t, joint_rotation(model.joints[i], q[i]));
    }
    const Vec3 p_eef = compose(t, model.tool).translation;
    Jacobian j(6, n);
    for (int i = 0; i < n; ++i) {
        j.col(i).head<3>() = z[i].cross(p_eef - p[i]);
        j.col(i).tail<3>() = z[i];
    }
    return j;
}

VecX limit_proximity(const ChainModel& model, const VecX& q, double margin) {
    check_q(model, q, "limit_proximity");
    if (!(margin > 0.0)) throw std::invalid_argument("limit_proximity: margin must be positive");
    VecX out(model.dof());
    for (int i = 0; i < model.dof(); ++i) {
        const double upper = std::max(0.0, margin - (model.q_max[i] - q[i]));
        const double lower = std::max(0.0, margin - (q[i] - model.q_min[i]));
        out[i] = upper - lower;
    }
    return out;
}

PredictedAvatarState predict_avatar(const ChainModel& model, const JointState& last_reported,
                                    const Pose6D& last_command, double elapsed,
                                    double staleness_horizon) {
    check_q(model, last_reported.q, "predict_avatar");
    if (last_reported.qd.size() != model.dof())
        throw std::invalid_argument("predict_avatar: qd size mismatch");
    if (!(elapsed >= 0.0)) throw std::invalid_argument("predict_avatar: elapsed must be >= 0");
    if (!(staleness_horizon > 0.0))
        throw std::invalid_argument("predict_avatar: staleness horizon must be positive");

    PredictedAvatarState out;
    out.state = last_reported;
    out.stale = elapsed > staleness_horizon;
    const double t_int = std::min(elapsed, staleness_horizon);
    out.prediction_horizon = t_int;
    if (t_int <= 0.0) return out;

    const int n = model.dof();
    // Substep of at most 1 ms, capped at 16 steps to bound per-call cost.
    const int steps = std::clamp(static_cast<int>(std::ceil(t_int / 1e-3)), 1, 16);
    const double h = t_int / steps;
    constexpr double lambda = 0.01;  // damped least squares

    VecX q = last_reported.q;
    VecX qd = VecX::Zero(n);
    for (int s = 0; s < steps; ++s) {
        const Vec6 e = pose_error(last_command, forward_kinematics(model, q));
        const Jacobian j = jacobian(model, q);
        const Eigen::MatrixXd a =
            j.transpose() * j + lambda * lambda * Eigen::MatrixXd::Identity(n, n);
        qd = a.ldlt().solve(j.transpose() * (e / h));
        qd = qd.cwiseMax(-model.qd_max).cwiseMin(model.qd_max);
        q = (q + qd * h).cwiseMax(model.q_min).cwiseMin(model.q_max);
    }
    out.state.q = q;
    out.state.qd = qd;
    return out;
}

}  // namespace telelink
