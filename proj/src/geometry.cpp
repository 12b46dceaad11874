#include "telelink/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace telelink {

Pose6D Pose6D::from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(angle))
        throw std::invalid_argument("from_axis_angle: axis must be nonzero and finite");
    Pose6D p;
    p.rotation = Quat(Eigen::AngleAxisd(angle, axis / n)).normalized();
    return p;
}

Pose6D Pose6D::from_parts(const Vec3& t, const Quat& q) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("from_parts: quaternion must be nonzero and finite");
    Pose6D p;
    p.translation = t;
    p.rotation = q;
    p.rotation.coeffs() /= n;
    return p;
}

Vec6 Twist::as_vec6() const {
    Vec6 v;
    v << linear, angular;
    return v;
}

Twist Twist::from_vec6(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

Vec6 Wrench::as_vec6() const {
    Vec6 v;
    v << force, torque;
    return v;
}

Wrench Wrench::from_vec6(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

Pose6D compose(const Pose6D& a, const Pose6D& b) {
    Pose6D out;
    out.translation = a.translation + a.rotation * b.translation;
    out.rotation = (a.rotation * b.rotation).normalized();
    return out;
}

Pose6D inverse(const Pose6D& p) {
    Pose6D out;
    out.rotation = p.rotation.conjugate().normalized();
    out.translation = -(out.rotation * p.translation);
    return out;
}

Vec3 quat_log(const Quat& q_in) {
    Quat q = q_in;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // short arc
    const double vn = q.vec().norm();
    const double angle = 2.0 * std::atan2(vn, q.w());
    if (vn < 1e-12) return 2.0 * q.vec();  // sin(a/2) ~ a/2
    Vec3 axis = q.vec() / vn;
    if (q.w() == 0.0) {
        // angle == pi exactly: q and -q carry opposite vector parts, pick one.
        int k = 0;
        axis.cwiseAbs().maxCoeff(&k);
        if (axis[k] < 0.0) axis = -axis;
    }
    return axis * angle;
}

Quat quat_exp(const Vec3& aa) {
    const double angle = aa.norm();
    if (angle < 1e-12) {
        Quat q(1.0, 0.5 * aa.x(), 0.5 * aa.y(), 0.5 * aa.z());
        return q.normalized();
    }
    const Vec3 axis = aa / angle;
    return Quat(Eigen::AngleAxisd(angle, axis)).normalized();
}

Vec6 pose_error(const Pose6D& target, const Pose6D& current) {
    Vec6 e;
    e.head<3>() = target.translation - current.translation;
    e.tail<3>() = quat_log((target.rotation * current.rotation.conjugate()).normalized());
    return e;
}

double quat_angle(const Quat& a, const Quat& b) {
    return quat_log((a * b.conjugate()).normalized()).norm();
}

bool is_finite(const Pose6D& p) {
    return p.translation.allFinite() && p.rotation.coeffs().allFinite();
}

bool is_finite(const Twist& t) { return t.linear.allFinite() && t.angular.allFinite(); }

bool is_finite(const Wrench& w) { return w.force.allFinite() && w.torque.allFinite(); }

bool is_valid(const Pose6D& p, double tol) {
    return is_finite(p) && std::abs(p.rotation.norm() - 1.0) <= tol;
}

}  // namespace telelink
