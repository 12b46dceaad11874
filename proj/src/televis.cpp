#include "telelink/televis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace telelink {

void FisheyeIntrinsics::validate() const {
    if (!(focal > 0.0)) throw std::invalid_argument("fisheye: focal must be positive");
    if (!std::isfinite(cx) || !std::isfinite(cy))
        throw std::invalid_argument("fisheye: principal point must be finite");
}

void SphereCamera::validate() const {
    intrinsics.validate();
    if (!(radius > 0.0)) throw std::invalid_argument("camera: sphere radius must be positive");
    if (!(fov_h > 0.0 && fov_h < 2.0 * std::numbers::pi))
        throw std::invalid_argument("camera: fov must be in (0, 2*pi)");
    if (!is_valid(capture_pose, 1e-6))
        throw std::invalid_argument("camera: capture pose invalid");
}

std::optional<Vec3> pixel_to_ray(const SphereCamera& cam, double px, double py) {
    const double dx = px - cam.intrinsics.cx;
    const double dy = py - cam.intrinsics.cy;
    const double r = std::hypot(dx, dy);
    const double theta = r / cam.intrinsics.focal;
    if (theta > cam.fov_h / 2.0) return std::nullopt;
    if (r < 1e-300) return Vec3(0.0, 0.0, 1.0);
    const double s = std::sin(theta) / r;
    return Vec3(dx * s, dy * s, std::cos(theta));
}

Eigen::Vector2d ray_to_pixel(const SphereCamera& cam, const Vec3& ray) {
    const Vec3 d = ray.normalized();
    const double theta = std::atan2(d.head<2>().norm(), d.z());
    const double r = theta * cam.intrinsics.focal;
    const double plane = d.head<2>().norm();
    if (plane < 1e-300) return {cam.intrinsics.cx, cam.intrinsics.cy};
    return {cam.intrinsics.cx + d.x() / plane * r, cam.intrinsics.cy + d.y() / plane * r};
}

std::optional<Vec3> compensated_direction(const SphereCamera& cam, const Vec3& ray,
                                          const Pose6D& eye_pose) {
    const double n = ray.norm();
    if (!(n > 0.0) || !ray.allFinite())
        throw std::invalid_argument("compensated_direction: ray must be nonzero and finite");
    const Vec3 dir_world = cam.capture_pose.rotation * (ray / n);
    const Vec3 p = cam.capture_pose.translation + cam.radius * dir_world;
    const Vec3 v = p - eye_pose.translation;
    if (v.norm() < 1e-12) return std::nullopt;  // eye sitting on the sphere point
    return (eye_pose.rotation.conjugate() * v).normalized();
}

std::optional<double> angular_error(const SphereCamera& cam, const Vec3& ray,
                                    const Pose6D& eye_pose, double true_depth) {
    if (!(true_depth > 0.0)) throw std::invalid_argument("angular_error: depth must be positive");
    const double n = ray.norm();
    if (!(n > 0.0) || !ray.allFinite())
        throw std::invalid_argument("angular_error: ray must be nonzero and finite");
    const Vec3 dir_world = cam.capture_pose.rotation * (ray / n);
    const Vec3 p_true = cam.capture_pose.translation + true_depth * dir_world;
    const Vec3 v_true = p_true - eye_pose.translation;
    if (v_true.norm() < 1e-12) return std::nullopt;
    const auto shown = compensated_direction(cam, ray, eye_pose);
    if (!shown) return std::nullopt;
    const Vec3 a = eye_pose.rotation.conjugate() * v_true;
    const Vec3 b = *shown;
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

void HeadFollower::validate() const {
    if (!(v_max > 0.0) || !(w_max > 0.0))
        throw std::invalid_argument("head follower: rate limits must be positive");
}

Pose6D head_follow_step(HeadFollower& follower, const Pose6D& target, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("head_follow_step: dt must be >= 0");
    follower.validate();
    // Reach tolerance slightly above one step so an exact multiple of steps
    // lands on the target instead of leaving a rounding-sized remainder.
    const Vec3 d = target.translation - follower.pose.translation;
    const double dist = d.norm();
    const double step = follower.v_max * dt;
    if (dist <= step * (1.0 + 1e-9))
        follower.pose.translation = target.translation;
    else
        follower.pose.translation += d * (step / dist);

    const Quat rel = (target.rotation * follower.pose.rotation.conjugate()).normalized();
    const Vec3 aa = quat_log(rel);
    const double angle = aa.norm();
    const double astep = follower.w_max * dt;
    if (angle <= astep * (1.0 + 1e-9))
        follower.pose.rotation = target.rotation;
    else
        follower.pose.rotation =
            (quat_exp(aa * (astep / angle)) * follower.pose.rotation).normalized();
    return follower.pose;
}

}  // namespace telelink
