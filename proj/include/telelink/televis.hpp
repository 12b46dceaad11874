// Wide-angle camera geometry and the head-motion side of the video pipeline:
// equidistant fisheye projection, compensation of head motion between capture
// and display by rendering onto a sphere, and the rate-limited head follower.
#pragma once

#include <optional>

#include "telelink/geometry.hpp"

namespace telelink {

/// Equidistant fisheye: radial pixel distance = focal * angle from the optical
/// axis (+z). Valid out past 90 deg, which a pinhole model cannot represent.
struct FisheyeIntrinsics {
    double focal = 600.0;  // px per radian
    double cx = 960.0, cy = 960.0;

    void validate() const;
};

/// One camera of the avatar head plus the sphere the renderer projects onto.
struct SphereCamera {
    Pose6D capture_pose{};     // camera frame at exposure time, world
    double radius = 1.0;       // rendering sphere radius, m
    double fov_h = 3.490659;   // full horizontal FOV, rad (may exceed pi)
    FisheyeIntrinsics intrinsics{};

    void validate() const;
};

/// Pixel to a unit view ray in the camera frame (+z optical axis).
/// Empty if the pixel lies outside the field of view.
std::optional<Vec3> pixel_to_ray(const SphereCamera& cam, double px, double py);

/// Unit camera-frame ray to pixel coordinates. Inverse of pixel_to_ray on the
/// valid domain.
Eigen::Vector2d ray_to_pixel(const SphereCamera& cam, const Vec3& ray);

/// Latency compensation: the pixel seen along `ray` at capture time is painted
/// onto a sphere of cam.radius centered at the capture position; the viewer at
/// `eye_pose` looks at that sphere point. Returns the view direction in the
/// eye frame, or empty for a degenerate geometry (eye at the sphere point).
std::optional<Vec3> compensated_direction(const SphereCamera& cam, const Vec3& ray,
                                          const Pose6D& eye_pose);

/// Residual angular error of the compensation for scene content at
/// `true_depth` meters from the camera, in radians.
std::optional<double> angular_error(const SphereCamera& cam, const Vec3& ray,
                                    const Pose6D& eye_pose, double true_depth);

/// Rate-limited pursuit of the operator head pose: translation capped at v_max,
/// rotation at w_max, each stepping straight toward the target.
struct HeadFollower {
    Pose6D pose{};
    double v_max = 1.0;                 // m/s
    double w_max = 3.14159265358979;    // rad/s

    void validate() const;
};

/// Advances follower.pose by one step of length dt toward `target` and returns
/// the new pose. Reaches the target exactly in finite steps and stays there.
Pose6D head_follow_step(HeadFollower& follower, const Pose6D& target, double dt);

}  // namespace telelink
