#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "telelink/geometry.hpp"

using namespace telelink;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mt19937 rng(20260823);

double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Pose6D random_pose() {
    Pose6D p;
    p.translation = Vec3(uniform(-2, 2), uniform(-2, 2), uniform(-2, 2));
    const Vec3 axis = Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)).normalized();
    p.rotation = Quat(Eigen::AngleAxisd(uniform(-kPi, kPi), axis)).normalized();
    return p;
}

// Independent oracle: the same composition done with 4x4 homogeneous matrices.
Eigen::Matrix4d as_matrix(const Pose6D& p) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.rotation.toRotationMatrix();
    m.topRightCorner<3, 1>() = p.translation;
    return m;
}

}  // namespace

TEST_CASE("compose matches homogeneous matrix multiplication") {
    const Pose6D a = Pose6D::from_axis_angle(Vec3::UnitZ(), kPi / 2.0);
    const Pose6D b = Pose6D::from_translation(Vec3(1, 0, 0));
    const Pose6D c = compose(a, b);
    CHECK(c.translation.isApprox(Vec3(0, 1, 0), 1e-12));

    for (int i = 0; i < 200; ++i) {
        const Pose6D p = random_pose(), q = random_pose();
        const Eigen::Matrix4d want = as_matrix(p) * as_matrix(q);
        const Eigen::Matrix4d got = as_matrix(compose(p, q));
        CHECK((want - got).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("compose is associative within 1e-9") {
    for (int i = 0; i < 200; ++i) {
        const Pose6D a = random_pose(), b = random_pose(), c = random_pose();
        const Pose6D lhs = compose(compose(a, b), c);
        const Pose6D rhs = compose(a, compose(b, c));
        CHECK((lhs.translation - rhs.translation).norm() < 1e-9);
        CHECK(quat_angle(lhs.rotation, rhs.rotation) < 1e-9);
    }
}

TEST_CASE("inverse composes to identity") {
    for (int i = 0; i < 200; ++i) {
        const Pose6D p = random_pose();
        const Pose6D id = compose(p, inverse(p));
        CHECK(id.translation.norm() < 1e-12);
        CHECK(quat_angle(id.rotation, Quat::Identity()) < 1e-12);
        CHECK(std::abs(id.rotation.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("pose_error of a pure 30 degree z rotation") {
    const Pose6D target = Pose6D::from_axis_angle(Vec3::UnitZ(), kPi / 6.0);
    const Vec6 e = pose_error(target, Pose6D::identity());
    CHECK(e.head<3>().norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(e[3] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(e[4] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(e[5] == doctest::Approx(0.5235987755982988).epsilon(1e-12));
}

TEST_CASE("pose_error rotation part is antisymmetric") {
    for (int i = 0; i < 200; ++i) {
        const Pose6D a = random_pose(), b = random_pose();
        const Vec6 eab = pose_error(a, b);
        const Vec6 eba = pose_error(b, a);
        // log(q_a q_b^-1) and log(q_b q_a^-1) are inverse rotations: the angle
        // matches and applying one after conjugating cancels the other.
        CHECK(eab.tail<3>().norm() == doctest::Approx(eba.tail<3>().norm()).epsilon(1e-9));
        const Quat qa = quat_exp(eab.tail<3>());
        const Quat qb = quat_exp(eba.tail<3>());
        // q_ab = q_a q_b^-1, q_ba = its inverse
        CHECK(quat_angle(qa, qb.conjugate()) < 1e-9);
        CHECK((eab.head<3>() + eba.head<3>()).norm() < 1e-12);
    }
}

TEST_CASE("applying pose_error to current reproduces target") {
    for (int i = 0; i < 200; ++i) {
        const Pose6D target = random_pose(), current = random_pose();
        const Vec6 e = pose_error(target, current);
        Pose6D rebuilt;
        rebuilt.translation = current.translation + e.head<3>();
        rebuilt.rotation = (quat_exp(e.tail<3>()) * current.rotation).normalized();
        CHECK((rebuilt.translation - target.translation).norm() < 1e-9);
        CHECK(quat_angle(rebuilt.rotation, target.rotation) < 1e-9);
    }
}

TEST_CASE("quat_log near and at 180 degrees is deterministic") {
    const Quat q_pos(0.0, 0.0, 0.0, 1.0);   // +z half turn
    const Quat q_neg(0.0, 0.0, 0.0, -1.0);  // same rotation, opposite sign
    const Vec3 l1 = quat_log(q_pos);
    const Vec3 l2 = quat_log(q_neg);
    CHECK((l1 - l2).norm() == 0.0);
    CHECK(l1.norm() == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(l1.z() > 0.0);

    // an axis with mixed signs: canonical choice must still be stable
    const Vec3 axis = Vec3(1, -2, 0.5).normalized();
    const Quat qa(0.0, axis.x(), axis.y(), axis.z());
    const Quat qb(0.0, -axis.x(), -axis.y(), -axis.z());
    CHECK((quat_log(qa) - quat_log(qb)).norm() == 0.0);
}

TEST_CASE("quat_log and quat_exp round trip") {
    for (int i = 0; i < 500; ++i) {
        const Pose6D p = random_pose();
        const Vec3 aa = quat_log(p.rotation);
        CHECK(aa.norm() <= kPi + 1e-12);
        CHECK(quat_angle(quat_exp(aa), p.rotation) < 1e-9);
    }
    // small angles go through the series branch
    const Vec3 tiny(1e-14, -2e-14, 3e-15);
    CHECK((quat_log(quat_exp(tiny)) - tiny).norm() < 1e-15);
}

TEST_CASE("normalization invariant survives long products") {
    Pose6D acc = Pose6D::identity();
    for (int i = 0; i < 10000; ++i) acc = compose(acc, random_pose());
    CHECK(std::abs(acc.rotation.norm() - 1.0) < 1e-12);
    CHECK(is_valid(acc));
}

TEST_CASE("factories reject degenerate input") {
    CHECK_THROWS_AS(Pose6D::from_axis_angle(Vec3::Zero(), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Pose6D::from_parts(Vec3::Zero(), Quat(0, 0, 0, 0)), std::invalid_argument);
}
