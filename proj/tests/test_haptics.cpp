#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "telelink/haptics.hpp"

using namespace telelink;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mt19937 rng(40522);

double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ChainModel planar_two_link() {
    ChainModel m;
    m.joints.resize(2);
    m.joints[0].axis = Vec3::UnitZ();
    m.joints[1].axis = Vec3::UnitZ();
    m.joints[1].origin = Pose6D::from_translation(Vec3(1, 0, 0));
    m.tool = Pose6D::from_translation(Vec3(1, 0, 0));
    m.q_min = VecX::Constant(2, -kPi);
    m.q_max = VecX::Constant(2, kPi);
    m.qd_max = VecX::Constant(2, 2.0);
    m.tau_max = VecX::Constant(2, 500.0);
    return m;
}

HandMapping svh_like_mapping() {
    HandMapping h;
    h.retarget = Eigen::MatrixXd::Zero(9, 20);
    for (int i = 0; i < 9; ++i) h.retarget(i, 2 * i) = 0.5;
    h.out_min = VecX::Constant(9, 0.0);
    h.out_max = VecX::Constant(9, 1.2);
    h.brake_threshold = VecX::Constant(5, 0.6);
    h.validate();
    return h;
}

}  // namespace

TEST_CASE("lowpass alpha for 15 Hz at 500 Hz") {
    const LowPassFilter f(15.0, 500.0, 1);
    CHECK(f.alpha() == doctest::Approx(0.1586001376).epsilon(1e-8));
}

TEST_CASE("lowpass step response crosses 63.2% between samples 5 and 6") {
    LowPassFilter f(15.0, 500.0, 1);
    const double a = f.alpha();
    std::vector<double> y;
    for (int k = 0; k < 8; ++k) y.push_back(f.step(VecX::Constant(1, 1.0))[0]);

    // closed form of the recurrence as an independent check
    for (int k = 0; k < 8; ++k)
        CHECK(y[k] == doctest::Approx(1.0 - std::pow(1.0 - a, k + 1)).epsilon(1e-12));
    CHECK(y[4] < 0.632);
    CHECK(y[5] > 0.632);
    CHECK(y[4] == doctest::Approx(0.578300).epsilon(1e-4));
    CHECK(y[5] == doctest::Approx(0.645176).epsilon(1e-4));
}

TEST_CASE("lowpass holds a constant and follows from any reset state") {
    LowPassFilter f(15.0, 500.0, 3);
    const VecX c = VecX::Constant(3, -2.5);
    f.reset(c);
    for (int k = 0; k < 100; ++k) CHECK((f.step(c) - c).norm() == 0.0);
}

TEST_CASE("lowpass attenuates its cutoff frequency by about 3 dB") {
    LowPassFilter f(15.0, 500.0, 1);
    const double dt = 1.0 / 500.0;
    // settle through 0.5 s, then fit amplitude over an integer cycle count
    double ss = 0.0, sc = 0.0;
    int n = 0;
    for (int k = 0; k < 2000; ++k) {
        const double t = k * dt;
        const double y = f.step(VecX::Constant(1, std::sin(2.0 * kPi * 15.0 * t)))[0];
        if (k >= 250 && k < 250 + 1500) {  // 45 full cycles
            ss += y * std::sin(2.0 * kPi * 15.0 * t);
            sc += y * std::cos(2.0 * kPi * 15.0 * t);
            ++n;
        }
    }
    const double amp = 2.0 * std::hypot(ss, sc) / n;
    const double db = 20.0 * std::log10(amp);
    CHECK(db == doctest::Approx(-3.39).epsilon(0.01));
    CHECK(std::abs(db - (-3.0)) < 0.5);
}

TEST_CASE("lowpass rejects out-of-range cutoffs") {
    CHECK_THROWS_AS(LowPassFilter(250.0, 500.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(LowPassFilter(0.0, 500.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(LowPassFilter(15.0, 500.0, 0), std::invalid_argument);
}

TEST_CASE("impedance wrench is a spring-damper in the pose error") {
    ImpedanceGains g;
    const Pose6D target = Pose6D::from_translation(Vec3(0.1, 0, 0));
    const Wrench f = impedance_wrench(target, Twist{}, Pose6D::identity(), Twist{}, g);
    CHECK(f.force.isApprox(Vec3(40.0, 0, 0), 1e-12));
    CHECK(f.torque.norm() < 1e-12);

    Twist moving;
    moving.linear = Vec3(0, 0.5, 0);
    const Wrench fd = impedance_wrench(Pose6D::identity(), Twist{}, Pose6D::identity(), moving, g);
    CHECK(fd.force.isApprox(Vec3(0, -20.0, 0), 1e-12));
}

TEST_CASE("impedance_step maps the wrench through the transpose Jacobian") {
    const ChainModel m = planar_two_link();
    const JointState state{VecX::Zero(2), VecX::Zero(2)};
    ImpedanceGains g;
    g.kd_lin = g.kd_ang = 0.0;

    // target 0.1 m along +y from the stretched pose: F = (0, 40, 0)
    const Pose6D target = Pose6D::from_translation(Vec3(2.0, 0.1, 0));
    const VecX tau = impedance_step(m, state, target, Twist{}, g);
    // J^T F: joint 1 sees 2 m lever arm, joint 2 sees 1 m
    CHECK(tau[0] == doctest::Approx(80.0).epsilon(1e-9));
    CHECK(tau[1] == doctest::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("impedance_step clamps to the torque limits") {
    ChainModel m = planar_two_link();
    m.tau_max = VecX::Constant(2, 10.0);
    const JointState state{VecX::Zero(2), VecX::Zero(2)};
    const Pose6D target = Pose6D::from_translation(Vec3(2.0, 1.0, 0));
    const VecX tau = impedance_step(m, state, target, Twist{}, ImpedanceGains{});
    CHECK(tau.cwiseAbs().maxCoeff() <= 10.0);
    CHECK(tau[0] == 10.0);
}

TEST_CASE("impedance torques are invariant under a rotated base frame") {
    for (int trial = 0; trial < 25; ++trial) {
        const ChainModel m = planar_two_link();
        const Quat r0 =
            Quat(Eigen::AngleAxisd(uniform(-kPi, kPi),
                                   Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)).normalized()))
                .normalized();
        const Pose6D base = Pose6D::from_parts(Vec3(uniform(-1, 1), 0, 0), r0);

        ChainModel rotated = m;
        rotated.joints[0].origin = compose(base, m.joints[0].origin);

        JointState state{VecX::Zero(2), VecX::Zero(2)};
        state.q << uniform(-1, 1), uniform(-1, 1);
        state.qd << uniform(-1, 1), uniform(-1, 1);
        const Pose6D target =
            Pose6D::from_translation(Vec3(uniform(1, 2), uniform(-0.5, 0.5), 0));

        const VecX tau = impedance_step(m, state, target, Twist{}, ImpedanceGains{});
        const VecX tau_rot =
            impedance_step(rotated, state, compose(base, target), Twist{}, ImpedanceGains{});
        CHECK((tau - tau_rot).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("critically damped step response does not overshoot") {
    // 1 kg point mass under the linear part of the impedance law, 1 kHz
    const ImpedanceGains g;  // kp 400, kd 40: zeta = 1 for 1 kg
    const double dt = 1e-3, target = 0.1;
    double x = 0.0, v = 0.0;
    double peak = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const double f = g.kp_lin * (target - x) - g.kd_lin * v;
        v += f * dt;
        x += v * dt;
        peak = std::max(peak, x);
    }
    CHECK(peak <= target + 1e-6);
    CHECK(x == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("impedance energy is non-increasing toward a fixed target") {
    const ImpedanceGains g;
    const double dt = 1e-3, m = 1.0;
    Vec3 x(0.1, -0.05, 0.02), v = Vec3::Zero();
    auto energy = [&] { return 0.5 * m * v.squaredNorm() + 0.5 * g.kp_lin * x.squaredNorm(); };
    double prev = energy();
    for (int k = 0; k < 10000; ++k) {
        const Vec3 f = -g.kp_lin * x - g.kd_lin * v;
        v += f * (dt / m);
        x += v * dt;
        const double e = energy();
        CHECK(e <= prev + 1e-6);
        prev = e;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("weightless assist has a deadband and is linear beyond it") {
    Wrench w;
    w.force = Vec3(1.5, 0, 0);
    CHECK(weightless_assist(w, 0.02, 0.05, 2.0).linear.norm() == 0.0);

    w.force = Vec3(3.0, 0, 0);
    const Twist t = weightless_assist(w, 0.02, 0.05, 2.0);
    CHECK(t.linear.isApprox(Vec3(0.02, 0, 0), 1e-12));

    // continuity at the deadband edge
    w.force = Vec3(2.0 + 1e-9, 0, 0);
    CHECK(weightless_assist(w, 0.02, 0.05, 2.0).linear.norm() < 1e-9);

    w.force = Vec3::Zero();
    w.torque = Vec3(0, 4.0, 0);
    CHECK(weightless_assist(w, 0.02, 0.05, 2.0).angular.isApprox(Vec3(0, 0.1, 0), 1e-12));
}

TEST_CASE("limit repulsion pushes away from the near limit only") {
    ChainModel m = planar_two_link();
    m.q_min = VecX::Constant(2, -1.0);
    m.q_max = VecX::Constant(2, 1.0);

    VecX q(2);
    q << 0.95, 0.0;
    const VecX tau = limit_repulsion(m, q, 0.1, 50.0);
    CHECK(tau[0] == doctest::Approx(-2.5));  // pushes down, away from +1
    CHECK(tau[1] == 0.0);

    q << -0.95, 0.0;
    CHECK(limit_repulsion(m, q, 0.1, 50.0)[0] == doctest::Approx(2.5));
}

TEST_CASE("fade target blends smoothly from hold pose to live target") {
    const Pose6D start = Pose6D::from_translation(Vec3(1, 0, 0));
    const Pose6D target = compose(Pose6D::from_translation(Vec3(2, 0, 0)),
                                  Pose6D::from_axis_angle(Vec3::UnitZ(), 1.0));

    FadeState fade{start, 0.0, 1.0};
    CHECK((fade_target(fade, target, 0.0).translation - start.translation).norm() == 0.0);

    FadeState half{start, 0.0, 1.0};
    const Pose6D mid = fade_target(half, target, 0.5);  // smoothstep(0.5) = 0.5
    CHECK(mid.translation.x() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(quat_angle(mid.rotation, Quat::Identity()) == doctest::Approx(0.5).epsilon(1e-9));

    const Pose6D done = fade_target(half, target, 0.5);
    CHECK((done.translation - target.translation).norm() == 0.0);
    CHECK((done.rotation.coeffs() - target.rotation.coeffs()).norm() == 0.0);

    // stays at the target after completion
    const Pose6D after = fade_target(half, target, 0.1);
    CHECK((after.translation - target.translation).norm() == 0.0);
}

TEST_CASE("fade steps are monotone and eased at both ends") {
    const Pose6D start{};
    const Pose6D target = Pose6D::from_translation(Vec3(1, 0, 0));
    FadeState fade{start, 0.0, 1.0};
    double prev_x = 0.0, first_step = 0.0, mid_step = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double x = fade_target(fade, target, 0.01).translation.x();
        CHECK(x >= prev_x);
        if (k == 0) first_step = x - prev_x;
        if (k == 50) mid_step = x - prev_x;
        prev_x = x;
    }
    CHECK(prev_x == 1.0);
    CHECK(first_step < mid_step);  // eased start
}

TEST_CASE("finger retargeting applies the matrix and clamps the output") {
    const HandMapping h = svh_like_mapping();
    VecX glove = VecX::Zero(20);
    glove[0] = 1.0;   // drives actuated joint 0 to 0.5
    glove[2] = 4.0;   // would drive joint 1 to 2.0, clamps at 1.2
    glove[4] = -1.0;  // would drive joint 2 negative, clamps at 0
    const VecX out = retarget_fingers(h, glove);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == 1.2);
    CHECK(out[2] == 0.0);
    CHECK(out.size() == 9);
    CHECK_THROWS_AS(retarget_fingers(h, VecX::Zero(19)), std::invalid_argument);
}

TEST_CASE("finger brakes latch with release hysteresis") {
    const HandMapping h = svh_like_mapping();  // thresholds 0.6 A
    FingerBrakes brakes;

    VecX idle = VecX::Constant(5, 0.1);
    CHECK(finger_feedback(h, brakes, idle) == std::vector<bool>(5, false));

    VecX grip = idle;
    grip[2] = 0.7;
    CHECK(finger_feedback(h, brakes, grip)[2]);

    // oscillating around the threshold after engagement: stays engaged
    for (int k = 0; k < 20; ++k) {
        grip[2] = (k % 2 == 0) ? 0.57 : 0.63;  // 0.95x .. 1.05x threshold
        CHECK(finger_feedback(h, brakes, grip)[2]);
    }

    grip[2] = 0.5;  // below 0.9 * 0.6
    CHECK_FALSE(finger_feedback(h, brakes, grip)[2]);
    CHECK_THROWS_AS(finger_feedback(h, brakes, VecX::Constant(5, -0.1)), std::invalid_argument);
}
