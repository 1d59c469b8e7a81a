#include "doctest.h"

#include "quatlag/trajectory.hpp"

#include <cmath>

using namespace quatlag;

namespace {

// Closed-form attitude for a fixed rotation axis u and accumulated angle phi:
// body-frame rates compose on the right, qd(t) = qd0 (x) [cos(phi/2), sin(phi/2) u].
Vec4 fixed_axis_attitude(const UnitQuaternion& qd0, const Vec3& u, double phi) {
    Vec4 inc;
    inc << std::cos(0.5 * phi), std::sin(0.5 * phi) * u;
    return qmat(qd0.vec()) * inc;
}

} // namespace

TEST_CASE("constant-rate trajectory matches the fixed-axis closed form") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::constant_omega;
    spec.qd0 = normalize(Vec4(1.0, 0.3, -0.2, 0.5));
    spec.omega_d0 = Vec3(0.4, -0.3, 0.5);
    const DesiredTrajectory traj(spec);

    const double w = spec.omega_d0.norm();
    const Vec3 u = spec.omega_d0 / w;
    for (double t : {0.0, 0.5, 1.3704567, 5.0}) {
        const Vec4 expect = fixed_axis_attitude(spec.qd0, u, w * t);
        CHECK((traj.at(t).qd.vec() - expect).norm() < 1e-10);
    }
}

TEST_CASE("sinusoid trajectory matches the fixed-axis closed form") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::sinusoid;
    spec.qd0 = UnitQuaternion(Vec4(0.0, 0.0, 1.0, 0.0));
    const DesiredTrajectory traj(spec);

    // omega_d(t) = a sin(f t) [1,1,1]: fixed axis [1,1,1]/sqrt(3), signed angle
    // phi(t) = (a sqrt(3) / f) (1 - cos(f t)).
    const double a = spec.amplitude;
    const double f = spec.frequency;
    const Vec3 u = Vec3::Ones() / std::sqrt(3.0);
    for (double t : {0.7, 2.5, 3.3333333, 10.0}) {
        const double phi = (a * std::sqrt(3.0) / f) * (1.0 - std::cos(f * t));
        const Vec4 expect = fixed_axis_attitude(spec.qd0, u, phi);
        CHECK((traj.at(t).qd.vec() - expect).norm() < 1e-10);
    }
}

TEST_CASE("analytic derivatives agree with finite differences") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::sinusoid;
    spec.qd0 = UnitQuaternion(Vec4(0.0, 0.0, 1.0, 0.0));
    const DesiredTrajectory traj(spec);

    const double h = 1e-4;
    for (double t : {0.31, 1.7, 6.25}) {
        const DesiredPoint p = traj.at(t);
        const Vec4 fd_dot = (traj.at(t + h).qd.vec() - traj.at(t - h).qd.vec()) / (2.0 * h);
        CHECK((p.qd_dot - fd_dot).norm() < 1e-7);

        const Vec4 fd_ddot = (traj.at(t + h).qd_dot - traj.at(t - h).qd_dot) / (2.0 * h);
        CHECK((p.qd_ddot - fd_ddot).norm() < 1e-7);

        const Vec4 fd_dddot = (traj.at(t + h).qd_ddot - traj.at(t - h).qd_ddot) / (2.0 * h);
        CHECK((traj.third_derivative(t) - fd_dddot).norm() < 1e-6);
    }
}

TEST_CASE("trajectory samples stay unit and tangent") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::sinusoid;
    spec.amplitude = 0.3;
    const DesiredTrajectory traj(spec);
    for (double t : {0.0, 0.123, 4.56, 20.0}) {
        const DesiredPoint p = traj.at(t);
        CHECK(std::abs(p.qd.vec().norm() - 1.0) < 1e-12);
        CHECK(std::abs(p.qd.vec().dot(p.qd_dot)) < 1e-15);
        // differentiating the tangency constraint once more:
        CHECK(std::abs(p.qd.vec().dot(p.qd_ddot) + p.qd_dot.squaredNorm()) < 1e-14);
    }
}

TEST_CASE("query order does not change the cached grid results") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::sinusoid;
    const DesiredTrajectory eager(spec);
    (void)eager.at(5.0); // force the grid out to 5 s first
    const Vec4 a = eager.at(2.5).qd.vec();

    const DesiredTrajectory lazy(spec);
    const Vec4 b = lazy.at(2.5).qd.vec();
    CHECK((a - b).norm() == 0.0);

    CHECK((gen_desired(spec, 2.5).qd.vec() - b).norm() == 0.0);
}

TEST_CASE("trajectory rejects bad arguments") {
    TrajectorySpec spec;
    CHECK_THROWS_AS(DesiredTrajectory(spec, 0.0), std::invalid_argument);
    const DesiredTrajectory traj(spec);
    CHECK_THROWS_AS(traj.at(-0.1), std::invalid_argument);
}

TEST_CASE("summary bounds dominate sampled derivative magnitudes") {
    TrajectorySpec spec;
    spec.kind = TrajectorySpec::Kind::constant_omega;
    spec.omega_d0 = Vec3(0.2, 0.1, -0.4);
    const double w = spec.omega_d0.norm();
    const TrajectorySummary sc = summarize(spec);
    CHECK(sc.sup_qd_dot == doctest::Approx(0.5 * w).epsilon(1e-15));
    CHECK(sc.sup_qd_ddot == doctest::Approx(0.25 * w * w).epsilon(1e-15));

    TrajectorySpec sin_spec;
    sin_spec.kind = TrajectorySpec::Kind::sinusoid;
    const TrajectorySummary ss = summarize(sin_spec);
    const DesiredTrajectory traj(sin_spec);
    for (double t = 0.0; t <= 20.0; t += 0.25) {
        const DesiredPoint p = traj.at(t);
        CHECK(p.qd_dot.norm() <= ss.sup_qd_dot + 1e-12);
        CHECK(p.qd_ddot.norm() <= ss.sup_qd_ddot + 1e-12);
    }
}
