#include "doctest.h"

#include "quatlag/quatmath.hpp"
#include "quatlag/rng.hpp"

#include <cmath>

using namespace quatlag;

namespace {

// Hamilton product written out componentwise, independent of qmat().
Vec4 hamilton(const Vec4& a, const Vec4& b) {
    const double a0 = a[0], b0 = b[0];
    const Vec3 av = a.tail<3>(), bv = b.tail<3>();
    Vec4 out;
    out[0] = a0 * b0 - av.dot(bv);
    out.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
    return out;
}

Vec4 random_unit4(Rng& rng) {
    for (;;) {
        const Vec4 g = rng.gaussian4();
        if (g.norm() > 1e-6) return g / g.norm();
    }
}

} // namespace

TEST_CASE("default unit quaternion is the identity rotation") {
    const UnitQuaternion q;
    CHECK(q.q0() == 1.0);
    CHECK(q.qv().norm() == 0.0);
}

TEST_CASE("construction accepts drift below 1e-3 and rejects beyond") {
    const Vec4 exact(0.5, 0.5, 0.5, 0.5);
    const UnitQuaternion ok(exact);
    CHECK(ok.vec() == exact);

    // 5e-4 of drift gets silently renormalized, preserving the direction.
    const Vec4 drifted = exact * (1.0 + 5e-4);
    const UnitQuaternion fixed(drifted);
    CHECK(std::abs(fixed.vec().norm() - 1.0) < 1e-14);
    CHECK((fixed.vec() - exact).norm() < 1e-12);

    CHECK_THROWS_AS(UnitQuaternion(Vec4(1.1, 0, 0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(UnitQuaternion(Vec4::Zero()), std::invalid_argument);
}

TEST_CASE("normalize rescales and rejects near-zero input") {
    const UnitQuaternion q = normalize(Vec4(2, 0, 0, 0));
    CHECK(q.q0() == 1.0);
    CHECK_THROWS_AS(normalize(Vec4::Constant(1e-13)), DegenerateQuaternion);
}

TEST_CASE("skew matrix reproduces the cross product") {
    const Vec3 u(0.3, -1.2, 2.0);
    const Vec3 v(-0.7, 0.4, 1.1);
    CHECK((skew(u) * v - u.cross(v)).norm() < 1e-15);
    CHECK((skew(u) + skew(u).transpose()).norm() == 0.0);
}

TEST_CASE("jmat has the documented block layout") {
    const Vec4 x(0.1, 0.2, -0.3, 0.4);
    const Mat43 j = jmat(x);
    CHECK(j(0, 0) == -0.2);
    CHECK(j(0, 1) == 0.3);
    CHECK(j(0, 2) == -0.4);
    // bottom block: q0*I + skew(qv)
    const Mat3 expect = 0.1 * Mat3::Identity() + skew(Vec3(0.2, -0.3, 0.4));
    CHECK((j.bottomRows<3>() - expect).norm() == 0.0);
}

TEST_CASE("qmat multiplication is the Hamilton product") {
    Rng rng(901);
    for (int i = 0; i < 50; ++i) {
        const Vec4 a = rng.gaussian4();
        const Vec4 b = rng.gaussian4();
        CHECK((qmat(a) * b - hamilton(a, b)).norm() < 1e-13);
    }
    // frozen spot check, worked out by hand
    const Vec4 q(0.5, 0.5, 0.5, 0.5);
    const Vec4 r(0.0, 1.0, 0.0, 0.0);
    const Vec4 expect(-0.5, 0.5, 0.5, -0.5);
    CHECK((qmat(q) * r - expect).norm() == 0.0);
}

TEST_CASE("qmat of a unit quaternion is special orthogonal") {
    Rng rng(902);
    for (int i = 0; i < 20; ++i) {
        const Mat4 Q = qmat(random_unit4(rng));
        CHECK((Q.transpose() * Q - Mat4::Identity()).norm() < 1e-13);
        CHECK(Q.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("quat_error against identity target returns the attitude itself") {
    Rng rng(903);
    const UnitQuaternion q(random_unit4(rng));
    const Vec4 eps = quat_error(UnitQuaternion(), q);
    CHECK((eps - q.vec()).norm() == 0.0);
}

TEST_CASE("quat_error is unit and recovers q through the Hamilton product") {
    Rng rng(904);
    for (int i = 0; i < 20; ++i) {
        const UnitQuaternion qd(random_unit4(rng));
        const UnitQuaternion q(random_unit4(rng));
        const Vec4 eps = quat_error(qd, q);
        CHECK(std::abs(eps.norm() - 1.0) < 1e-12);
        // qd (x) eps == q: the error is the rotation taking qd to q
        CHECK((hamilton(qd.vec(), eps) - q.vec()).norm() < 1e-13);
    }
}
