#include "quatlag/quatmath.hpp"

#include <cmath>
#include <string>

namespace quatlag {

namespace {

Vec4 checked_unit(const Vec4& x) {
    const double n = x.norm();
    const double err = std::abs(n - 1.0);
    if (err <= 1e-9) return x;
    if (err < 1e-3) return x / n; // small drift: renormalize silently
    throw std::invalid_argument("UnitQuaternion: norm " + std::to_string(n) +
                                " is too far from 1 to be a drifted unit quaternion");
}

} // namespace

UnitQuaternion::UnitQuaternion(const Vec4& x) : x_(checked_unit(x)) {}

UnitQuaternion::UnitQuaternion(double q0, const Vec3& qv) {
    Vec4 x;
    x << q0, qv;
    x_ = checked_unit(x);
}

Mat3 skew(const Vec3& u) {
    Mat3 s;
    s <<    0, -u[2],  u[1],
         u[2],     0, -u[0],
        -u[1],  u[0],     0;
    return s;
}

Mat43 jmat(const Vec4& x) {
    Mat43 j;
    j.row(0) = -x.tail<3>().transpose();
    j.bottomRows<3>() = x[0] * Mat3::Identity() + skew(x.tail<3>());
    return j;
}

Mat4 qmat(const Vec4& x) {
    Mat4 q;
    q.col(0) = x;
    q.rightCols<3>() = jmat(x);
    return q;
}

Vec4 quat_error(const UnitQuaternion& qd, const UnitQuaternion& q) {
    return qmat(qd.vec()).transpose() * q.vec();
}

UnitQuaternion normalize(const Vec4& x) {
    const double n = x.norm();
    if (n <= 1e-12) {
        throw DegenerateQuaternion("normalize: input norm " + std::to_string(n) +
                                   " is below the 1e-12 floor");
    }
    return UnitQuaternion(Vec4(x / n));
}

} // namespace quatlag
