#pragma once

#include "quatlag/errors.hpp"
#include "quatlag/types.hpp"

namespace quatlag {

/// Unit quaternion, scalar-first storage [q0, qv]. Construction enforces the
/// unit norm: within 1e-9 of 1 the value is taken as-is, between 1e-9 and 1e-3
/// it is renormalized silently, beyond 1e-3 construction is rejected.
class UnitQuaternion {
public:
    UnitQuaternion() : x_(1.0, 0.0, 0.0, 0.0) {}
    explicit UnitQuaternion(const Vec4& x);
    UnitQuaternion(double q0, const Vec3& qv);

    const Vec4& vec() const { return x_; }
    double q0() const { return x_[0]; }
    Vec3 qv() const { return x_.tail<3>(); }
    double operator[](int i) const { return x_[i]; }

private:
    Vec4 x_;
};

/// 3x3 cross-product matrix: skew(u) * v == u x v.
Mat3 skew(const Vec3& u);

/// 4x3 kinematics matrix J(x) = [-qv^T; q0*I + skew(qv)] for x = [q0, qv].
/// Linear in x; defined for any 4-vector.
Mat43 jmat(const Vec4& x);

/// 4x4 matrix Q(x) = [x, J(x)]; orthogonal with det +1 when |x| = 1.
Mat4 qmat(const Vec4& x);

/// Attitude error quaternion: eps = Q^T(qd) * q. Unit whenever qd, q are unit.
Vec4 quat_error(const UnitQuaternion& qd, const UnitQuaternion& q);

/// Scale x to unit norm. Throws DegenerateQuaternion when |x| <= 1e-12.
UnitQuaternion normalize(const Vec4& x);

} // namespace quatlag
