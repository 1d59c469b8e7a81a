#include "quatlag/rigid_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quatlag/errors.hpp"
#include "quatlag/rng.hpp"

namespace quatlag {

namespace detail {
bool corrupt_c_sign = false;
} // namespace detail

namespace {

void require_tangent(const UnitQuaternion& q, const Vec4& qdot, const char* where) {
    const double r = std::abs(q.vec().dot(qdot));
    if (r >= 1e-6) {
        throw TangencyViolation(std::string(where) + ": |q^T qdot| = " + std::to_string(r) +
                                " exceeds the 1e-6 tangency tolerance");
    }
}

Vec4 random_unit_quat(Rng& rng) {
    // Gaussian direction; rejection keeps the normalization well conditioned.
    for (;;) {
        const Vec4 g = rng.gaussian4();
        const double n = g.norm();
        if (n > 1e-6) return g / n;
    }
}

} // namespace

InertiaModel::InertiaModel(const Mat3& M_in, double m0_in) : M(M_in), m0(m0_in) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ConfigError("InertiaModel: M must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(M);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError("InertiaModel: M must be positive definite");
    }
    if (!(m0 > 0.0)) {
        throw ConfigError("InertiaModel: m0 must be positive");
    }
}

Vec6 InertiaModel::theta() const {
    Vec6 th;
    th << M(0, 0), M(1, 1), M(2, 2), M(1, 2), M(0, 2), M(0, 1);
    return th;
}

Vec3 omega_from_qdot(const UnitQuaternion& q, const Vec4& qdot) {
    require_tangent(q, qdot, "omega_from_qdot");
    return 2.0 * jmat(q.vec()).transpose() * qdot;
}

Vec4 qdot_from_omega(const UnitQuaternion& q, const Vec3& omega) {
    return 0.5 * jmat(q.vec()) * omega;
}

Mat4 d_matrix(const UnitQuaternion& q, const InertiaModel& inertia) {
    const Mat43 J = jmat(q.vec());
    return inertia.m0 * q.vec() * q.vec().transpose() + J * inertia.M * J.transpose();
}

Mat4 c_matrix(const UnitQuaternion& q, const Vec4& qdot, const InertiaModel& inertia) {
    const Mat43 J = jmat(q.vec());
    const Mat43 Jdot = jmat(qdot);
    const Vec3 omega = 2.0 * J.transpose() * qdot;
    const double mid = detail::corrupt_c_sign ? -1.0 : 1.0;
    return -J * skew(inertia.M * omega) * J.transpose() +
           mid * J * inertia.M * Jdot.transpose() +
           inertia.m0 * q.vec() * qdot.transpose();
}

Mat4 c_matrix_definition(const UnitQuaternion& q, const Vec4& qdot, const InertiaModel& inertia) {
    const Mat43 J = jmat(q.vec());
    const Vec3 omega = 2.0 * J.transpose() * qdot;
    return -J * skew(inertia.M * omega) * J.transpose() -
           d_matrix(q, inertia) * qmat(qdot) * qmat(q.vec()).transpose();
}

Vec4 lagrangian_accel(const UnitQuaternion& q, const Vec4& qdot, const Vec4& tau_bar,
                      const InertiaModel& inertia) {
    require_tangent(q, qdot, "lagrangian_accel");
    const Vec4 rhs = tau_bar - c_matrix(q, qdot, inertia) * qdot;
    // D^-1 = Q(q) diag(1/m0, M^-1) Q^T(q); cheaper and better conditioned than
    // a dense 4x4 solve.
    const Mat4 Q = qmat(q.vec());
    Vec4 y = Q.transpose() * rhs;
    Vec4 z;
    z[0] = y[0] / inertia.m0;
    z.tail<3>() = inertia.M.ldlt().solve(Vec3(y.tail<3>()));
    return Q * z;
}

std::pair<Vec4, Vec3> euler_newton_deriv(const BodyState& state, const Vec3& tau,
                                         const InertiaModel& inertia) {
    const Vec4 qdot = qdot_from_omega(state.q, state.omega);
    const Vec3 omegadot =
        inertia.M.ldlt().solve(Vec3(skew(inertia.M * state.omega) * state.omega + tau));
    return {qdot, omegadot};
}

Vec4 torque_to_generalized(const UnitQuaternion& q, const Vec3& tau) {
    return 0.5 * jmat(q.vec()) * tau;
}

Vec3 generalized_to_torque(const UnitQuaternion& q, const Vec4& tau_bar) {
    return 2.0 * jmat(q.vec()).transpose() * tau_bar;
}

Mat36 f_map(const Vec3& u) {
    Mat36 F = Mat36::Zero();
    F(0, 0) = u[0];
    F(1, 1) = u[1];
    F(2, 2) = u[2];
    F(1, 3) = u[2];
    F(2, 3) = u[1];
    F(0, 4) = u[2];
    F(2, 4) = u[0];
    F(0, 5) = u[1];
    F(1, 5) = u[0];
    return F;
}

Regressors regressors(const UnitQuaternion& q, const Vec4& qdot, const Vec4& qddot) {
    const Mat43 J = jmat(q.vec());
    const Vec3 w = J.transpose() * qdot;
    const Vec3 wdot = J.transpose() * qddot;
    Regressors r;
    r.Y0 = (q.vec().dot(qddot) + qdot.squaredNorm()) * q.vec();
    r.Y = J * (f_map(wdot) + 2.0 * skew(w) * f_map(w));
    return r;
}

Mat49 regressor_bar(const UnitQuaternion& q, const Vec4& qdot, const Vec4& qddot) {
    Mat49 ybar;
    ybar.leftCols<6>() = regressors(q, qdot, qddot).Y;
    ybar.rightCols<3>() = -0.5 * jmat(q.vec());
    return ybar;
}

Vec4 residual_dynamics(const UnitQuaternion& qd, const Vec4& qd_dot, const Vec4& qd_ddot,
                       const UnitQuaternion& q, const Vec4& qdot, const Vec4& p_bar,
                       const InertiaModel& inertia) {
    return (d_matrix(qd, inertia) - d_matrix(q, inertia)) * qd_ddot +
           (c_matrix(qd, qd_dot, inertia) - c_matrix(q, qdot, inertia)) * qd_dot -
           0.5 * (qmat(qd.vec()) - qmat(q.vec())) * p_bar;
}

BoundConstants estimate_bounds(const InertiaModel& inertia, const TrajectorySummary& traj,
                               double rho, int samples, std::uint64_t seed) {
    if (samples < 1000) {
        throw ConfigError("estimate_bounds: samples must be >= 1000, got " +
                          std::to_string(samples));
    }
    if (rho < 0.0) {
        throw ConfigError("estimate_bounds: rho must be nonnegative");
    }

    BoundConstants b;
    b.rho = rho;
    b.traj = traj;

    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia.M);
    b.m_bar = std::max(inertia.m0, es.eigenvalues().maxCoeff());
    b.m_lower = std::min(inertia.m0, es.eigenvalues().minCoeff());

    // Sampled Lipschitz/bilinearity ratios on the unit sphere, scaled by a
    // 1.5x safety factor. Sequential and deterministic for a given seed.
    Rng rng(seed);
    double max_km = 0.0, max_kc1 = 0.0, max_kc2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Vec4 x = random_unit_quat(rng);
        const Vec4 y = random_unit_quat(rng);
        const Vec4 v = rng.gaussian4();
        const UnitQuaternion qx(x), qy(y);

        const double dxy = (x - y).norm();
        if (dxy > 1e-8 && v.norm() > 1e-12) {
            const double r =
                ((d_matrix(qx, inertia) - d_matrix(qy, inertia)) * v).norm() / (dxy * v.norm());
            max_km = std::max(max_km, r);
        }

        // Velocity argument tangent at x, as in the closed loop.
        Vec4 z = rng.gaussian4();
        z -= x * x.dot(z);
        if (z.norm() > 1e-8 && v.norm() > 1e-12) {
            const double r1 = (c_matrix(qx, z, inertia) * v).norm() / (z.norm() * v.norm());
            max_kc1 = std::max(max_kc1, r1);
            if (dxy > 1e-8) {
                const double r2 =
                    ((c_matrix(qx, z, inertia) - c_matrix(qy, z, inertia)) * v).norm() /
                    (dxy * z.norm() * v.norm());
                max_kc2 = std::max(max_kc2, r2);
            }
        }
    }
    b.k_M = 1.5 * max_km;
    b.k_c1 = 1.5 * max_kc1;
    b.k_c2 = 1.5 * max_kc2;

    b.k_h1 = b.k_c1 * traj.sup_qd_dot;
    b.s1 = 8.0 * rho + b.k_M * traj.sup_qd_ddot + b.k_c2 * traj.sup_qd_dot * traj.sup_qd_dot;
    b.s2 = 2.0 * (0.5 * rho + b.m_bar * traj.sup_qd_ddot +
                  b.k_c2 * traj.sup_qd_dot * traj.sup_qd_dot);
    if (b.s1 <= 0.0) {
        b.k_h2 = b.s2; // tanh argument diverges; limit is s2 (0 when both vanish)
    } else if (b.s2 <= 0.0) {
        b.k_h2 = b.s1; // s/tanh(s/s1) -> s1 as s -> 0
    } else {
        b.k_h2 = b.s2 / std::tanh(b.s2 / b.s1);
    }
    return b;
}

} // namespace quatlag
