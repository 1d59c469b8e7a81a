#pragma once

#include <cstdint>
#include <utility>

#include "quatlag/quatmath.hpp"

namespace quatlag {

/// Rigid-body inertia plus the free scalar m0 that completes the 4-DOF mass
/// matrix M0 = diag(m0, M). M must be symmetric positive definite, m0 > 0.
struct InertiaModel {
    Mat3 M;
    double m0 = 1.0;

    InertiaModel() : M(Mat3::Identity()) {}
    InertiaModel(const Mat3& M_in, double m0_in);

    /// Stacked independent entries [m11, m22, m33, m23, m13, m12].
    Vec6 theta() const;
};

struct BodyState {
    UnitQuaternion q;
    Vec3 omega; // body rates, rad/s
};

/// omega = 2 J^T(q) qdot. Requires |q^T qdot| < 1e-6 (throws TangencyViolation).
Vec3 omega_from_qdot(const UnitQuaternion& q, const Vec4& qdot);

/// qdot = (1/2) J(q) omega. Tangent to the sphere by construction.
Vec4 qdot_from_omega(const UnitQuaternion& q, const Vec3& omega);

/// Generalized mass matrix D(q) = Q(q) M0 Q^T(q). Symmetric positive definite
/// with spectrum inside [min(m0, lmin(M)), max(m0, lmax(M))].
Mat4 d_matrix(const UnitQuaternion& q, const InertiaModel& inertia);

/// Coriolis matrix, closed form:
///   C = -J(q) S(M w) J^T(q) + J(q) M J^T(qdot) + m0 q qdot^T,  w = 2 J^T(q) qdot.
/// Linear in qdot. D-dot - 2C is skew-symmetric for tangent qdot.
Mat4 c_matrix(const UnitQuaternion& q, const Vec4& qdot, const InertiaModel& inertia);

/// Defining form of the Coriolis matrix,
///   C = -J(q) S(M w) J^T(q) - D(q) Q(qdot) Q^T(q),
/// kept as an independent cross-check of c_matrix for tangent qdot.
Mat4 c_matrix_definition(const UnitQuaternion& q, const Vec4& qdot, const InertiaModel& inertia);

/// Solve D(q) qddot = -C(q, qdot) qdot + tau_bar via D^-1 = Q(q) M0^-1 Q^T(q).
/// The result is independent of m0 for tangent qdot.
Vec4 lagrangian_accel(const UnitQuaternion& q, const Vec4& qdot, const Vec4& tau_bar,
                      const InertiaModel& inertia);

/// Euler-Newton right-hand side: qdot = (1/2) J(q) omega,
/// omegadot = M^-1 (S(M omega) omega + tau).
std::pair<Vec4, Vec3> euler_newton_deriv(const BodyState& state, const Vec3& tau,
                                         const InertiaModel& inertia);

/// tau_bar = (1/2) J(q) tau.
Vec4 torque_to_generalized(const UnitQuaternion& q, const Vec3& tau);

/// tau = 2 J^T(q) tau_bar. Round-trips with torque_to_generalized.
Vec3 generalized_to_torque(const UnitQuaternion& q, const Vec4& tau_bar);

/// 3x6 map with F(u) theta(M) = M u for symmetric M.
Mat36 f_map(const Vec3& u);

/// Regressor pair for the linear parametrization
///   Y0 m0 + Y theta = D(q) qddot + C(q, qdot) qdot.
/// Y0 = (q^T qddot + qdot^T qdot) q, Y = J(q) (F(wdot) + 2 S(w) F(w)),
/// w = J^T(q) qdot, wdot = J^T(q) qddot.
struct Regressors {
    Vec4 Y0;
    Mat46 Y;
};
Regressors regressors(const UnitQuaternion& q, const Vec4& qdot, const Vec4& qddot);

/// Extended regressor [Y, -(1/2) J(q)] so that Ybar * [theta; p] covers the
/// inertia terms and a constant-torque disturbance column.
Mat49 regressor_bar(const UnitQuaternion& q, const Vec4& qdot, const Vec4& qddot);

/// Mismatch between desired-trajectory and actual-state dynamics terms:
///   hbar = (D(qd) - D(q)) qddot_d + (C(qd, qdot_d) - C(q, qdot)) qdot_d
///          - (1/2)(Q(qd) - Q(q)) p_bar.
/// Vanishes when (qd, qdot_d) == (q, qdot).
Vec4 residual_dynamics(const UnitQuaternion& qd, const Vec4& qd_dot, const Vec4& qd_ddot,
                       const UnitQuaternion& q, const Vec4& qdot, const Vec4& p_bar,
                       const InertiaModel& inertia);

/// Worst-case magnitudes of the desired trajectory, used by the bound sampler
/// and the gain checkers.
struct TrajectorySummary {
    double sup_qd_dot = 0.0;  // sup |qdot_d|
    double sup_qd_ddot = 0.0; // sup |qddot_d|
};

/// Sampled and analytic constants bounding the closed-loop residual terms.
/// k_M, k_c1, k_c2 are 1.5x the maxima observed over `samples` seeded draws on
/// the unit sphere; m_bar/m_lower are exact; k_h1, k_h2, s1, s2 follow from the
/// trajectory summary and the disturbance bound rho.
struct BoundConstants {
    double m_bar = 0.0;
    double m_lower = 0.0;
    double k_M = 0.0;
    double k_c1 = 0.0;
    double k_c2 = 0.0;
    double k_h1 = 0.0;
    double k_h2 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double rho = 0.0;
    TrajectorySummary traj;
};

/// Deterministic, sequential Monte-Carlo estimation of the bound constants.
/// `samples` must be >= 1000 (throws ConfigError below that).
BoundConstants estimate_bounds(const InertiaModel& inertia, const TrajectorySummary& traj,
                               double rho, int samples, std::uint64_t seed);

namespace detail {
// Test instrumentation: flips the sign of the J M J^T(qdot) term inside
// c_matrix so fault-injection tests can watch the verification suite fail.
extern bool corrupt_c_sign;
} // namespace detail

} // namespace quatlag
