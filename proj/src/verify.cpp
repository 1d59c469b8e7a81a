#include "quatlag/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "quatlag/errors.hpp"
#include "quatlag/rng.hpp"

namespace quatlag {

namespace {

Vec4 random_unit(Rng& rng) {
    for (;;) {
        const Vec4 v = rng.gaussian4();
        const double n = v.norm();
        if (n > 1e-6) return v / n;
    }
}

// Independent oracle for the quaternion product, scalar-first convention.
Vec4 hamilton(const Vec4& a, const Vec4& b) {
    const double a0 = a[0], b0 = b[0];
    const Vec3 av = a.tail<3>(), bv = b.tail<3>();
    Vec4 out;
    out[0] = a0 * b0 - av.dot(bv);
    out.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
    return out;
}

Vec6 theta_of_symmetric(const Mat3& S) {
    Vec6 th;
    th << S(0, 0), S(1, 1), S(2, 2), S(1, 2), S(0, 2), S(0, 1);
    return th;
}

Mat3 random_symmetric(Rng& rng) {
    const Vec3 a = rng.gaussian3();
    const Vec3 b = rng.gaussian3();
    Mat3 S;
    S << a[0], b[2], b[1], b[2], a[1], b[0], b[1], b[0], a[2];
    return S;
}

} // namespace

InertiaModel benchmark_inertia() {
    const double s = 1.0 / std::sqrt(14.0);
    return InertiaModel(Vec3(10.0 * s, 20.0 * s, 30.0 * s).asDiagonal(), 1.0);
}

VerifyReport run_verification(int samples, std::uint64_t seed) {
    return run_verification(samples, seed, benchmark_inertia());
}

VerifyReport run_verification(int samples, std::uint64_t seed, const InertiaModel& inertia) {
    if (samples < 100) {
        throw ConfigError("run_verification: samples must be >= 100, got " +
                          std::to_string(samples));
    }
    const auto t_start = std::chrono::steady_clock::now();
    VerifyReport rep;

    std::uint64_t row_index = 0;
    const auto add = [&](const char* name, double threshold, auto&& body) {
        Rng rng(Rng::derive(seed, row_index++));
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            worst = std::max(worst, body(rng));
        }
        rep.rows.push_back(VerifyRow{name, samples, worst, threshold, worst <= threshold});
    };

    const Eigen::SelfAdjointEigenSolver<Mat3> mes(inertia.M);
    const double lmax = mes.eigenvalues().maxCoeff();
    const double m_bar = std::max(inertia.m0, lmax);
    const double m_lower = std::min(inertia.m0, mes.eigenvalues().minCoeff());
    Mat4 m0_diag = Mat4::Zero();
    m0_diag(0, 0) = inertia.m0;
    m0_diag.bottomRightCorner<3, 3>() = inertia.M;

    // --- kinematic operator identities -------------------------------------

    add("jmat_linearity", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4(), y = rng.gaussian4();
        const double a = rng.gaussian(), b = rng.gaussian();
        return ((jmat(a * x + b * y) - a * jmat(x) - b * jmat(y)).cwiseAbs()).maxCoeff();
    });

    add("jmat_antisymmetric_pairing", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4(), y = rng.gaussian4();
        return (jmat(x).transpose() * y + jmat(y).transpose() * x).cwiseAbs().maxCoeff();
    });

    add("jmat_self_annihilation", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4();
        return (jmat(x).transpose() * x).cwiseAbs().maxCoeff();
    });

    add("jmat_orthogonality", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4();
        const Mat3 r = jmat(x).transpose() * jmat(x) - x.squaredNorm() * Mat3::Identity();
        return r.cwiseAbs().maxCoeff();
    });

    add("jmat_isometry", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4();
        const Vec3 v = rng.gaussian3();
        return std::abs((jmat(x) * v).norm() - x.norm() * v.norm());
    });

    add("qmat_orthogonal", 1e-12, [&](Rng& rng) {
        const Vec4 x = random_unit(rng);
        return (qmat(x).transpose() * qmat(x) - Mat4::Identity()).cwiseAbs().maxCoeff();
    });

    add("qmat_determinant", 1e-12, [&](Rng& rng) {
        const Vec4 x = random_unit(rng);
        return std::abs(qmat(x).determinant() - 1.0);
    });

    add("qmat_product_split", 1e-12, [&](Rng& rng) {
        const Vec4 x = rng.gaussian4(), y = rng.gaussian4();
        const Mat4 r = qmat(y) * qmat(x).transpose() -
                       (jmat(y) * jmat(x).transpose() + y * x.transpose());
        return r.cwiseAbs().maxCoeff();
    });

    add("qmat_symmetric_part", 1e-12, [&](Rng& rng) {
        // Symmetric part of Q(y) Q^T(x) is (x.y) I, so the product is skew
        // exactly when x and y are orthogonal.
        const Vec4 x = rng.gaussian4(), y = rng.gaussian4();
        const Mat4 r = qmat(y) * qmat(x).transpose() + qmat(x) * qmat(y).transpose() -
                       2.0 * x.dot(y) * Mat4::Identity();
        return r.cwiseAbs().maxCoeff();
    });

    add("qmat_hamilton_product", 1e-12, [&](Rng& rng) {
        const Vec4 q = random_unit(rng);
        const Vec4 r = rng.gaussian4();
        return (qmat(q) * r - hamilton(q, r)).cwiseAbs().maxCoeff();
    });

    add("quat_error_unit", 1e-12, [&](Rng& rng) {
        const UnitQuaternion qd(random_unit(rng)), q(random_unit(rng));
        return std::abs(quat_error(qd, q).norm() - 1.0);
    });

    // --- generalized mass matrix and Coriolis terms -------------------------

    add("dmat_spectrum", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Eigen::SelfAdjointEigenSolver<Mat4> es(d_matrix(q, inertia));
        return std::max(0.0, std::max(m_lower - es.eigenvalues().minCoeff(),
                                      es.eigenvalues().maxCoeff() - m_bar));
    });

    add("dmat_inverse_closed_form", 1e-11, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        Mat4 inv_core = Mat4::Zero();
        inv_core(0, 0) = 1.0 / inertia.m0;
        inv_core.bottomRightCorner<3, 3>() = inertia.M.inverse();
        const Mat4 dinv = qmat(q.vec()) * inv_core * qmat(q.vec()).transpose();
        return (d_matrix(q, inertia) * dinv - Mat4::Identity()).cwiseAbs().maxCoeff();
    });

    add("energy_rate_skew", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        const Mat4 ddot = qmat(qdot) * m0_diag * qmat(q.vec()).transpose() +
                          qmat(q.vec()) * m0_diag * qmat(qdot).transpose();
        const Mat4 a = ddot - 2.0 * c_matrix(q, qdot, inertia);
        const Vec4 x = rng.gaussian4();
        return std::abs(x.dot(a * x));
    });

    add("ddot_splits_into_c_plus_ct", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        const Mat4 ddot = qmat(qdot) * m0_diag * qmat(q.vec()).transpose() +
                          qmat(q.vec()) * m0_diag * qmat(qdot).transpose();
        const Mat4 c = c_matrix(q, qdot, inertia);
        return (ddot - c - c.transpose()).cwiseAbs().maxCoeff();
    });

    add("coriolis_forms_agree", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        return (c_matrix(q, qdot, inertia) - c_matrix_definition(q, qdot, inertia))
            .cwiseAbs()
            .maxCoeff();
    });

    add("linear_parametrization", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = rng.gaussian4();
        const Vec4 qddot = rng.gaussian4();
        const Regressors r = regressors(q, qdot, qddot);
        const Vec4 lhs = r.Y0 * inertia.m0 + r.Y * inertia.theta();
        const Vec4 rhs =
            d_matrix(q, inertia) * qddot + c_matrix(q, qdot, inertia) * qdot;
        return (lhs - rhs).cwiseAbs().maxCoeff();
    });

    add("accel_tangent_m0_invariant", 1e-9, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        const Vec4 tau_bar = rng.gaussian4();
        const InertiaModel a(inertia.M, 0.1), b(inertia.M, 1.0), c(inertia.M, 10.0);
        const Vec4 qa = lagrangian_accel(q, qdot, tau_bar, a);
        const Vec4 qb = lagrangian_accel(q, qdot, tau_bar, b);
        const Vec4 qc = lagrangian_accel(q, qdot, tau_bar, c);
        const Mat43 J = jmat(q.vec());
        return std::max((J.transpose() * (qa - qb)).norm(),
                        (J.transpose() * (qb - qc)).norm());
    });

    add("lagrangian_matches_newton", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec3 omega = rng.gaussian3();
        const Vec3 tau = rng.gaussian3();
        const Vec4 qdot = qdot_from_omega(q, omega);
        const Vec4 qddot =
            lagrangian_accel(q, qdot, torque_to_generalized(q, tau), inertia);
        const Vec3 wdot_lag =
            2.0 * (jmat(qdot).transpose() * qdot + jmat(q.vec()).transpose() * qddot);
        const Vec3 wdot_en = euler_newton_deriv(BodyState{q, omega}, tau, inertia).second;
        return (wdot_lag - wdot_en).norm();
    });

    add("torque_round_trip", 1e-12, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec3 tau = rng.gaussian3();
        return (generalized_to_torque(q, torque_to_generalized(q, tau)) - tau).norm();
    });

    add("omega_round_trip", 1e-12, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec3 omega = rng.gaussian3();
        return (omega_from_qdot(q, qdot_from_omega(q, omega)) - omega).norm();
    });

    add("f_map_symmetric_action", 1e-12, [&](Rng& rng) {
        const Mat3 S = random_symmetric(rng);
        const Vec3 u = rng.gaussian3();
        return (f_map(u) * theta_of_symmetric(S) - S * u).norm();
    });

    add("regressor_bar_consistency", 1e-10, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = rng.gaussian4();
        const Vec4 qddot = rng.gaussian4();
        const Vec3 p = rng.gaussian3();
        Vec9 big;
        big.head<6>() = inertia.theta();
        big.tail<3>() = p;
        const Vec4 lhs = regressors(q, qdot, qddot).Y0 * inertia.m0 +
                         regressor_bar(q, qdot, qddot) * big;
        const Vec4 rhs = d_matrix(q, inertia) * qddot +
                         c_matrix(q, qdot, inertia) * qdot - 0.5 * jmat(q.vec()) * p;
        return (lhs - rhs).cwiseAbs().maxCoeff();
    });

    // --- residual dynamics between desired and actual state -----------------

    add("residual_vanishes_on_track", 1e-12, [&](Rng& rng) {
        const UnitQuaternion q(random_unit(rng));
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        const Vec4 qddot = rng.gaussian4();
        Vec4 p_bar;
        p_bar << 0.0, rng.gaussian3();
        return residual_dynamics(q, qdot, qddot, q, qdot, p_bar, inertia).norm();
    });

    add("residual_bound_analytic", 0.0, [&](Rng& rng) {
        // Fully analytic upper bound built from operator norms; any positive
        // excess is a bug in residual_dynamics or the Coriolis terms.
        const UnitQuaternion qd(random_unit(rng)), q(random_unit(rng));
        const Vec4 qd_dot = qdot_from_omega(qd, rng.gaussian3());
        const Vec4 qdot = qdot_from_omega(q, rng.gaussian3());
        const Vec4 qd_ddot = rng.gaussian4();
        Vec3 p = rng.gaussian3();
        if (p.norm() > 1e-12) p = p / p.norm() * rng.uniform(1.0);
        Vec4 p_bar;
        p_bar << 0.0, p;
        const double lhs =
            residual_dynamics(qd, qd_dot, qd_ddot, q, qdot, p_bar, inertia).norm();
        const double e = (qd.vec() - q.vec()).norm();
        const double u = (qd_dot - qdot).norm();
        const double m0 = inertia.m0;
        const double rhs = 2.0 * (m0 + lmax) * e * qd_ddot.norm() +
                           (m0 + 7.0 * lmax) * e * qd_dot.squaredNorm() +
                           (3.0 * lmax + m0) * u * qd_dot.norm() + 0.5 * e * p.norm();
        return std::max(0.0, lhs - rhs);
    });

    // --- holdout validation of the sampled bound constants -------------------

    const TrajectorySummary traj{1.0, 1.0};
    const BoundConstants bc =
        estimate_bounds(inertia, traj, 1.0, std::max(samples, 1000), Rng::derive(seed, 1000));

    add("bounds_holdout_kM", 0.0, [&](Rng& rng) {
        const Vec4 x = random_unit(rng), y = random_unit(rng);
        const Vec4 v = rng.gaussian4();
        const double dxy = (x - y).norm();
        if (dxy < 1e-8 || v.norm() < 1e-12) return 0.0;
        const double r = ((d_matrix(UnitQuaternion(x), inertia) -
                           d_matrix(UnitQuaternion(y), inertia)) *
                          v)
                             .norm() /
                         (dxy * v.norm());
        return std::max(0.0, r - bc.k_M);
    });

    add("bounds_holdout_kc1", 0.0, [&](Rng& rng) {
        const Vec4 x = random_unit(rng);
        const Vec4 v = rng.gaussian4();
        Vec4 z = rng.gaussian4();
        z -= x * x.dot(z);
        if (z.norm() < 1e-8 || v.norm() < 1e-12) return 0.0;
        const double r =
            (c_matrix(UnitQuaternion(x), z, inertia) * v).norm() / (z.norm() * v.norm());
        return std::max(0.0, r - bc.k_c1);
    });

    add("bounds_holdout_kc2", 0.0, [&](Rng& rng) {
        const Vec4 x = random_unit(rng), y = random_unit(rng);
        const Vec4 v = rng.gaussian4();
        Vec4 z = rng.gaussian4();
        z -= x * x.dot(z);
        const double dxy = (x - y).norm();
        if (dxy < 1e-8 || z.norm() < 1e-8 || v.norm() < 1e-12) return 0.0;
        const double r = ((c_matrix(UnitQuaternion(x), z, inertia) -
                           c_matrix(UnitQuaternion(y), z, inertia)) *
                          v)
                             .norm() /
                         (dxy * z.norm() * v.norm());
        return std::max(0.0, r - bc.k_c2);
    });

    rep.all_pass = std::all_of(rep.rows.begin(), rep.rows.end(),
                               [](const VerifyRow& r) { return r.pass; });
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

} // namespace quatlag
