#include "quatlag/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "quatlag/errors.hpp"

namespace quatlag {

namespace {

void require_spd(const Eigen::Ref<const Eigen::MatrixXd>& A, const char* name) {
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw ConfigError(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError(std::string(name) + " must be positive definite");
    }
}

double lambda_min(const Mat4& A) {
    return Eigen::SelfAdjointEigenSolver<Mat4>(A).eigenvalues().minCoeff();
}

// Desired point with the mode sign folded into (qd, qd_dot, qd_ddot).
struct SignedDesired {
    UnitQuaternion qd;
    Vec4 qd_dot;
    Vec4 qd_ddot;
};

SignedDesired signed_desired(const DesiredPoint& d, int h) {
    const double s = static_cast<double>(h);
    return {UnitQuaternion(Vec4(s * d.qd.vec())), s * d.qd_dot, s * d.qd_ddot};
}

// X(q, qdot) = lambda_f J(q) F(w) - 2 J(q) S(w) F(w) + J(qdot) F(w), w = J^T(q) qdot.
Mat46 x_signal(const UnitQuaternion& q, const Vec4& qdot, double lambda_f) {
    const Mat43 J = jmat(q.vec());
    const Vec3 w = J.transpose() * qdot;
    const Mat36 Fw = f_map(w);
    return lambda_f * J * Fw - 2.0 * J * skew(w) * Fw + jmat(qdot) * Fw;
}

} // namespace

// ---------------------------------------------------------------------------
// Hybrid switching logic
// ---------------------------------------------------------------------------

int initial_mode(double eps0) { return eps0 >= 0.0 ? +1 : -1; }

Vec4 tracking_error(const UnitQuaternion& q, const UnitQuaternion& qd, int h) {
    return q.vec() - static_cast<double>(h) * qd.vec();
}

double potential(const Vec4& e, int /*h*/) { return e.squaredNorm(); }

double gap(const UnitQuaternion& q, const UnitQuaternion& qd, int h) {
    const double eps0 = quat_error(qd, q)[0];
    return 2.0 * (std::abs(eps0) - static_cast<double>(h) * eps0);
}

HybridLogic jump_rule(const HybridLogic& logic, const UnitQuaternion& q,
                      const UnitQuaternion& qd, double t) {
    HybridLogic out = logic;
    if (!logic.jumps_enabled) return out;
    const double eps0 = quat_error(qd, q)[0];
    const double g = 2.0 * (std::abs(eps0) - static_cast<double>(logic.h) * eps0);
    if (g >= logic.delta) {
        // argmin over modes; an exact eps0 == 0 ties and keeps the current h.
        int h_new = logic.h;
        if (eps0 > 0.0) h_new = +1;
        if (eps0 < 0.0) h_new = -1;
        if (h_new != logic.h) {
            out.h = h_new;
            out.jumps.push_back({t, h_new, g});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// State feedback
// ---------------------------------------------------------------------------

GainsStateFeedback::GainsStateFeedback(const Mat4& Lambda_in, const Mat4& Ks_in)
    : Lambda(Lambda_in), Ks(Ks_in) {
    require_spd(Lambda, "Lambda");
    require_spd(Ks, "Ks");
}

GainsStateFeedback GainsStateFeedback::diag(double lambda, double ks) {
    return GainsStateFeedback(lambda * Mat4::Identity(), ks * Mat4::Identity());
}

Vec4 control_state_feedback(const UnitQuaternion& q, const Vec4& qdot, const DesiredPoint& d,
                            int h, const GainsStateFeedback& gains,
                            const InertiaModel& inertia) {
    const double hs = static_cast<double>(h);
    const Vec4 e = q.vec() - hs * d.qd.vec();
    const Vec4 edot = qdot - hs * d.qd_dot;
    const Vec4 qdot_r = hs * d.qd_dot - gains.Lambda * e;
    const Vec4 qddot_r = hs * d.qd_ddot - gains.Lambda * edot;
    const Vec4 s = edot + gains.Lambda * e;
    return d_matrix(q, inertia) * qddot_r + c_matrix(q, qdot, inertia) * qdot_r - gains.Ks * s;
}

// ---------------------------------------------------------------------------
// Adaptive state feedback
// ---------------------------------------------------------------------------

GainsAdaptiveSF::GainsAdaptiveSF(const Mat4& Kd_in, double kp_in, double g1, double g2, double lf)
    : Kd(Kd_in), kp(kp_in), gamma1(g1), gamma2(g2), lambda_f(lf) {
    require_spd(Kd, "Kd");
    if (!(kp > 0.0)) throw ConfigError("kp must be positive");
    if (gamma1 < 0.0) throw ConfigError("gamma1 must be nonnegative");
    if (!(gamma2 > 0.0)) throw ConfigError("gamma2 must be positive");
    if (!(lambda_f > 0.0)) throw ConfigError("lambda_f must be positive");
}

GainsAdaptiveSF GainsAdaptiveSF::diag(double kd, double kp_in, double g1, double g2, double lf) {
    return GainsAdaptiveSF(kd * Mat4::Identity(), kp_in, g1, g2, lf);
}

void AdaptiveSFState::initialize(const UnitQuaternion& q, const Vec4& qdot,
                                 const Vec4& tau_bar0, double lambda_f) {
    Xf = x_signal(q, qdot, lambda_f);
    tau_f = tau_bar0;
    q_f = q.vec();
    initialized = true;
}

AdaptiveSFFilterDeriv adaptive_sf_filter_deriv(const AdaptiveSFState& state,
                                               const UnitQuaternion& q, const Vec4& qdot,
                                               const Vec4& tau_bar, double lambda_f) {
    AdaptiveSFFilterDeriv d;
    d.Xf_dot = lambda_f * (x_signal(q, qdot, lambda_f) - state.Xf);
    d.tau_f_dot = lambda_f * (tau_bar - state.tau_f);
    d.q_f_dot = lambda_f * (q.vec() - state.q_f);
    return d;
}

AdaptiveSFState adaptive_sf_regressor_filters_step(const AdaptiveSFState& state,
                                                   const UnitQuaternion& q, const Vec4& qdot,
                                                   const Vec4& tau_bar, double dt,
                                                   double lambda_f) {
    AdaptiveSFState out = state;
    if (!out.initialized) {
        out.initialize(q, qdot, tau_bar, lambda_f);
        return out;
    }
    // RK4 on the first-order lags with inputs held over the step. For
    // ydot = lambda (u - y) this matches exp(-lambda dt) through 4th order.
    const double a = lambda_f * dt;
    const double decay = 1.0 - a + a * a / 2.0 - a * a * a / 6.0 + a * a * a * a / 24.0;
    const Mat46 X = x_signal(q, qdot, lambda_f);
    out.Xf = X + (state.Xf - X) * decay;
    out.tau_f = tau_bar + (state.tau_f - tau_bar) * decay;
    out.q_f = q.vec() + (state.q_f - q.vec()) * decay;
    return out;
}

Mat49 yf_matrix(const AdaptiveSFState& state, const UnitQuaternion& q, const Vec4& qdot,
                double lambda_f) {
    const Mat43 J = jmat(q.vec());
    const Vec3 w = J.transpose() * qdot;
    Mat49 yf;
    yf.leftCols<6>() = lambda_f * J * f_map(w) - state.Xf;
    yf.rightCols<3>() = -0.5 * jmat(state.q_f);
    return yf;
}

std::pair<Vec4, Vec9> control_adaptive_sf(const UnitQuaternion& q, const Vec4& qdot,
                                          const DesiredPoint& d, int h,
                                          const AdaptiveSFState& state,
                                          const GainsAdaptiveSF& gains, double m0) {
    const SignedDesired sd = signed_desired(d, h);
    const Vec4 e = q.vec() - sd.qd.vec();
    const Vec4 edot = qdot - sd.qd_dot;
    const Vec4 eta1 = edot + e;

    const Vec4 y0 = regressors(sd.qd, sd.qd_dot, sd.qd_ddot).Y0;
    const Mat49 ybar = regressor_bar(sd.qd, sd.qd_dot, sd.qd_ddot);

    const Vec4 tau_bar =
        y0 * m0 + ybar * state.theta_hat - gains.Kd * eta1 - gains.kp * e;

    const Mat49 yf = yf_matrix(state, q, qdot, gains.lambda_f);
    const Vec9 theta_hat_dot = -gains.gamma1 * yf.transpose() * (yf * state.theta_hat - state.tau_f) -
                               gains.gamma2 * ybar.transpose() * eta1;
    return {tau_bar, theta_hat_dot};
}

// ---------------------------------------------------------------------------
// Adaptive attitude feedback
// ---------------------------------------------------------------------------

GainsAdaptiveOF::GainsAdaptiveOF(const Mat4& Kf_in, double kv_in, double kp_in,
                                 const Mat9& Gamma_in)
    : Kf(Kf_in), kv(kv_in), kp(kp_in), Gamma(Gamma_in) {
    require_spd(Kf, "Kf");
    require_spd(Gamma, "Gamma");
    if (!(kv > 0.0)) throw ConfigError("kv must be positive");
    if (!(kp > 0.0)) throw ConfigError("kp must be positive");
}

void AdaptiveOFState::initialize(const Vec4& e0, const Mat49& ybar_d0, const Vec9& theta0,
                                 const GainsAdaptiveOF& gains) {
    g = gains.kv * e0; // nu(0) = 0
    mu = -ybar_d0.transpose() * e0 - gains.Gamma.ldlt().solve(theta0);
    initialized = true;
}

void AdaptiveOFState::rebase_at_jump(const Vec4& e_old, const Vec4& e_new,
                                     const Mat49& ybar_d_new, const Vec9& theta_hat_pre,
                                     const GainsAdaptiveOF& gains) {
    mu = -ybar_d_new.transpose() * e_new - gains.Gamma.ldlt().solve(theta_hat_pre);
    g += gains.kv * (e_new - e_old);
}

Vec4 damping_filter_deriv(const AdaptiveOFState& state, const Vec4& e,
                          const GainsAdaptiveOF& gains) {
    const double kv = gains.kv;
    return -gains.Kf * (state.g - kv * e) - kv * (state.g + (1.0 - kv) * e) + gains.kp * e;
}

AdaptiveOFState damping_filter_step(const AdaptiveOFState& state, const Vec4& e,
                                    const GainsAdaptiveOF& gains, double dt) {
    AdaptiveOFState out = state;
    const auto f = [&](const Vec4& g) {
        AdaptiveOFState tmp = state;
        tmp.g = g;
        return damping_filter_deriv(tmp, e, gains);
    };
    const Vec4 k1 = f(state.g);
    const Vec4 k2 = f(state.g + 0.5 * dt * k1);
    const Vec4 k3 = f(state.g + 0.5 * dt * k2);
    const Vec4 k4 = f(state.g + dt * k3);
    out.g = state.g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return out;
}

Vec4 TanhDampingFilter::nu() const { return ef.array().tanh(); }

Vec4 TanhDampingFilter::deriv(const Vec4& e, const Vec4& edot,
                              const GainsAdaptiveOF& gains) const {
    const Vec4 v = nu();
    const Vec4 eta2 = edot + e + v;
    const Vec4 rhs = gains.Kf * v + gains.kv * eta2 - gains.kp * e;
    const Vec4 cosh2 = ef.array().cosh().square();
    return -(cosh2.array() * rhs.array()).matrix();
}

Mat49 ybar_desired(const DesiredPoint& d, int h) {
    const SignedDesired sd = signed_desired(d, h);
    return regressor_bar(sd.qd, sd.qd_dot, sd.qd_ddot);
}

Vec4 y0_desired(const DesiredPoint& d, int h) {
    const SignedDesired sd = signed_desired(d, h);
    return regressors(sd.qd, sd.qd_dot, sd.qd_ddot).Y0;
}

AdaptiveOFOutput control_adaptive_of(const UnitQuaternion& q_meas, const DesiredPoint& d, int h,
                                     const AdaptiveOFState& state, const GainsAdaptiveOF& gains,
                                     double m0, const Mat49& ybar_d_dot) {
    AdaptiveOFOutput out;
    const double hs = static_cast<double>(h);
    const Vec4 e = q_meas.vec() - hs * d.qd.vec();
    const Mat49 ybar = ybar_desired(d, h);
    const Vec4 y0 = y0_desired(d, h);

    out.theta_hat = -gains.Gamma * (ybar.transpose() * e + state.mu);
    out.nu = state.g - gains.kv * e;
    out.tau_bar = y0 * m0 + ybar * out.theta_hat + gains.kv * out.nu - gains.kp * e;
    out.mu_dot = ybar.transpose() * (e + out.nu) - ybar_d_dot.transpose() * e;
    out.g_dot = damping_filter_deriv(state, e, gains);
    return out;
}

Mat49 ybar_desired_dot(const DesiredTrajectory& traj, double t, int h, YbarDotMode mode) {
    const double hs = static_cast<double>(h);
    if (mode == YbarDotMode::finite_difference) {
        const double eps = 1e-4;
        if (t < eps) {
            const Mat49 y1 = ybar_desired(traj.at(t + eps), +1);
            const Mat49 y0 = ybar_desired(traj.at(t), +1);
            return hs * (y1 - y0) / eps;
        }
        const Mat49 yp = ybar_desired(traj.at(t + eps), +1);
        const Mat49 ym = ybar_desired(traj.at(t - eps), +1);
        return hs * (yp - ym) / (2.0 * eps);
    }

    const DesiredPoint p = traj.at(t);
    const Vec4 q3 = traj.third_derivative(t);
    const Mat43 J = jmat(p.qd.vec());
    const Vec3 w = J.transpose() * p.qd_dot;
    const Vec3 wdot = J.transpose() * p.qd_ddot;
    // wddot keeps the J^T(qd_dot) qd_ddot term; only J^T(x) x vanishes.
    const Vec3 wddot = jmat(p.qd_dot).transpose() * p.qd_ddot + J.transpose() * q3;

    const Mat36 Fw = f_map(w);
    const Mat36 Fwd = f_map(wdot);
    Mat49 ydot;
    ydot.leftCols<6>() = jmat(p.qd_dot) * (Fwd + 2.0 * skew(w) * Fw) +
                         J * (f_map(wddot) + 2.0 * skew(wdot) * Fw + 2.0 * skew(w) * Fwd);
    ydot.rightCols<3>() = -0.5 * jmat(p.qd_dot);
    return hs * ydot;
}

// ---------------------------------------------------------------------------
// Gain feasibility checks
// ---------------------------------------------------------------------------

GainCheck check_gains_theorem2(const GainsAdaptiveSF& gains, const BoundConstants& bounds) {
    GainCheck c;
    c.alpha1 = bounds.k_h1 + 2.0 * bounds.k_c1 + bounds.m_bar;
    c.alpha2 = bounds.k_h2 + bounds.k_c1 * bounds.traj.sup_qd_dot;
    c.threshold = (c.alpha1 + c.alpha2) * (c.alpha1 + c.alpha2) / (4.0 * gains.kp) + c.alpha1;
    const double gain = lambda_min(gains.Kd);
    c.margin = gain - c.threshold;
    c.pass = c.margin > 0.0;
    return c;
}

GainCheck check_gains_theorem3(const GainsAdaptiveOF& gains, const BoundConstants& bounds) {
    GainCheck c;
    const double sup_dot = bounds.traj.sup_qd_dot;
    const double kf_min = lambda_min(gains.Kf);
    const double kf_plus_i =
        Eigen::SelfAdjointEigenSolver<Mat4>(Mat4(gains.Kf + Mat4::Identity()))
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff();
    c.alpha1 = bounds.k_h1 + 4.0 * bounds.k_c1 + bounds.m_bar;
    c.alpha2 = bounds.k_h1 + bounds.k_h2 + bounds.k_c1 * sup_dot + 4.0 * bounds.k_c1 +
               bounds.m_bar * std::abs(gains.kp - 1.0);
    c.alpha3 = bounds.k_h1 + bounds.k_c1 * sup_dot + 4.0 * bounds.k_c1 + bounds.m_bar * kf_plus_i;
    c.beta = std::max(c.alpha2 * c.alpha2 / (4.0 * gains.kp),
                      (c.alpha3 * c.alpha3 * gains.kp + c.alpha2 * c.alpha2 * kf_min) /
                          (4.0 * gains.kp * kf_min));
    c.threshold = (c.beta + c.alpha1) / bounds.m_lower;
    c.margin = gains.kv - c.threshold;
    c.pass = c.margin > 0.0;
    return c;
}

// ---------------------------------------------------------------------------
// Persistent excitation
// ---------------------------------------------------------------------------

double pe_metric(const std::vector<Mat49>& yf_history, double window, double dt) {
    if (!(dt > 0.0) || !(window > 0.0)) {
        throw ConfigError("pe_metric: window and dt must be positive");
    }
    const auto L = static_cast<std::size_t>(std::llround(window / dt));
    if (L < 1 || yf_history.size() < L + 1) {
        throw InsufficientHistory("pe_metric: history spans " +
                                  std::to_string(yf_history.empty()
                                                     ? 0.0
                                                     : dt * static_cast<double>(yf_history.size() - 1)) +
                                  " s, window needs " + std::to_string(window) + " s");
    }
    // Trapezoid prefix sums of Yf^T Yf.
    std::vector<Mat9> prefix(yf_history.size());
    prefix[0] = Mat9::Zero();
    Mat9 prev = yf_history[0].transpose() * yf_history[0];
    for (std::size_t i = 1; i < yf_history.size(); ++i) {
        const Mat9 cur = yf_history[i].transpose() * yf_history[i];
        prefix[i] = prefix[i - 1] + 0.5 * dt * (prev + cur);
        prev = cur;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + L < yf_history.size(); ++s) {
        const Mat9 W = prefix[s + L] - prefix[s];
        const double lmin = Eigen::SelfAdjointEigenSolver<Mat9>(W).eigenvalues().minCoeff();
        best = std::min(best, lmin);
    }
    return best;
}

} // namespace quatlag
