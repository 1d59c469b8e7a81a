#pragma once

#include <utility>
#include <vector>

#include "quatlag/rigid_dynamics.hpp"
#include "quatlag/trajectory.hpp"

namespace quatlag {

// ---------------------------------------------------------------------------
// Hybrid switching logic
// ---------------------------------------------------------------------------

/// +1 when eps0 >= 0, else -1.
int initial_mode(double eps0);

/// e = q - h * qd.
Vec4 tracking_error(const UnitQuaternion& q, const UnitQuaternion& qd, int h);

/// U(e, h) = |e|^2 = 2 (1 - h eps0). The mode enters only through e itself.
double potential(const Vec4& e, int h);

/// G = U(e, h) - min over modes = 2 (|eps0| - h eps0), with eps0 from (qd, q).
double gap(const UnitQuaternion& q, const UnitQuaternion& qd, int h);

struct Jump {
    double t = 0.0;
    int new_h = +1;
    double gap_at_fire = 0.0;
};

/// Switching state. delta >= 0; delta == 0 is the discontinuous limit where
/// the rule fires every step (the log still records only actual sign changes).
struct HybridLogic {
    int h = +1;
    double delta = 0.4;
    bool jumps_enabled = true;
    std::vector<Jump> jumps;
};

/// Applies the switch rule once: when jumps are enabled and G >= delta (ties
/// fire), h becomes sign(eps0); at eps0 == 0 both modes tie and h is kept.
/// An actual sign change is appended to the log with timestamp t.
HybridLogic jump_rule(const HybridLogic& logic, const UnitQuaternion& q,
                      const UnitQuaternion& qd, double t);

// ---------------------------------------------------------------------------
// State-feedback tracking controller (continuous and hybrid variants)
// ---------------------------------------------------------------------------

/// Gains for the passivity-based state-feedback law. Both matrices are
/// validated as symmetric positive definite at construction.
struct GainsStateFeedback {
    Mat4 Lambda;
    Mat4 Ks;

    GainsStateFeedback(const Mat4& Lambda_in, const Mat4& Ks_in);
    static GainsStateFeedback diag(double lambda, double ks);
};

/// tau_bar = D(q) qddot_r + C(q, qdot) qdot_r - Ks s with
/// qdot_r = h qdot_d - Lambda e, s = edot + Lambda e.
Vec4 control_state_feedback(const UnitQuaternion& q, const Vec4& qdot, const DesiredPoint& d,
                            int h, const GainsStateFeedback& gains, const InertiaModel& inertia);

// ---------------------------------------------------------------------------
// Adaptive state-feedback controller (composite update)
// ---------------------------------------------------------------------------

struct GainsAdaptiveSF {
    Mat4 Kd;
    double kp = 1.0;
    double gamma1 = 1.0;  // prediction-error weight
    double gamma2 = 1.0;  // tracking-error weight
    double lambda_f = 1.0; // filter pole, 1/s

    GainsAdaptiveSF(const Mat4& Kd_in, double kp_in, double g1, double g2, double lf);
    static GainsAdaptiveSF diag(double kd, double kp_in, double g1, double g2, double lf);
};

/// Filter bank state for the torque-prediction regressor. Initialized from
/// the first measured sample so that the predictor starts consistent.
struct AdaptiveSFState {
    Vec9 theta_hat = Vec9::Zero();
    Mat46 Xf = Mat46::Zero();
    Vec4 tau_f = Vec4::Zero();
    Vec4 q_f = Vec4::Zero();
    bool initialized = false;

    /// Sets Xf = X(q, qdot), tau_f = tau_bar0, q_f = q.
    void initialize(const UnitQuaternion& q, const Vec4& qdot, const Vec4& tau_bar0,
                    double lambda_f);
};

/// Time derivatives of the filter bank driven by the current signals.
struct AdaptiveSFFilterDeriv {
    Mat46 Xf_dot = Mat46::Zero();
    Vec4 tau_f_dot = Vec4::Zero();
    Vec4 q_f_dot = Vec4::Zero();
};
AdaptiveSFFilterDeriv adaptive_sf_filter_deriv(const AdaptiveSFState& state,
                                               const UnitQuaternion& q, const Vec4& qdot,
                                               const Vec4& tau_bar, double lambda_f);

/// Advances the filter bank one step of length dt holding (q, qdot, tau_bar)
/// fixed, with a single RK4 stage over the linear filter dynamics.
AdaptiveSFState adaptive_sf_regressor_filters_step(const AdaptiveSFState& state,
                                                   const UnitQuaternion& q, const Vec4& qdot,
                                                   const Vec4& tau_bar, double dt,
                                                   double lambda_f);

/// Prediction regressor Yf = [lambda_f J(q) F(w) - Xf, -(1/2) J(q_f)],
/// w = J^T(q) qdot.
Mat49 yf_matrix(const AdaptiveSFState& state, const UnitQuaternion& q, const Vec4& qdot,
                double lambda_f);

/// Control plus estimator derivative:
///   tau_bar = Yd0 m0 + Ybar_d theta_hat - Kd eta1 - kp e,   eta1 = edot + e,
///   theta_hat_dot = -gamma1 Yf^T (Yf theta_hat - tau_f) - gamma2 Ybar_d^T eta1,
/// with the desired-side regressors evaluated at (h qd, h qdot_d, h qddot_d).
std::pair<Vec4, Vec9> control_adaptive_sf(const UnitQuaternion& q, const Vec4& qdot,
                                          const DesiredPoint& d, int h,
                                          const AdaptiveSFState& state,
                                          const GainsAdaptiveSF& gains, double m0);

// ---------------------------------------------------------------------------
// Adaptive attitude-feedback controller (no velocity measurement)
// ---------------------------------------------------------------------------

struct GainsAdaptiveOF {
    Mat4 Kf;
    double kv = 1.0;
    double kp = 1.0;
    Mat9 Gamma;

    GainsAdaptiveOF(const Mat4& Kf_in, double kv_in, double kp_in, const Mat9& Gamma_in);
};

/// Filter and estimator state. theta_hat is algebraic:
///   theta_hat = -Gamma (Ybar_d^T e + mu),  nu = g - kv e.
/// Across a mode switch mu and g are re-based so that theta_hat and nu stay
/// continuous (the switch must not kick the estimator).
struct AdaptiveOFState {
    Vec9 mu = Vec9::Zero();
    Vec4 g = Vec4::Zero();
    bool initialized = false;

    /// g(0) = kv e(0) (so nu(0) = 0); mu(0) chosen so theta_hat(0) = theta0.
    void initialize(const Vec4& e0, const Mat49& ybar_d0, const Vec9& theta0,
                    const GainsAdaptiveOF& gains);

    /// Jump map: keeps theta_hat and nu continuous when e flips to e_new and
    /// the desired-side regressor flips to ybar_d_new.
    void rebase_at_jump(const Vec4& e_old, const Vec4& e_new, const Mat49& ybar_d_new,
                        const Vec9& theta_hat_pre, const GainsAdaptiveOF& gains);
};

/// Damping-filter derivative in the implementable linear form:
///   gdot = -Kf (g - kv e) - kv (g + (1 - kv) e) + kp e.
Vec4 damping_filter_deriv(const AdaptiveOFState& state, const Vec4& e,
                          const GainsAdaptiveOF& gains);

/// Advances g one RK4 step holding e fixed.
AdaptiveOFState damping_filter_step(const AdaptiveOFState& state, const Vec4& e,
                                    const GainsAdaptiveOF& gains, double dt);

/// Saturated reference form of the same filter: nu = tanh(ef),
///   ef_dot = -cosh^2(ef) .* (Kf nu + kv eta2 - kp e),  eta2 = edot + e + nu.
/// Kept for cross-checking the linear form; needs edot, so it is not part of
/// the attitude-only control path.
struct TanhDampingFilter {
    Vec4 ef = Vec4::Zero();
    Vec4 nu() const;
    Vec4 deriv(const Vec4& e, const Vec4& edot, const GainsAdaptiveOF& gains) const;
};

struct AdaptiveOFOutput {
    Vec4 tau_bar = Vec4::Zero();
    Vec9 mu_dot = Vec9::Zero();
    Vec4 g_dot = Vec4::Zero();
    Vec9 theta_hat = Vec9::Zero();
    Vec4 nu = Vec4::Zero();
};

/// Attitude-only control law:
///   tau_bar = Yd0 m0 + Ybar_d theta_hat + kv nu - kp e,
///   mu_dot = Ybar_d^T (e + nu) - Ybar_d_dot^T e,
/// regressors at (h qd, h qdot_d, h qddot_d); ybar_d_dot must carry the same
/// h sign. Uses neither omega nor qdot.
AdaptiveOFOutput control_adaptive_of(const UnitQuaternion& q_meas, const DesiredPoint& d, int h,
                                     const AdaptiveOFState& state, const GainsAdaptiveOF& gains,
                                     double m0, const Mat49& ybar_d_dot);

/// Desired-side regressor [Y(qd...), -(1/2) J(qd)] with the mode sign applied.
Mat49 ybar_desired(const DesiredPoint& d, int h);

/// Desired-side Y0 with the mode sign applied.
Vec4 y0_desired(const DesiredPoint& d, int h);

enum class YbarDotMode { analytic, finite_difference };

/// Time derivative of ybar_desired along the trajectory, either analytic
/// (uses the trajectory's third derivative) or central finite difference with
/// step 1e-4 s (one-sided at t = 0).
Mat49 ybar_desired_dot(const DesiredTrajectory& traj, double t, int h, YbarDotMode mode);

// ---------------------------------------------------------------------------
// Gain feasibility checks
// ---------------------------------------------------------------------------

/// Advisory verdict: gain > threshold with margin = gain - threshold.
struct GainCheck {
    bool pass = false;
    double margin = 0.0;
    double threshold = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0; // attitude-feedback check only
    double beta = 0.0;   // attitude-feedback check only
};

/// Requires lmin(Kd) > (a1 + a2)^2 / (4 kp) + a1 with
/// a1 = k_h1 + 2 k_c1 + m_bar, a2 = k_h2 + k_c1 sup|qdot_d|.
GainCheck check_gains_theorem2(const GainsAdaptiveSF& gains, const BoundConstants& bounds);

/// Requires kv > (beta + a1) / m_lower with the attitude-feedback constants
/// a1 = k_h1 + 4 k_c1 + m_bar,
/// a2 = k_h1 + k_h2 + k_c1 sup|qdot_d| + 4 k_c1 + m_bar |kp - 1|,
/// a3 = k_h1 + k_c1 sup|qdot_d| + 4 k_c1 + m_bar |Kf + I|,
/// beta = max(a2^2 / (4 kp), (a3^2 kp + a2^2 lmin(Kf)) / (4 kp lmin(Kf))).
GainCheck check_gains_theorem3(const GainsAdaptiveOF& gains, const BoundConstants& bounds);

// ---------------------------------------------------------------------------
// Persistent-excitation metric
// ---------------------------------------------------------------------------

/// min over window starts of lmin( integral over [t, t+window] of Yf^T Yf ),
/// trapezoid in time. Throws InsufficientHistory when the history spans less
/// than one window.
double pe_metric(const std::vector<Mat49>& yf_history, double window, double dt);

} // namespace quatlag
