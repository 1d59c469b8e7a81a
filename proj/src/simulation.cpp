#include "quatlag/simulation.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "quatlag/errors.hpp"

namespace quatlag {

namespace {

// Weight on the attitude term of the recorded energy function for the
// state-feedback laws. Must stay below 4 lmin(Ks) lmin(Lambda) for the
// function to decrease along flows; 0.2 clears that for every preset.
constexpr double kAttitudeWeight = 0.2;

// Augmented integration state. Members not used by the active controller
// stay zero and cost nothing but copies.
struct SimState {
    Vec4 q = Vec4(1, 0, 0, 0);
    Vec3 omega = Vec3::Zero();
    Vec9 theta_hat = Vec9::Zero(); // adaptive state feedback
    Mat46 Xf = Mat46::Zero();      // adaptive-SF prediction filters
    Vec4 tau_f = Vec4::Zero();
    Vec4 q_f = Vec4::Zero();
    Vec9 mu = Vec9::Zero();        // adaptive attitude feedback
    Vec4 g = Vec4::Zero();
    Vec3 p = Vec3::Zero();         // disturbance torque
    Mat46 Xf_obs = Mat46::Zero();  // excitation observer
    Vec4 q_f_obs = Vec4::Zero();
};

SimState axpy(const SimState& a, double s, const SimState& b) {
    SimState out;
    out.q = a.q + s * b.q;
    out.omega = a.omega + s * b.omega;
    out.theta_hat = a.theta_hat + s * b.theta_hat;
    out.Xf = a.Xf + s * b.Xf;
    out.tau_f = a.tau_f + s * b.tau_f;
    out.q_f = a.q_f + s * b.q_f;
    out.mu = a.mu + s * b.mu;
    out.g = a.g + s * b.g;
    out.p = a.p + s * b.p;
    out.Xf_obs = a.Xf_obs + s * b.Xf_obs;
    out.q_f_obs = a.q_f_obs + s * b.q_f_obs;
    return out;
}

// Per-step frozen quantities: the measurement draw, the disturbance rate, and
// the switching mode all hold across the four RK4 stages.
struct StepContext {
    double n = 0.0;
    Vec4 vbar = Vec4::Zero();
    Vec3 pdot = Vec3::Zero();
    int h = +1;
};

struct ControlEval {
    Vec4 tau_bar = Vec4::Zero();
    Vec3 tau = Vec3::Zero();
    Vec4 nu = Vec4::Zero();
    Vec9 theta_hat = Vec9::Zero(); // current estimate (algebraic for attitude feedback)
};

std::pair<double, Vec4> draw_direction(const NoiseModel& noise, Rng& rng) {
    const double n = rng.uniform(noise.n_max);
    Vec4 v;
    v = noise.sigma * rng.gaussian4();
    const double vn = v.norm();
    const Vec4 vbar = vn > 1e-12 ? Vec4(v / vn) : Vec4(1, 0, 0, 0);
    return {n, vbar};
}

class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg)
        : cfg_(cfg), traj_(cfg.trajectory, cfg.dt_internal), rng_(cfg.seed) {
        if (cfg_.controller == ControllerKind::adaptive_of) {
            gamma_inv_ = cfg_.gains_adaptive_of->Gamma.ldlt().solve(Mat9::Identity());
        }
        logic_.delta = cfg_.delta;
        logic_.jumps_enabled = cfg_.controller != ControllerKind::continuous;
    }

    RunResult operator()() {
        SimState s;
        s.q = normalize(cfg_.q0).vec();
        s.omega = cfg_.omega0;
        if (cfg_.disturbance.kind != DisturbanceModel::Kind::none) {
            s.p = cfg_.disturbance.p0;
        }

        const auto n_steps = static_cast<long long>(std::llround(cfg_.horizon / cfg_.dt));
        RunResult result;
        result.records.reserve(static_cast<std::size_t>(n_steps / cfg_.output_decimation) + 2);

        double energy_acc = 0.0;
        double prev_tau2 = 0.0;

        for (long long k = 0; k <= n_steps; ++k) {
            const double t = static_cast<double>(k) * cfg_.dt;
            StepContext ctx;
            if (cfg_.noise.n_max > 0.0) {
                std::tie(ctx.n, ctx.vbar) = draw_direction(cfg_.noise, rng_);
            }
            const UnitQuaternion q_m = measured(s.q, ctx);
            const DesiredPoint dp = traj_.at(t);

            if (k == 0) {
                logic_.h = cfg_.h0 != 0 ? cfg_.h0 : initial_mode(quat_error(dp.qd, q_m)[0]);
            }

            // Mode switch: checked once per step, before the control evaluation,
            // from the measured attitude. The attitude-feedback estimator is
            // re-based across an actual switch so theta_hat and nu carry over.
            if (logic_.jumps_enabled) {
                const int h_old = logic_.h;
                HybridLogic next = jump_rule(logic_, q_m, dp.qd, t);
                if (next.h != h_old && cfg_.controller == ControllerKind::adaptive_of &&
                    of_initialized_) {
                    const Vec4 e_old = tracking_error(q_m, dp.qd, h_old);
                    const Vec4 e_new = tracking_error(q_m, dp.qd, next.h);
                    const Mat49 ybar_old = ybar_desired(dp, h_old);
                    const Mat49 ybar_new = ybar_desired(dp, next.h);
                    const Vec9 theta_pre =
                        -cfg_.gains_adaptive_of->Gamma * (ybar_old.transpose() * e_old + s.mu);
                    AdaptiveOFState st;
                    st.mu = s.mu;
                    st.g = s.g;
                    st.rebase_at_jump(e_old, e_new, ybar_new, theta_pre, *cfg_.gains_adaptive_of);
                    s.mu = st.mu;
                    s.g = st.g;
                }
                logic_ = std::move(next);
            }
            ctx.h = logic_.h;

            if (k == 0) {
                initialize_states(s, q_m, dp, ctx);
            }

            if (cfg_.disturbance.kind == DisturbanceModel::Kind::random_walk && k < n_steps) {
                ctx.pdot = cfg_.disturbance.sigma_w * rng_.gaussian3();
            }

            auto [d1, ev1] = deriv(t, s, ctx);
            if (k > 0) {
                energy_acc += 0.5 * cfg_.dt * (prev_tau2 + ev1.tau.squaredNorm());
            }
            prev_tau2 = ev1.tau.squaredNorm();

            if (k % cfg_.output_decimation == 0 || k == n_steps) {
                emit(result, t, s, ev1, dp, energy_acc);
            }

            if (k == n_steps) break;

            const SimState d2 = deriv(t + 0.5 * cfg_.dt, axpy(s, 0.5 * cfg_.dt, d1), ctx).first;
            const SimState d3 = deriv(t + 0.5 * cfg_.dt, axpy(s, 0.5 * cfg_.dt, d2), ctx).first;
            const SimState d4 = deriv(t + cfg_.dt, axpy(s, cfg_.dt, d3), ctx).first;
            s = axpy(s, cfg_.dt / 6.0, d1);
            s = axpy(s, cfg_.dt / 3.0, d2);
            s = axpy(s, cfg_.dt / 3.0, d3);
            s = axpy(s, cfg_.dt / 6.0, d4);
            s.q = normalize(s.q).vec();

            if (!s.q.allFinite() || !s.omega.allFinite() || s.omega.norm() > 1e6) {
                throw NumericalDivergence("state diverged at t = " + std::to_string(t + cfg_.dt));
            }
        }

        result.jumps = logic_.jumps;
        return result;
    }

private:
    UnitQuaternion measured(const Vec4& q, const StepContext& ctx) const {
        if (cfg_.noise.n_max > 0.0) {
            return normalize(q + ctx.n * ctx.vbar);
        }
        return normalize(q);
    }

    Vec9 theta_true(const SimState& s) const {
        Vec9 th;
        th.head<6>() = cfg_.inertia.theta();
        th.tail<3>() = s.p;
        return th;
    }

    void initialize_states(SimState& s, const UnitQuaternion& q_m, const DesiredPoint& dp,
                           const StepContext& ctx) {
        const Vec4 qdot_m = qdot_from_omega(q_m, s.omega);
        if (cfg_.controller == ControllerKind::adaptive_sf) {
            const auto& gains = *cfg_.gains_adaptive_sf;
            AdaptiveSFState st;
            st.theta_hat = cfg_.theta_hat0;
            // tau_bar does not read the filters, so a blank bank is fine here.
            const Vec4 tau_bar0 =
                control_adaptive_sf(q_m, qdot_m, dp, ctx.h, st, gains, cfg_.inertia.m0).first;
            st.initialize(q_m, qdot_m, tau_bar0, gains.lambda_f);
            s.theta_hat = st.theta_hat;
            s.Xf = st.Xf;
            s.tau_f = st.tau_f;
            s.q_f = st.q_f;
        } else if (cfg_.controller == ControllerKind::adaptive_of) {
            const auto& gains = *cfg_.gains_adaptive_of;
            AdaptiveOFState st;
            st.initialize(tracking_error(q_m, dp.qd, ctx.h), ybar_desired(dp, ctx.h),
                          cfg_.theta_hat0, gains);
            s.mu = st.mu;
            s.g = st.g;
            of_initialized_ = true;
        }
        // Excitation observer runs on the true state regardless of controller.
        const UnitQuaternion q_true = normalize(s.q);
        AdaptiveSFState obs;
        obs.initialize(q_true, qdot_from_omega(q_true, s.omega), Vec4::Zero(), cfg_.pe_lambda_f);
        s.Xf_obs = obs.Xf;
        s.q_f_obs = obs.q_f;
    }

    std::pair<SimState, ControlEval> deriv(double t, const SimState& s, const StepContext& ctx) {
        SimState d;
        ControlEval ev;
        const UnitQuaternion q_m = measured(s.q, ctx);
        const Vec4 qdot_m = qdot_from_omega(q_m, s.omega);
        const DesiredPoint dp = traj_.at(t);

        switch (cfg_.controller) {
            case ControllerKind::continuous:
            case ControllerKind::hybrid: {
                ev.tau_bar =
                    control_state_feedback(q_m, qdot_m, dp, ctx.h, *cfg_.gains_sf, cfg_.inertia);
                break;
            }
            case ControllerKind::adaptive_sf: {
                const auto& gains = *cfg_.gains_adaptive_sf;
                AdaptiveSFState st;
                st.theta_hat = s.theta_hat;
                st.Xf = s.Xf;
                st.tau_f = s.tau_f;
                st.q_f = s.q_f;
                st.initialized = true;
                auto [tau_bar, theta_dot] =
                    control_adaptive_sf(q_m, qdot_m, dp, ctx.h, st, gains, cfg_.inertia.m0);
                ev.tau_bar = tau_bar;
                ev.theta_hat = s.theta_hat;
                d.theta_hat = theta_dot;
                const AdaptiveSFFilterDeriv fd =
                    adaptive_sf_filter_deriv(st, q_m, qdot_m, tau_bar, gains.lambda_f);
                d.Xf = fd.Xf_dot;
                d.tau_f = fd.tau_f_dot;
                d.q_f = fd.q_f_dot;
                break;
            }
            case ControllerKind::adaptive_of: {
                const auto& gains = *cfg_.gains_adaptive_of;
                AdaptiveOFState st;
                st.mu = s.mu;
                st.g = s.g;
                st.initialized = true;
                const Mat49 ybar_dot = ybar_desired_dot(traj_, t, ctx.h, cfg_.ybar_dot_mode);
                const AdaptiveOFOutput out = control_adaptive_of(q_m, dp, ctx.h, st, gains,
                                                                 cfg_.inertia.m0, ybar_dot);
                ev.tau_bar = out.tau_bar;
                ev.nu = out.nu;
                ev.theta_hat = out.theta_hat;
                d.mu = out.mu_dot;
                d.g = out.g_dot;
                break;
            }
        }

        // The commanded generalized force maps to a physical body torque
        // through the measured attitude; the plant then sees it through the
        // true attitude.
        ev.tau = generalized_to_torque(q_m, ev.tau_bar);

        const UnitQuaternion q_true = normalize(s.q);
        auto [qdot, omega_dot] =
            euler_newton_deriv(BodyState{q_true, s.omega}, Vec3(ev.tau + s.p), cfg_.inertia);
        d.q = qdot;
        d.omega = omega_dot;
        d.p = ctx.pdot;

        AdaptiveSFState obs;
        obs.Xf = s.Xf_obs;
        obs.q_f = s.q_f_obs;
        obs.initialized = true;
        const Vec4 qdot_true = qdot_from_omega(q_true, s.omega);
        const AdaptiveSFFilterDeriv od =
            adaptive_sf_filter_deriv(obs, q_true, qdot_true, Vec4::Zero(), cfg_.pe_lambda_f);
        d.Xf_obs = od.Xf_dot;
        d.q_f_obs = od.q_f_dot;

        return {d, ev};
    }

    void emit(RunResult& result, double t, const SimState& s, const ControlEval& ev,
              const DesiredPoint& dp, double energy_acc) {
        const UnitQuaternion q_true = normalize(s.q);
        const Vec4 qdot_true = qdot_from_omega(q_true, s.omega);
        const double hs = static_cast<double>(logic_.h);
        const Vec4 e = q_true.vec() - hs * dp.qd.vec();
        const Vec4 edot = qdot_true - hs * dp.qd_dot;

        SimRecord rec;
        rec.t = t;
        rec.q = q_true.vec();
        rec.omega = s.omega;
        rec.h = logic_.h;
        rec.e_norm = e.norm();
        rec.eps0 = quat_error(dp.qd, q_true)[0];
        rec.tau = ev.tau;
        rec.tau_bar = ev.tau_bar;
        rec.energy = std::sqrt(energy_acc);

        const Mat4 D = d_matrix(q_true, cfg_.inertia);
        Vec4 eta = Vec4::Zero();
        switch (cfg_.controller) {
            case ControllerKind::continuous:
            case ControllerKind::hybrid: {
                eta = edot + cfg_.gains_sf->Lambda * e;
                rec.V_lyap = 0.5 * eta.dot(D * eta) + 0.5 * kAttitudeWeight * e.squaredNorm();
                break;
            }
            case ControllerKind::adaptive_sf: {
                eta = edot + e;
                const Vec9 terr = s.theta_hat - theta_true(s);
                rec.theta_err_norm = terr.norm();
                const auto& gains = *cfg_.gains_adaptive_sf;
                rec.V_lyap = 0.5 * eta.dot(D * eta) + 0.5 * gains.kp * e.squaredNorm() +
                             0.5 / gains.gamma2 * terr.squaredNorm();
                break;
            }
            case ControllerKind::adaptive_of: {
                eta = edot + e + ev.nu;
                const Vec9 terr = ev.theta_hat - theta_true(s);
                rec.theta_err_norm = terr.norm();
                rec.nu_norm = ev.nu.norm();
                const auto& gains = *cfg_.gains_adaptive_of;
                rec.V_lyap = 0.5 * eta.dot(D * eta) + 0.5 * gains.kp * e.squaredNorm() +
                             0.5 * ev.nu.squaredNorm() + 0.5 * terr.dot(gamma_inv_ * terr);
                break;
            }
        }
        rec.eta_norm = eta.norm();
        result.records.push_back(rec);

        AdaptiveSFState obs;
        obs.Xf = s.Xf_obs;
        obs.q_f = s.q_f_obs;
        obs.initialized = true;
        result.yf_history.push_back(yf_matrix(obs, q_true, qdot_true, cfg_.pe_lambda_f));

        if (cfg_.trace_estimates) {
            EstimateTrace tr;
            tr.theta_hat = ev.theta_hat;
            tr.nu = ev.nu;
            tr.eta = eta;
            result.traces.push_back(tr);
        }
    }

    const ScenarioConfig& cfg_;
    DesiredTrajectory traj_;
    Rng rng_;
    HybridLogic logic_;
    Mat9 gamma_inv_ = Mat9::Identity();
    bool of_initialized_ = false;
};

} // namespace

void ScenarioConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("horizon must cover at least one step");
    if (output_decimation < 1) throw ConfigError("output_decimation must be >= 1");
    if (delta < 0.0) throw ConfigError("delta must be nonnegative");
    if (noise.n_max < 0.0) throw ConfigError("noise.n_max must be nonnegative");
    if (!(noise.sigma > 0.0)) throw ConfigError("noise.sigma must be positive");
    if (disturbance.sigma_w < 0.0) throw ConfigError("disturbance.sigma_w must be nonnegative");
    if (!(dt_internal > 0.0)) throw ConfigError("dt_internal must be positive");
    if (!(pe_lambda_f > 0.0)) throw ConfigError("pe_lambda_f must be positive");
    if (!(convergence_threshold > 0.0)) throw ConfigError("convergence_threshold must be positive");
    if (h0 != -1 && h0 != 0 && h0 != 1) throw ConfigError("h0 must be -1, 0, or +1");
    if (std::abs(q0.norm() - 1.0) > 1e-3) throw ConfigError("q0 must be a unit quaternion");
    switch (controller) {
        case ControllerKind::continuous:
        case ControllerKind::hybrid:
            if (!gains_sf) throw ConfigError("state-feedback gains missing");
            break;
        case ControllerKind::adaptive_sf:
            if (!gains_adaptive_sf) throw ConfigError("adaptive state-feedback gains missing");
            break;
        case ControllerKind::adaptive_of:
            if (!gains_adaptive_of) throw ConfigError("adaptive attitude-feedback gains missing");
            break;
    }
}

RunResult run(const ScenarioConfig& config) {
    config.validate();
    Engine engine(config);
    return engine();
}

Metrics metrics(const std::vector<SimRecord>& records, double threshold,
                const DesiredTrajectory* traj) {
    if (records.empty()) throw EmptyRecords("metrics: empty record set");
    Metrics m;

    double acc = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double dt = records[i].t - records[i - 1].t;
        acc += 0.5 * dt * (records[i - 1].tau.squaredNorm() + records[i].tau.squaredNorm());
    }
    m.energy_final = std::sqrt(acc);

    std::size_t last_bad = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].e_norm >= threshold) last_bad = i;
    }
    if (last_bad == records.size()) {
        m.convergence_time = records.front().t;
    } else if (last_bad + 1 < records.size()) {
        m.convergence_time = records[last_bad + 1].t;
    }

    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].h != records[i - 1].h) ++m.jump_count;
    }

    if (m.convergence_time) {
        double path = 0.0;
        auto rate_err = [&](const SimRecord& r) {
            const Vec3 wd = traj ? traj->at(r.t).omega_d : Vec3(Vec3::Zero());
            return (r.omega - wd).norm();
        };
        double prev = rate_err(records.front());
        for (std::size_t i = 1; i < records.size(); ++i) {
            const double cur = rate_err(records[i]);
            path += 0.5 * (records[i].t - records[i - 1].t) * (prev + cur);
            prev = cur;
        }
        const double direct = 2.0 * std::acos(std::min(1.0, std::abs(records.front().eps0)));
        m.unwinding_flag = path > 1.5 * direct;
    }

    m.theta_err_final = records.back().theta_err_norm;
    return m;
}

UnitQuaternion measure(const UnitQuaternion& q_true, const NoiseModel& noise, Rng& rng) {
    if (noise.n_max <= 0.0) return q_true;
    const auto [n, vbar] = draw_direction(noise, rng);
    return normalize(q_true.vec() + n * vbar);
}

BodyState free_body_propagate(const BodyState& initial, const InertiaModel& inertia, double dt,
                              double T) {
    if (!(dt > 0.0) || T < 0.0) throw ConfigError("free_body_propagate: bad dt or T");
    const auto n_steps = static_cast<long long>(std::llround(T / dt));
    Vec4 q = initial.q.vec();
    Vec3 w = initial.omega;
    const auto f = [&](const Vec4& qs, const Vec3& ws) {
        return euler_newton_deriv(BodyState{normalize(qs), ws}, Vec3::Zero(), inertia);
    };
    for (long long k = 0; k < n_steps; ++k) {
        const auto [qk1, wk1] = f(q, w);
        const auto [qk2, wk2] = f(q + 0.5 * dt * qk1, w + 0.5 * dt * wk1);
        const auto [qk3, wk3] = f(q + 0.5 * dt * qk2, w + 0.5 * dt * wk2);
        const auto [qk4, wk4] = f(q + dt * qk3, w + dt * wk3);
        q += (dt / 6.0) * (qk1 + 2.0 * qk2 + 2.0 * qk3 + qk4);
        w += (dt / 6.0) * (wk1 + 2.0 * wk2 + 2.0 * wk3 + wk4);
        q = normalize(q).vec();
    }
    return BodyState{normalize(q), w};
}

} // namespace quatlag
