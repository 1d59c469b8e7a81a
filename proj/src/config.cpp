#include "quatlag/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "quatlag/errors.hpp"

namespace quatlag {

namespace {

using nlohmann::json;

json mat_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// Square gain entries accept a scalar s (meaning s * I), a flat array of
// diagonal entries, or the full nested matrix.
Eigen::MatrixXd parse_square(const json& j, int n, const std::string& ctx) {
    if (j.is_number()) {
        return j.get<double>() * Eigen::MatrixXd::Identity(n, n);
    }
    if (!j.is_array() || j.size() != static_cast<std::size_t>(n)) {
        throw ConfigError(ctx + ": expected scalar, " + std::to_string(n) +
                          " diagonal entries, or a " + std::to_string(n) + "x" +
                          std::to_string(n) + " matrix");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (j[0].is_number()) {
        for (int i = 0; i < n; ++i) m(i, i) = j[i].get<double>();
        return m;
    }
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != static_cast<std::size_t>(n)) {
            throw ConfigError(ctx + ": row " + std::to_string(i) + " must have " +
                              std::to_string(n) + " entries");
        }
        for (int k = 0; k < n; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

Eigen::VectorXd parse_vec(const json& j, int n, const std::string& ctx) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(n)) {
        throw ConfigError(ctx + ": expected an array of " + std::to_string(n) + " numbers");
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = j[i].get<double>();
    return v;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
    }
}

const char* controller_name(ControllerKind k) {
    switch (k) {
        case ControllerKind::continuous: return "continuous";
        case ControllerKind::hybrid: return "hybrid";
        case ControllerKind::adaptive_sf: return "adaptive_sf";
        case ControllerKind::adaptive_of: return "adaptive_of";
    }
    return "hybrid";
}

ControllerKind controller_from(const std::string& s) {
    if (s == "continuous") return ControllerKind::continuous;
    if (s == "hybrid") return ControllerKind::hybrid;
    if (s == "adaptive_sf") return ControllerKind::adaptive_sf;
    if (s == "adaptive_of") return ControllerKind::adaptive_of;
    throw ConfigError("controller: unknown kind '" + s + "'");
}

const char* traj_name(TrajectorySpec::Kind k) {
    return k == TrajectorySpec::Kind::constant_omega ? "constant_omega" : "sinusoid";
}

TrajectorySpec::Kind traj_from(const std::string& s) {
    if (s == "constant_omega") return TrajectorySpec::Kind::constant_omega;
    if (s == "sinusoid") return TrajectorySpec::Kind::sinusoid;
    throw ConfigError("trajectory.kind: unknown kind '" + s + "'");
}

const char* dist_name(DisturbanceModel::Kind k) {
    switch (k) {
        case DisturbanceModel::Kind::none: return "none";
        case DisturbanceModel::Kind::constant: return "constant";
        case DisturbanceModel::Kind::random_walk: return "random_walk";
    }
    return "none";
}

DisturbanceModel::Kind dist_from(const std::string& s) {
    if (s == "none") return DisturbanceModel::Kind::none;
    if (s == "constant") return DisturbanceModel::Kind::constant;
    if (s == "random_walk") return DisturbanceModel::Kind::random_walk;
    throw ConfigError("disturbance.kind: unknown kind '" + s + "'");
}

} // namespace

std::string config_to_json(const ScenarioConfig& c) {
    json j;
    j["controller"] = controller_name(c.controller);
    j["delta"] = c.delta;
    j["inertia"] = {{"M", mat_json(c.inertia.M)}, {"m0", c.inertia.m0}};
    j["trajectory"] = {{"kind", traj_name(c.trajectory.kind)},
                       {"qd0", vec_json(c.trajectory.qd0.vec())},
                       {"omega_d0", vec_json(c.trajectory.omega_d0)},
                       {"amplitude", c.trajectory.amplitude},
                       {"frequency", c.trajectory.frequency}};
    j["noise"] = {{"n_max", c.noise.n_max}, {"sigma", c.noise.sigma}};
    j["disturbance"] = {{"kind", dist_name(c.disturbance.kind)},
                        {"p0", vec_json(c.disturbance.p0)},
                        {"sigma_w", c.disturbance.sigma_w}};
    j["q0"] = vec_json(c.q0);
    j["omega0"] = vec_json(c.omega0);
    j["h0"] = c.h0;
    j["gains_sf"] = c.gains_sf ? json{{"Lambda", mat_json(c.gains_sf->Lambda)},
                                      {"Ks", mat_json(c.gains_sf->Ks)}}
                               : json(nullptr);
    j["gains_adaptive_sf"] =
        c.gains_adaptive_sf
            ? json{{"Kd", mat_json(c.gains_adaptive_sf->Kd)},
                   {"kp", c.gains_adaptive_sf->kp},
                   {"gamma1", c.gains_adaptive_sf->gamma1},
                   {"gamma2", c.gains_adaptive_sf->gamma2},
                   {"lambda_f", c.gains_adaptive_sf->lambda_f}}
            : json(nullptr);
    j["gains_adaptive_of"] = c.gains_adaptive_of
                                 ? json{{"Kf", mat_json(c.gains_adaptive_of->Kf)},
                                        {"kv", c.gains_adaptive_of->kv},
                                        {"kp", c.gains_adaptive_of->kp},
                                        {"Gamma", mat_json(c.gains_adaptive_of->Gamma)}}
                                 : json(nullptr);
    j["theta_hat0"] = vec_json(c.theta_hat0);
    j["dt"] = c.dt;
    j["horizon"] = c.horizon;
    j["output_decimation"] = c.output_decimation;
    j["seed"] = c.seed;
    j["convergence_threshold"] = c.convergence_threshold;
    j["ybar_dot_mode"] =
        c.ybar_dot_mode == YbarDotMode::analytic ? "analytic" : "finite_difference";
    j["pe_lambda_f"] = c.pe_lambda_f;
    j["dt_internal"] = c.dt_internal;
    j["trace_estimates"] = c.trace_estimates;
    return j.dump(2) + "\n";
}

ScenarioConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j,
               {"controller", "delta", "inertia", "trajectory", "noise", "disturbance", "q0",
                "omega0", "h0", "gains_sf", "gains_adaptive_sf", "gains_adaptive_of",
                "theta_hat0", "dt", "horizon", "output_decimation", "seed",
                "convergence_threshold", "ybar_dot_mode", "pe_lambda_f", "dt_internal",
                "trace_estimates"},
               "config");

    ScenarioConfig c;
    try {
        if (j.contains("controller")) c.controller = controller_from(j["controller"]);
        if (j.contains("delta")) c.delta = j["delta"].get<double>();
        if (j.contains("inertia")) {
            const json& ji = j["inertia"];
            check_keys(ji, {"M", "m0"}, "inertia");
            Mat3 M = c.inertia.M;
            double m0 = c.inertia.m0;
            if (ji.contains("M")) M = parse_square(ji["M"], 3, "inertia.M");
            if (ji.contains("m0")) m0 = ji["m0"].get<double>();
            c.inertia = InertiaModel(M, m0);
        }
        if (j.contains("trajectory")) {
            const json& jt = j["trajectory"];
            check_keys(jt, {"kind", "qd0", "omega_d0", "amplitude", "frequency"}, "trajectory");
            if (jt.contains("kind")) c.trajectory.kind = traj_from(jt["kind"]);
            if (jt.contains("qd0"))
                c.trajectory.qd0 = UnitQuaternion(Vec4(parse_vec(jt["qd0"], 4, "trajectory.qd0")));
            if (jt.contains("omega_d0"))
                c.trajectory.omega_d0 = parse_vec(jt["omega_d0"], 3, "trajectory.omega_d0");
            if (jt.contains("amplitude")) c.trajectory.amplitude = jt["amplitude"].get<double>();
            if (jt.contains("frequency")) c.trajectory.frequency = jt["frequency"].get<double>();
        }
        if (j.contains("noise")) {
            const json& jn = j["noise"];
            check_keys(jn, {"n_max", "sigma"}, "noise");
            if (jn.contains("n_max")) c.noise.n_max = jn["n_max"].get<double>();
            if (jn.contains("sigma")) c.noise.sigma = jn["sigma"].get<double>();
        }
        if (j.contains("disturbance")) {
            const json& jd = j["disturbance"];
            check_keys(jd, {"kind", "p0", "sigma_w"}, "disturbance");
            if (jd.contains("kind")) c.disturbance.kind = dist_from(jd["kind"]);
            if (jd.contains("p0")) c.disturbance.p0 = parse_vec(jd["p0"], 3, "disturbance.p0");
            if (jd.contains("sigma_w")) c.disturbance.sigma_w = jd["sigma_w"].get<double>();
        }
        if (j.contains("q0")) c.q0 = parse_vec(j["q0"], 4, "q0");
        if (j.contains("omega0")) c.omega0 = parse_vec(j["omega0"], 3, "omega0");
        if (j.contains("h0")) c.h0 = j["h0"].get<int>();
        if (j.contains("gains_sf") && !j["gains_sf"].is_null()) {
            const json& jg = j["gains_sf"];
            check_keys(jg, {"Lambda", "Ks"}, "gains_sf");
            c.gains_sf.emplace(Mat4(parse_square(jg.at("Lambda"), 4, "gains_sf.Lambda")),
                               Mat4(parse_square(jg.at("Ks"), 4, "gains_sf.Ks")));
        }
        if (j.contains("gains_adaptive_sf") && !j["gains_adaptive_sf"].is_null()) {
            const json& jg = j["gains_adaptive_sf"];
            check_keys(jg, {"Kd", "kp", "gamma1", "gamma2", "lambda_f"}, "gains_adaptive_sf");
            c.gains_adaptive_sf.emplace(
                Mat4(parse_square(jg.at("Kd"), 4, "gains_adaptive_sf.Kd")),
                jg.at("kp").get<double>(), jg.at("gamma1").get<double>(),
                jg.at("gamma2").get<double>(), jg.at("lambda_f").get<double>());
        }
        if (j.contains("gains_adaptive_of") && !j["gains_adaptive_of"].is_null()) {
            const json& jg = j["gains_adaptive_of"];
            check_keys(jg, {"Kf", "kv", "kp", "Gamma"}, "gains_adaptive_of");
            c.gains_adaptive_of.emplace(
                Mat4(parse_square(jg.at("Kf"), 4, "gains_adaptive_of.Kf")),
                jg.at("kv").get<double>(), jg.at("kp").get<double>(),
                Mat9(parse_square(jg.at("Gamma"), 9, "gains_adaptive_of.Gamma")));
        }
        if (j.contains("theta_hat0")) c.theta_hat0 = parse_vec(j["theta_hat0"], 9, "theta_hat0");
        if (j.contains("dt")) c.dt = j["dt"].get<double>();
        if (j.contains("horizon")) c.horizon = j["horizon"].get<double>();
        if (j.contains("output_decimation"))
            c.output_decimation = j["output_decimation"].get<int>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("convergence_threshold"))
            c.convergence_threshold = j["convergence_threshold"].get<double>();
        if (j.contains("ybar_dot_mode")) {
            const std::string m = j["ybar_dot_mode"];
            if (m == "analytic") {
                c.ybar_dot_mode = YbarDotMode::analytic;
            } else if (m == "finite_difference") {
                c.ybar_dot_mode = YbarDotMode::finite_difference;
            } else {
                throw ConfigError("ybar_dot_mode: unknown mode '" + m + "'");
            }
        }
        if (j.contains("pe_lambda_f")) c.pe_lambda_f = j["pe_lambda_f"].get<double>();
        if (j.contains("dt_internal")) c.dt_internal = j["dt_internal"].get<double>();
        if (j.contains("trace_estimates")) c.trace_estimates = j["trace_estimates"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config value error: ") + e.what());
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

} // namespace quatlag
