#include "doctest.h"

#include "quatlag/config.hpp"
#include "quatlag/io.hpp"
#include "quatlag/verify.hpp"

#include "json.hpp"

#include <cmath>

using namespace quatlag;

TEST_CASE("serialization round-trips through the canonical form") {
    ScenarioConfig cfg = preset("2.3");
    cfg.seed = 998877665544332211ULL; // exercise the full uint64 range
    cfg.theta_hat0[4] = -0.125;
    const std::string once = config_to_json(cfg);
    const std::string twice = config_to_json(config_from_json(once));
    CHECK(once == twice);
    CHECK(config_from_json(once).seed == 998877665544332211ULL);
}

TEST_CASE("every preset survives a dump-parse-dump cycle") {
    for (const std::string& name : preset_names()) {
        const std::string once = config_to_json(preset(name));
        CHECK(config_to_json(config_from_json(once)) == once);
    }
}

TEST_CASE("presets pin the published scenario settings") {
    CHECK(preset_names().size() == 6);

    const ScenarioConfig s11 = preset("1.1");
    CHECK(s11.controller == ControllerKind::hybrid);
    CHECK(s11.delta == 0.4);
    CHECK(s11.h0 == +1);
    CHECK(s11.noise.n_max == 0.0);
    CHECK(s11.q0[0] == 0.0); // starts a half-turn away from the target
    CHECK(s11.omega0.norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s11.inertia.m0 == 1.0);
    REQUIRE(s11.gains_sf.has_value());
    CHECK((s11.gains_sf->Lambda - 0.1 * Mat4::Identity()).norm() == 0.0);
    CHECK((s11.gains_sf->Ks - Mat4::Identity()).norm() == 0.0);
    CHECK((s11.inertia.M - benchmark_inertia().M).norm() < 1e-15);

    const ScenarioConfig s12 = preset("1.2");
    CHECK(s12.omega0.norm() == 0.0);
    CHECK(s12.noise.n_max == 0.1);
    CHECK(s12.seed != s11.seed);

    const ScenarioConfig s21 = preset("2.1");
    CHECK(s21.controller == ControllerKind::adaptive_of);
    CHECK(s21.delta == 0.9);
    CHECK(s21.trajectory.kind == TrajectorySpec::Kind::sinusoid);
    CHECK(s21.trajectory.amplitude == 0.1);
    CHECK(s21.trajectory.frequency == 0.62831853071795865); // 0.2 pi
    CHECK((s21.q0 - Vec4(0, 0, 1, 0)).norm() == 0.0);
    REQUIRE(s21.gains_adaptive_of.has_value());
    CHECK(s21.gains_adaptive_of->kv == 3.0);
    CHECK(s21.gains_adaptive_of->kp == 0.7);
    CHECK((s21.gains_adaptive_of->Kf - 0.1 * Mat4::Identity()).norm() == 0.0);
    CHECK(s21.gains_adaptive_of->Gamma(0, 0) == 1000.0);
    CHECK(s21.gains_adaptive_of->Gamma(8, 8) == 1.0);
    CHECK(s21.disturbance.kind == DisturbanceModel::Kind::constant);
    CHECK((s21.disturbance.p0 - Vec3(0.2, -0.1, -0.05)).norm() == 0.0);

    CHECK(preset("2.2").delta == 0.4);
    CHECK(preset("2.3").noise.n_max == 0.1);
    CHECK(preset("2.4").disturbance.kind == DisturbanceModel::Kind::random_walk);
    CHECK(preset("2.4").disturbance.sigma_w == 0.2);

    CHECK_THROWS_AS(preset("3.1"), ConfigError);
    CHECK_THROWS_AS(preset(""), ConfigError);
}

TEST_CASE("unknown keys are rejected instead of silently ignored") {
    nlohmann::json j = nlohmann::json::parse(config_to_json(preset("1.1")));
    j["typo_key"] = 1;
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);

    j.erase("typo_key");
    j["noise"]["n_mxa"] = 0.1;
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);

    CHECK_THROWS_AS(config_from_json("{ not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("omitted keys fall back to scenario defaults") {
    const ScenarioConfig cfg = config_from_json(R"({"controller": "continuous",
        "gains_sf": {"Lambda": 0.1, "Ks": 1.0}})");
    CHECK(cfg.controller == ControllerKind::continuous);
    CHECK(cfg.dt == 1e-3);
    CHECK(cfg.horizon == 100.0);
    CHECK(cfg.output_decimation == 10);
    CHECK(cfg.seed == 12345);
    CHECK(cfg.delta == 0.4);
    CHECK((cfg.q0 - Vec4(1, 0, 0, 0)).norm() == 0.0);
    REQUIRE(cfg.gains_sf.has_value());
    // scalar gain entries expand to multiples of the identity
    CHECK((cfg.gains_sf->Lambda - 0.1 * Mat4::Identity()).norm() == 0.0);
    CHECK((cfg.gains_sf->Ks - Mat4::Identity()).norm() == 0.0);
}

TEST_CASE("gain matrices parse from scalars, diagonals, and full matrices") {
    nlohmann::json j = nlohmann::json::parse(config_to_json(preset("2.1")));
    j["gains_adaptive_of"]["Gamma"] = {1000.0, 1000.0, 1000.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    ScenarioConfig cfg = config_from_json(j.dump());
    CHECK((cfg.gains_adaptive_of->Gamma - preset("2.1").gains_adaptive_of->Gamma).norm() == 0.0);

    // full nested matrix with off-diagonal structure
    j["gains_adaptive_of"]["Kf"] = {{0.2, 0.05, 0.0, 0.0},
                                    {0.05, 0.2, 0.0, 0.0},
                                    {0.0, 0.0, 0.2, 0.0},
                                    {0.0, 0.0, 0.0, 0.2}};
    cfg = config_from_json(j.dump());
    CHECK(cfg.gains_adaptive_of->Kf(0, 1) == 0.05);
    CHECK(cfg.gains_adaptive_of->Kf(1, 0) == 0.05);

    // gain validation still applies on the parse path
    j["gains_adaptive_of"]["Kf"] = -0.1;
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);
}

TEST_CASE("malformed vectors and enums are rejected") {
    nlohmann::json j = nlohmann::json::parse(config_to_json(preset("1.1")));
    j["q0"] = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);

    j = nlohmann::json::parse(config_to_json(preset("1.1")));
    j["controller"] = "bang_bang";
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);

    j = nlohmann::json::parse(config_to_json(preset("1.1")));
    j["trajectory"]["kind"] = "spiral";
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);

    j = nlohmann::json::parse(config_to_json(preset("2.4")));
    j["disturbance"]["kind"] = "sometimes";
    CHECK_THROWS_AS(config_from_json(j.dump()), ConfigError);
}

TEST_CASE("metrics sidecar embeds the resolved configuration") {
    const ScenarioConfig cfg = preset("1.1");
    Metrics m;
    m.energy_final = 2.5;
    m.convergence_time = 12.25;
    m.jump_count = 1;
    m.unwinding_flag = false;
    m.theta_err_final = 0.0;

    const nlohmann::json j = nlohmann::json::parse(metrics_to_json(m, cfg, 0.125));
    CHECK(j.at("energy_final").get<double>() == 2.5);
    CHECK(j.at("convergence_time").get<double>() == 12.25);
    CHECK(j.at("jump_count").get<int>() == 1);
    CHECK(j.at("unwinding_flag").get<bool>() == false);
    CHECK(j.at("pe_metric").get<double>() == 0.125);
    CHECK(config_to_json(config_from_json(j.at("config").dump())) == config_to_json(cfg));

    // convergence_time and pe_metric fall back to null
    Metrics never;
    const nlohmann::json j2 = nlohmann::json::parse(metrics_to_json(never, cfg));
    CHECK(j2.at("convergence_time").is_null());
    CHECK(j2.at("pe_metric").is_null());
}

TEST_CASE("csv writer emits the fixed header and one row per record") {
    std::vector<SimRecord> recs(3);
    recs[0].t = 0.0;
    recs[1].t = 0.1;
    recs[2].t = 0.2;
    recs[2].h = -1;
    recs[2].tau = Vec3(0.25, -0.5, 1.0 / 3.0);
    const std::string csv = records_to_csv(recs);

    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header ==
          "t,q0,q1,q2,q3,w1,w2,w3,h,e_norm,eps0,nu_norm,eta_norm,theta_err_norm,"
          "tau1,tau2,tau3,energy,V_lyap");

    std::size_t rows = 0;
    for (char c : csv) rows += (c == '\n') ? 1 : 0;
    CHECK(rows == 4); // header + 3 records, trailing newline on each

    // 17 significant digits keep exact doubles exact
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    CHECK(csv.find(",-1,") != std::string::npos);
}

TEST_CASE("metrics sidecar path replaces the csv extension") {
    CHECK(metrics_path_for("out/run.csv") == "out/run.metrics.json");
    CHECK(metrics_path_for("plain") == "plain.metrics.json");
}
