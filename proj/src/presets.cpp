#include <cmath>
#include <string>
#include <vector>

#include "quatlag/config.hpp"
#include "quatlag/errors.hpp"
#include "quatlag/verify.hpp"

namespace quatlag {

namespace {

Vec3 axis_u() { return Vec3(1.0, 2.0, 3.0) / std::sqrt(14.0); }

// Rest-to-rest regulation about a fixed setpoint, state feedback.
ScenarioConfig scenario_one() {
    ScenarioConfig c;
    c.controller = ControllerKind::hybrid;
    c.inertia = benchmark_inertia();
    c.trajectory.kind = TrajectorySpec::Kind::constant_omega;
    c.trajectory.qd0 = UnitQuaternion();
    c.trajectory.omega_d0 = Vec3::Zero();
    c.q0 << 0.0, axis_u();
    c.omega0 = Vec3::Zero();
    c.h0 = +1;
    c.gains_sf = GainsStateFeedback::diag(0.1, 1.0);
    c.dt = 1e-3;
    c.horizon = 100.0;
    c.output_decimation = 10;
    return c;
}

// Sinusoidal rate tracking under a torque disturbance, attitude feedback.
ScenarioConfig scenario_two() {
    ScenarioConfig c;
    c.controller = ControllerKind::adaptive_of;
    c.inertia = benchmark_inertia();
    c.trajectory.kind = TrajectorySpec::Kind::sinusoid;
    c.trajectory.qd0 = UnitQuaternion();
    c.trajectory.amplitude = 0.1;
    c.trajectory.frequency = 0.62831853071795865;
    c.q0 << 0.0, 0.0, 1.0, 0.0;
    c.omega0 = axis_u();
    c.h0 = +1;
    Mat9 gamma = Mat9::Identity();
    gamma.topLeftCorner<3, 3>() *= 1000.0;
    c.gains_adaptive_of.emplace(Mat4(0.1 * Mat4::Identity()), 3.0, 0.7, gamma);
    c.disturbance.kind = DisturbanceModel::Kind::constant;
    c.disturbance.p0 = Vec3(0.2, -0.1, -0.05);
    c.dt = 1e-3;
    c.horizon = 100.0;
    c.output_decimation = 10;
    return c;
}

} // namespace

ScenarioConfig preset(const std::string& name) {
    if (name == "1.1") {
        ScenarioConfig c = scenario_one();
        c.delta = 0.4;
        c.omega0 = 0.5 * axis_u();
        c.seed = 11;
        return c;
    }
    if (name == "1.2") {
        ScenarioConfig c = scenario_one();
        c.delta = 0.4;
        c.noise.n_max = 0.1;
        c.seed = 12;
        return c;
    }
    if (name == "2.1") {
        ScenarioConfig c = scenario_two();
        c.delta = 0.9;
        c.seed = 21;
        return c;
    }
    if (name == "2.2") {
        ScenarioConfig c = scenario_two();
        c.delta = 0.4;
        c.seed = 22;
        return c;
    }
    if (name == "2.3") {
        ScenarioConfig c = scenario_two();
        c.delta = 0.4;
        c.noise.n_max = 0.1;
        c.seed = 23;
        return c;
    }
    if (name == "2.4") {
        ScenarioConfig c = scenario_two();
        c.delta = 0.4;
        c.disturbance.kind = DisturbanceModel::Kind::random_walk;
        c.disturbance.sigma_w = 0.2;
        c.seed = 24;
        return c;
    }
    throw ConfigError("unknown preset '" + name + "' (available: 1.1 1.2 2.1 2.2 2.3 2.4)");
}

std::vector<std::string> preset_names() {
    return {"1.1", "1.2", "2.1", "2.2", "2.3", "2.4"};
}

} // namespace quatlag
