#include "quatlag/io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "quatlag/config.hpp"
#include "quatlag/errors.hpp"

namespace quatlag {

namespace {

constexpr const char* kHeader =
    "t,q0,q1,q2,q3,w1,w2,w3,h,e_norm,eps0,nu_norm,eta_norm,theta_err_norm,"
    "tau1,tau2,tau3,energy,V_lyap";

} // namespace

std::string records_to_csv(const std::vector<SimRecord>& records) {
    std::string out(kHeader);
    out += "\n";
    char buf[768];
    for (const SimRecord& r : records) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,"
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t, r.q[0], r.q[1], r.q[2], r.q[3], r.omega[0], r.omega[1], r.omega[2],
                      r.h, r.e_norm, r.eps0, r.nu_norm, r.eta_norm, r.theta_err_norm, r.tau[0],
                      r.tau[1], r.tau[2], r.energy, r.V_lyap);
        out += buf;
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<SimRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << records_to_csv(records);
    if (!out) throw ConfigError("write failed: " + path);
}

std::string metrics_to_json(const Metrics& m, const ScenarioConfig& config,
                            std::optional<double> pe) {
    nlohmann::json j;
    j["energy_final"] = m.energy_final;
    j["convergence_time"] =
        m.convergence_time ? nlohmann::json(*m.convergence_time) : nlohmann::json(nullptr);
    j["jump_count"] = m.jump_count;
    j["unwinding_flag"] = m.unwinding_flag;
    j["theta_err_final"] = m.theta_err_final;
    j["pe_metric"] = pe ? nlohmann::json(*pe) : nlohmann::json(nullptr);
    j["config"] = nlohmann::json::parse(config_to_json(config));
    return j.dump(2) + "\n";
}

void write_metrics(const std::string& path, const Metrics& m, const ScenarioConfig& config,
                   std::optional<double> pe) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << metrics_to_json(m, config, pe);
    if (!out) throw ConfigError("write failed: " + path);
}

std::string metrics_path_for(const std::string& csv_path) {
    const std::string ext = ".csv";
    if (csv_path.size() > ext.size() &&
        csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
        return csv_path.substr(0, csv_path.size() - ext.size()) + ".metrics.json";
    }
    return csv_path + ".metrics.json";
}

} // namespace quatlag
