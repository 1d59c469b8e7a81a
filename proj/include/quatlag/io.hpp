#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quatlag/simulation.hpp"

namespace quatlag {

/// CSV rows with 17 significant digits under the fixed header
/// t,q0,q1,q2,q3,w1,w2,w3,h,e_norm,eps0,nu_norm,eta_norm,theta_err_norm,
/// tau1,tau2,tau3,energy,V_lyap
std::string records_to_csv(const std::vector<SimRecord>& records);
void write_csv(const std::string& path, const std::vector<SimRecord>& records);

/// Metrics sidecar JSON; embeds the resolved config for reproducibility.
/// pe_metric is included when provided (null otherwise).
std::string metrics_to_json(const Metrics& m, const ScenarioConfig& config,
                            std::optional<double> pe = std::nullopt);
void write_metrics(const std::string& path, const Metrics& m, const ScenarioConfig& config,
                   std::optional<double> pe = std::nullopt);

/// Sidecar path for a CSV output: replaces a trailing ".csv" with
/// ".metrics.json" (appends when the extension differs).
std::string metrics_path_for(const std::string& csv_path);

} // namespace quatlag
