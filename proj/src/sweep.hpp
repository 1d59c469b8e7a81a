#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace quatlag::cli {

struct SweepOptions {
    std::string base_config_json; // canonical resolved scenario
    std::string param;            // dotted path into the config JSON
    std::vector<std::string> values;
    int replicates = 1;
    std::string out_dir = "sweep_out";
    std::uint64_t base_seed = 12345;
};

// Fans the runs out over a thread pool (capped by QUATLAG_THREADS), writes
// per-run CSV + metrics plus aggregate.json into out_dir. Returns a process
// exit code: 0 ok, 2 config error, 3 runtime failure.
int run_sweep(const SweepOptions& opts);

} // namespace quatlag::cli
