#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quatlag/rigid_dynamics.hpp"

namespace quatlag {

/// One verification row: a sampled identity with its worst residual.
struct VerifyRow {
    std::string name;
    int samples = 0;
    double max_residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    bool all_pass = false;
    double elapsed_seconds = 0.0;
};

/// Runs every sampled identity suite over the kinematic operators and the
/// dynamics terms with a seeded deterministic RNG. `samples` must be >= 100
/// (throws ConfigError below that). The default inertia is the benchmark
/// model diag(10, 20, 30)/sqrt(14) with m0 = 1.
VerifyReport run_verification(int samples, std::uint64_t seed);
VerifyReport run_verification(int samples, std::uint64_t seed, const InertiaModel& inertia);

/// Benchmark inertia used across presets and verification.
InertiaModel benchmark_inertia();

} // namespace quatlag
