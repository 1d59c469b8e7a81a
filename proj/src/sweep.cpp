#include "sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "json.hpp"

#include "quatlag/config.hpp"
#include "quatlag/errors.hpp"
#include "quatlag/io.hpp"
#include "quatlag/rng.hpp"
#include "quatlag/simulation.hpp"

namespace quatlag::cli {

namespace {

using nlohmann::json;

struct RunSlot {
    ScenarioConfig config;
    json value;
    int value_index = 0;
    std::string csv_path;
    bool ok = false;
    bool config_fault = false;
    std::string error;
    Metrics m;
    std::optional<double> pe;
};

unsigned thread_budget(std::size_t runs) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("QUATLAG_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = static_cast<unsigned>(v);
    }
    if (runs < n) n = static_cast<unsigned>(runs);
    return n == 0 ? 1 : n;
}

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return json(text); // bare word: treat as a string literal
    }
}

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

Stats stats_of(const std::vector<double>& xs) {
    Stats s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size()));
    return s;
}

json stats_json(const Stats& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
}

json group_stats(const std::vector<const RunSlot*>& slots) {
    std::vector<double> energy, conv, jumps;
    for (const RunSlot* r : slots) {
        if (!r->ok) continue;
        energy.push_back(r->m.energy_final);
        jumps.push_back(static_cast<double>(r->m.jump_count));
        if (r->m.convergence_time) conv.push_back(*r->m.convergence_time);
    }
    return json{{"energy_final", stats_json(stats_of(energy))},
                {"convergence_time", stats_json(stats_of(conv))},
                {"jump_count", stats_json(stats_of(jumps))}};
}

} // namespace

int run_sweep(const SweepOptions& opts) {
    json base;
    std::vector<RunSlot> slots;
    try {
        base = json::parse(opts.base_config_json);
        if (opts.param.empty()) throw ConfigError("sweep: --param is required");
        if (opts.values.empty()) throw ConfigError("sweep: --values is required");
        if (opts.replicates < 1) throw ConfigError("sweep: --seeds must be >= 1");

        std::string ptr_text = "/" + opts.param;
        for (char& ch : ptr_text) {
            if (ch == '.') ch = '/';
        }
        const json::json_pointer ptr(ptr_text);

        // Resolve every run up front so a bad parameter path or value fails
        // before anything is written. A path that misses the schema shows up
        // as an unknown key in the strict parser.
        int index = 0;
        for (std::size_t vi = 0; vi < opts.values.size(); ++vi) {
            const json value = parse_value(opts.values[vi]);
            json patched = base;
            patched[ptr] = value;
            for (int rep = 0; rep < opts.replicates; ++rep, ++index) {
                RunSlot slot;
                slot.config = config_from_json(patched.dump());
                slot.config.seed = Rng::derive(opts.base_seed, static_cast<std::uint64_t>(index));
                slot.config.validate();
                slot.value = value;
                slot.value_index = static_cast<int>(vi);
                char name[64];
                std::snprintf(name, sizeof name, "run_%03d.csv", index);
                slot.csv_path = (std::filesystem::path(opts.out_dir) / name).string();
                slots.push_back(std::move(slot));
            }
        }
        std::filesystem::create_directories(opts.out_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= slots.size()) return;
            RunSlot& slot = slots[i];
            try {
                const RunResult res = run(slot.config);
                const DesiredTrajectory traj(slot.config.trajectory, slot.config.dt_internal);
                slot.m = metrics(res.records, slot.config.convergence_threshold, &traj);
                try {
                    slot.pe = pe_metric(res.yf_history, 10.0,
                                        slot.config.dt * slot.config.output_decimation);
                } catch (const InsufficientHistory&) {
                }
                write_csv(slot.csv_path, res.records);
                write_metrics(metrics_path_for(slot.csv_path), slot.m, slot.config, slot.pe);
                slot.ok = true;
            } catch (const ConfigError& e) {
                slot.config_fault = true;
                slot.error = e.what();
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    const unsigned n_threads = thread_budget(slots.size());
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    json runs = json::array();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const RunSlot& r = slots[i];
        json entry{{"index", static_cast<int>(i)},
                   {"value", r.value},
                   {"seed", r.config.seed},
                   {"csv", r.csv_path},
                   {"ok", r.ok}};
        if (r.ok) {
            entry["energy_final"] = r.m.energy_final;
            entry["convergence_time"] =
                r.m.convergence_time ? json(*r.m.convergence_time) : json(nullptr);
            entry["jump_count"] = r.m.jump_count;
            entry["unwinding_flag"] = r.m.unwinding_flag;
            entry["theta_err_final"] = r.m.theta_err_final;
            entry["pe_metric"] = r.pe ? json(*r.pe) : json(nullptr);
        } else {
            entry["error"] = r.error;
        }
        runs.push_back(std::move(entry));
    }

    json values = json::array();
    for (std::size_t vi = 0; vi < opts.values.size(); ++vi) {
        std::vector<const RunSlot*> group;
        for (const RunSlot& r : slots) {
            if (r.value_index == static_cast<int>(vi)) group.push_back(&r);
        }
        values.push_back(json{{"value", group.empty() ? json(nullptr) : group.front()->value},
                              {"stats", group_stats(group)}});
    }
    std::vector<const RunSlot*> all;
    for (const RunSlot& r : slots) all.push_back(&r);

    json agg{{"param", opts.param},
             {"base_seed", opts.base_seed},
             {"replicates", opts.replicates},
             {"runs", runs},
             {"values", values},
             {"overall", group_stats(all)}};

    const std::string agg_path = (std::filesystem::path(opts.out_dir) / "aggregate.json").string();
    std::ofstream out(agg_path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "error: cannot write %s\n", agg_path.c_str());
        return 2;
    }
    out << agg.dump(2) << "\n";
    out.close();

    std::size_t failures = 0;
    bool config_fault = false;
    for (const RunSlot& r : slots) {
        if (!r.ok) {
            ++failures;
            config_fault = config_fault || r.config_fault;
            std::fprintf(stderr, "run %s failed: %s\n", r.csv_path.c_str(), r.error.c_str());
        }
    }
    std::printf("sweep: %zu/%zu runs ok, results in %s\n", slots.size() - failures, slots.size(),
                opts.out_dir.c_str());
    if (failures == 0) return 0;
    return config_fault ? 2 : 3;
}

} // namespace quatlag::cli
