#include "doctest.h"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

// End-to-end checks against the installed binary. CTest exports QUATLAG_BIN;
// when it is absent (running the test executable by hand) the cases no-op.

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

const char* binary() { return std::getenv("QUATLAG_BIN"); }

CliResult run_cli(const std::string& args) {
    CliResult res;
    const std::string cmd = std::string("\"") + binary() + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    for (;;) {
        const std::size_t n = std::fread(buf, 1, sizeof(buf), pipe);
        if (n == 0) break;
        res.output.append(buf, n);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::path("cli_scratch");
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

#define REQUIRE_BINARY() \
    if (!binary()) {     \
        return;          \
    }

} // namespace

TEST_CASE("cli rejects calls without a scenario source") {
    REQUIRE_BINARY();
    CHECK(run_cli("run").exit_code == 2);
    CHECK(run_cli("run --preset nope").exit_code == 2);
    CHECK(run_cli("run --preset 1.1 --config also.json").exit_code == 2);
    CHECK(run_cli("bogus-subcommand").exit_code == 2);
}

TEST_CASE("cli help exits cleanly") {
    REQUIRE_BINARY();
    const CliResult res = run_cli("--help");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("run") != std::string::npos);
    CHECK(res.output.find("verify") != std::string::npos);
    CHECK(res.output.find("check-gains") != std::string::npos);
    CHECK(res.output.find("sweep") != std::string::npos);
}

TEST_CASE("dump-config round-trips a preset through the parser") {
    REQUIRE_BINARY();
    const CliResult first = run_cli("run --preset 2.3 --dump-config -");
    CHECK(first.exit_code == 0);
    CHECK_NOTHROW(nlohmann::json::parse(first.output));

    const auto cfg_path = scratch_dir() / "echo.json";
    write_file(cfg_path, first.output);
    const CliResult second = run_cli("run --config " + cfg_path.string() + " --dump-config -");
    CHECK(second.exit_code == 0);
    CHECK(second.output == first.output);
}

TEST_CASE("verification suite passes and fault injection trips it") {
    REQUIRE_BINARY();
    const CliResult good = run_cli("verify --samples 150 --seed 7");
    CHECK(good.exit_code == 0);
    CHECK(good.output.find("all passing") != std::string::npos);

    const CliResult json = run_cli("verify --samples 150 --seed 7 --json");
    CHECK(json.exit_code == 0);
    const nlohmann::json rep = nlohmann::json::parse(json.output);
    CHECK(rep.at("all_pass").get<bool>());

    const CliResult bad = run_cli("verify --samples 150 --seed 7 --corrupt-c-sign");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("run writes csv plus metrics sidecar and repeats byte-identically") {
    REQUIRE_BINARY();
    // shortened horizon: the full preset runs 100 s, overkill for an IO check
    const CliResult dumped = run_cli("run --preset 1.2 --dump-config -");
    REQUIRE(dumped.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(dumped.output);
    j["horizon"] = 5.0;
    const auto cfg_path = scratch_dir() / "short12.json";
    write_file(cfg_path, j.dump());

    const auto csv_a = scratch_dir() / "a.csv";
    const auto csv_b = scratch_dir() / "b.csv";
    const CliResult ra =
        run_cli("run --config " + cfg_path.string() + " --out " + csv_a.string());
    CHECK(ra.exit_code == 0);
    CHECK(ra.output.find("wrote") != std::string::npos);
    const CliResult rb =
        run_cli("run --config " + cfg_path.string() + " --out " + csv_b.string());
    CHECK(rb.exit_code == 0);

    const std::string a = read_file(csv_a);
    CHECK(a == read_file(csv_b));
    CHECK(a.rfind("t,q0,", 0) == 0);

    const nlohmann::json m = nlohmann::json::parse(read_file(scratch_dir() / "a.metrics.json"));
    CHECK(m.contains("energy_final"));
    CHECK(m.contains("config"));
    CHECK(m.at("config").at("horizon").get<double>() == 5.0);
}

TEST_CASE("run without --out prints the metrics document") {
    REQUIRE_BINARY();
    const CliResult dumped = run_cli("run --preset 1.1 --dump-config -");
    REQUIRE(dumped.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(dumped.output);
    j["horizon"] = 2.0;
    const auto cfg_path = scratch_dir() / "short11.json";
    write_file(cfg_path, j.dump());

    const CliResult res = run_cli("run --config " + cfg_path.string());
    CHECK(res.exit_code == 0);
    const std::size_t brace = res.output.find('{');
    REQUIRE(brace != std::string::npos);
    // the human summary line follows the JSON document
    const std::size_t end = res.output.rfind('}');
    const nlohmann::json m = nlohmann::json::parse(res.output.substr(brace, end - brace + 1));
    CHECK(m.contains("jump_count"));
}

TEST_CASE("malformed config files exit with the config error code") {
    REQUIRE_BINARY();
    const auto bad_path = scratch_dir() / "bad.json";
    write_file(bad_path, "{\"controller\": \"continuous\", \"unknown_key\": 3}");
    CHECK(run_cli("run --config " + bad_path.string()).exit_code == 2);
    CHECK(run_cli("run --config /does/not/exist.json").exit_code == 2);
}

TEST_CASE("check-gains reports a verdict in both output modes") {
    REQUIRE_BINARY();
    const CliResult human = run_cli("check-gains --preset 2.1 --samples 2000");
    CHECK(human.exit_code == 0);
    CHECK(human.output.find("threshold") != std::string::npos);

    const CliResult json = run_cli("check-gains --preset 2.1 --samples 2000 --json");
    CHECK(json.exit_code == 0);
    const nlohmann::json rep = nlohmann::json::parse(json.output);
    CHECK(rep.contains("pass"));
    CHECK(rep.contains("threshold"));
    CHECK(rep.contains("margin"));

    // strict mode turns the verdict into the exit code
    const CliResult strict = run_cli("check-gains --preset 2.1 --samples 2000 --strict");
    CHECK(strict.exit_code == (rep.at("pass").get<bool>() ? 0 : 1));

    // gain checks only exist for the adaptive controllers
    CHECK(run_cli("check-gains --preset 1.1 --samples 2000").exit_code == 2);
}

TEST_CASE("sweep fans out over values and aggregates metrics") {
    REQUIRE_BINARY();
    const CliResult dumped = run_cli("run --preset 1.1 --dump-config -");
    REQUIRE(dumped.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(dumped.output);
    j["horizon"] = 2.0;
    const auto cfg_path = scratch_dir() / "sweep_base.json";
    write_file(cfg_path, j.dump());

    const auto out_dir = scratch_dir() / "sweep_out";
    std::filesystem::remove_all(out_dir);
    const CliResult res = run_cli("sweep --config " + cfg_path.string() +
                                  " --param delta --values 0.2,0.6 --seeds 2 --out " +
                                  out_dir.string());
    CHECK(res.exit_code == 0);

    const nlohmann::json agg = nlohmann::json::parse(read_file(out_dir / "aggregate.json"));
    CHECK(agg.at("param").get<std::string>() == "delta");
    CHECK(agg.at("replicates").get<int>() == 2);
    CHECK(agg.at("runs").size() == 4);
    CHECK(agg.at("values").size() == 2);
    for (int i = 0; i < 4; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "run_%03d.csv", i);
        CHECK(std::filesystem::exists(out_dir / name));
    }

    // a bogus parameter path must fail before any files are written
    std::filesystem::remove_all(out_dir);
    const CliResult bad = run_cli("sweep --config " + cfg_path.string() +
                                  " --param no.such.key --values 1 --out " + out_dir.string());
    CHECK(bad.exit_code == 2);
    CHECK(!std::filesystem::exists(out_dir));
}

TEST_CASE("nested sweep parameters reach through the config tree") {
    REQUIRE_BINARY();
    const CliResult dumped = run_cli("run --preset 1.1 --dump-config -");
    REQUIRE(dumped.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(dumped.output);
    j["horizon"] = 1.0;
    const auto cfg_path = scratch_dir() / "sweep_nested.json";
    write_file(cfg_path, j.dump());

    const auto out_dir = scratch_dir() / "sweep_nested_out";
    std::filesystem::remove_all(out_dir);
    const CliResult res = run_cli("sweep --config " + cfg_path.string() +
                                  " --param noise.n_max --values 0.0,0.05 --out " +
                                  out_dir.string());
    CHECK(res.exit_code == 0);
    const nlohmann::json agg = nlohmann::json::parse(read_file(out_dir / "aggregate.json"));
    CHECK(agg.at("values").size() == 2);
    CHECK(agg.at("values")[1].at("value").get<double>() == 0.05);
}
