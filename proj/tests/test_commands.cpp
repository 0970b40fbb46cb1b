// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <doctest.h>

#include "giniflow/commands.hpp"
#include "giniflow/density.hpp"
#include "giniflow/io.hpp"
#include "giniflow/verify.hpp"

using namespace giniflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.n_cells = 200;
    c.abm_n_agents = 500;
    c.abm_n_seeds = 2;
    c.abm_T = 1.0;
    c.pde_T = 1.0;
    c.pde_snapshot_every = 5;
    c.transport_trials = 5;
    c.fourth_moment_paths = 2;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("every subcommand writes a manifest and a report") {
    TempDir t("giniflow-test-commands");
    const auto cfg = small_config();
    const auto rho_path = (t.path / "rho.csv").string();
    const auto target_path = (t.path / "target.csv").string();
    write_density_csv(rho_path, exponential_density(make_grid(cfg)));
    write_density_csv(target_path, bump_density(make_grid(cfg), 1.0, 0.25));

    const auto pde_dir = (t.path / "solve-pde").string();
    run_command("solve-pde", cfg, json::object(), pde_dir);

    const std::pair<const char*, json> cases[] = {
        {"simulate-abm", json::object()},
        {"gini", {{"density", rho_path}}},
        {"metric-norm", {{"density", rho_path}, {"target", target_path}, {"weight", "rho"}}},
        {"metric-verify-flow", {{"trajectory", (fs::path(pde_dir) / "snapshots").string()}}},
        {"metric-inequalities", json::object()},
        {"metric-fourth-moment", json::object()},
        {"potentiality", {{"operator", "yard-sale-w2"}}},
        {"potentiality", {{"operator", "gini"}}},
    };
    for (const auto& [cmd, args] : cases) {
        CAPTURE(cmd);
        const auto dir = t.path / (std::string(cmd) + "-" + args.value("operator", "x"));
        const auto r = run_command(cmd, cfg, args, dir.string());
        CHECK(r.report["command"] == cmd);
        CHECK(r.report.contains("config"));
        CHECK(r.report["results"].is_array());
        CHECK(r.report["pass"].is_boolean());
        const auto m = read_json((dir / "manifest.json").string());
        CHECK(m["manifest_version"] == 1);
        CHECK(m["command"] == cmd);
        CHECK(m["seed"] == cfg.seed);
        CHECK(m["version"] == kVersion);
        CHECK(m.contains("start_time"));
        CHECK(m.contains("end_time"));
        CHECK(m.contains("simd_backend"));
        CHECK(m["args"] == args);
    }
    CHECK(fs::exists(fs::path(pde_dir) / "trajectory.csv"));
    CHECK(fs::exists(fs::path(pde_dir) / "snapshots" / "index.csv"));
    CHECK_THROWS(run_command("metric-norm", cfg, json::object(), (t.path / "bad").string()));
    CHECK_THROWS(run_command("launch", cfg, json::object(), (t.path / "bad").string()));
}

TEST_CASE("rerunning a manifest reproduces the CSVs bit for bit") {
    TempDir t("giniflow-test-rerun");
    const auto cfg = small_config();
    for (const char* cmd : {"solve-pde", "simulate-abm"}) {
        const auto a = t.path / (std::string(cmd) + "-a");
        const auto b = t.path / (std::string(cmd) + "-b");
        run_command(cmd, cfg, json::object(), a.string());
        rerun_manifest((a / "manifest.json").string(), b.string());
        std::size_t n = 0;
        for (const auto& e : fs::recursive_directory_iterator(a)) {
            if (e.path().extension() != ".csv") continue;
            ++n;
            CHECK(slurp(e.path()) == slurp(b / fs::relative(e.path(), a)));
        }
        CHECK(n > 0);
    }
}

TEST_CASE("verify suite reports a forced stability failure") {
    auto cfg = small_config();
    cfg.pde_dt = 0.5;
    VerifySuite suite(cfg);
    const auto r = suite.run(1);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.expected_failure);
    CHECK(r.reason.find("criterion 1") != std::string::npos);
    CHECK(r.reason.find("stability") != std::string::npos);
    CHECK(status(r) == "FAIL");
}

TEST_CASE("verify suite checks the grid before running") {
    auto cfg = small_config();
    cfg.n_cells = 2;
    CHECK_THROWS(VerifySuite{cfg});
}
