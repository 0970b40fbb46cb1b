// SPDX-License-Identifier: Apache-2.0
// giniflow command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "giniflow/commands.hpp"
#include "giniflow/config.hpp"
#include "giniflow/io.hpp"
#include "giniflow/simd.hpp"
#include "giniflow/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory (default: config 'outputs')");
    app->add_option("--seed", c.seed, "override the config seed");
}

std::string absolute(const std::string& p) {
    return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

void print_summary(const giniflow::CommandResult& r) {
    if (r.report["command"] == "verify-all") {
        for (const auto& c : r.report["results"]) {
            std::printf("criterion %2d %-30s %-5s %8.2fs", c["id"].get<int>(),
                        c["name"].get<std::string>().c_str(),
                        c["status"].get<std::string>().c_str(), c["seconds"].get<double>());
            if (c.contains("reason")) std::printf("  (%s)", c["reason"].get<std::string>().c_str());
            std::printf("\n");
        }
    } else {
        std::cout << r.report["results"].dump(2) << '\n';
    }
    std::printf("pass: %s\n", r.pass ? "true" : "false");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"giniflow: wealth-exchange agent model, mean-field PDE and metric diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", giniflow::kVersion);
    std::string simd = "auto";
    app.add_option("--simd", simd, "kernel backend: auto, scalar or avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    Common common;
    json args = json::object();
    std::string density, target, trajectory, weight = "rho", op = "yard-sale-w2", manifest;
    bool allow_xfail = false;

    auto* abm = app.add_subcommand("simulate-abm", "run the agent ensemble");
    auto* pde = app.add_subcommand("solve-pde", "integrate the mean-field equation");
    auto* gini = app.add_subcommand("gini", "Gini coefficient and its functional derivative");
    gini->add_option("--density", density, "w,rho CSV (default: configured initial density)");
    auto* metric = app.add_subcommand("metric", "dual-norm diagnostics");
    metric->require_subcommand(1);
    auto* norm = metric->add_subcommand("norm", "weighted negative-Sobolev norm of target - density");
    norm->add_option("--density", density, "w,rho CSV used as the weight (default: initial density)");
    norm->add_option("--target", target, "w,rho CSV")->required();
    norm->add_option("--weight", weight, "rho or diffusion")
        ->check(CLI::IsMember({"rho", "diffusion"}));
    auto* flow = metric->add_subcommand("verify-flow", "check the PDE against its gradient flow");
    flow->add_option("--trajectory", trajectory, "snapshot directory from solve-pde");
    auto* ineq = metric->add_subcommand("inequalities", "randomized transport inequality suite");
    auto* fm = metric->add_subcommand("fourth-moment", "fourth-moment speed bound");
    fm->add_option("--trajectory", trajectory, "snapshot directory from solve-pde");
    auto* pot = app.add_subcommand("potentiality", "test whether an operator is a derivative");
    pot->add_option("--density", density, "w,rho CSV (default: initial density)");
    pot->add_option("--operator", op,
                    "yard-sale-w2, mass, half-l2, gini, cubic-mass or mobility-rho");
    auto* all = app.add_subcommand("verify-all", "run the acceptance suite");
    all->add_flag("--allow-expected-failures", allow_xfail,
                  "exit 0 when the only failures are documented ones");
    auto* rerun = app.add_subcommand("rerun", "replay a run manifest");
    rerun->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);

    for (auto* sc : {abm, pde, gini, norm, flow, ineq, fm, pot, all}) add_common(sc, common);
    rerun->add_option("--out", common.out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simd == "scalar") giniflow::simd::set_backend(giniflow::simd::Backend::Scalar);
        if (simd == "avx2") giniflow::simd::set_backend(giniflow::simd::Backend::Avx2);

        if (rerun->parsed()) {
            const auto r = giniflow::rerun_manifest(manifest, common.out);
            print_summary(r);
            return r.pass ? 0 : 1;
        }

        std::string command;
        if (metric->parsed()) {
            for (auto* sc : metric->get_subcommands()) command = "metric-" + sc->get_name();
        } else {
            command = app.get_subcommands().front()->get_name();
        }

        giniflow::RunConfig cfg =
            common.config.empty() ? giniflow::RunConfig{} : giniflow::load_config(common.config);
        if (common.seed) cfg.seed = *common.seed;
        giniflow::validate(cfg);
        (void)giniflow::make_grid(cfg);

        if (!density.empty()) args["density"] = absolute(density);
        if (!target.empty()) args["target"] = absolute(target);
        if (!trajectory.empty()) args["trajectory"] = absolute(trajectory);
        if (command == "metric-norm") args["weight"] = weight;
        if (command == "potentiality") args["operator"] = op;
        if (allow_xfail) args["allow_expected_failures"] = true;

        const std::string out = common.out.empty() ? cfg.outputs : common.out;
        const auto r = giniflow::run_command(command, cfg, args, out);
        print_summary(r);
        return r.pass ? 0 : 1;
    } catch (const giniflow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
