// SPDX-License-Identifier: Apache-2.0
#include "giniflow/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "giniflow/abm.hpp"
#include "giniflow/gini.hpp"
#include "giniflow/io.hpp"
#include "giniflow/meanfield.hpp"
#include "giniflow/metric.hpp"
#include "giniflow/potentiality.hpp"
#include "giniflow/rng.hpp"
#include "giniflow/simd.hpp"
#include "giniflow/verify.hpp"

namespace giniflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kCommands[] = {"simulate-abm",         "solve-pde",           "gini",
                                 "metric-norm",          "metric-verify-flow",  "metric-inequalities",
                                 "metric-fourth-moment", "potentiality",        "verify-all"};

std::string arg_string(const json& args, const char* key, const std::string& fallback = {}) {
    if (!args.contains(key)) return fallback;
    if (!args[key].is_string()) throw std::invalid_argument(std::string(key) + ": expected a string");
    return args[key].get<std::string>();
}

DensityField density_arg(const json& args, const char* key, const RunConfig& cfg) {
    const auto path = arg_string(args, key);
    return path.empty() ? make_initial_density(cfg) : read_density_csv(path);
}

struct Outputs {
    fs::path root;
    json files = json::array();

    std::string path(const std::string& rel) {
        files.push_back(rel);
        const auto p = root / rel;
        if (p.has_parent_path()) ensure_dir(p.parent_path().string());
        return p.string();
    }
};

std::FILE* open_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

// Snapshots either come from a directory written by solve-pde or from a fresh run.
PdeTrajectory trajectory_arg(const json& args, const RunConfig& cfg) {
    const auto dir = arg_string(args, "trajectory");
    if (!dir.empty()) return read_snapshots(dir, cfg.gamma, cfg.model);
    auto sc = to_scheme_config(cfg);
    if (sc.snapshot_every == 0) sc.snapshot_every = 1;
    return solve(make_initial_density(cfg), kernel_by_name(cfg.model), cfg.gamma, sc);
}

OperatorField operator_by_name(const std::string& name, const Grid& g) {
    if (name == "mass") return constant_operator(g);
    if (name == "half-l2") return identity_operator(g);
    if (name == "gini") return gini_operator(g);
    if (name == "cubic-mass") return cubic_mass_operator(g);
    if (name == "yard-sale-w2") return yard_sale_w2_operator(g);
    if (name == "mobility-rho") return mobility_operator(g, [](double r) { return r; });
    throw std::invalid_argument(
        "unknown operator '" + name +
        "' (expected mass, half-l2, gini, cubic-mass, yard-sale-w2, mobility-rho)");
}

json cmd_simulate_abm(const RunConfig& cfg, Outputs& out, bool& pass) {
    const auto k = kernel_by_name(cfg.model);
    const auto init = initial_wealths(cfg);
    const auto ens = run_ensemble(to_sim_config(cfg), k, init, cfg.abm_n_seeds);
    write_abm_csv(out.path("trajectory.csv"), ens.replicas.front());
    write_ensemble_csv(out.path("ensemble.csv"), ens);
    json reps = json::array();
    std::size_t violations = 0;
    for (std::size_t r = 0; r < ens.replicas.size(); ++r) {
        const auto& rep = ens.replicas[r];
        char name[48];
        std::snprintf(name, sizeof name, "replicas/replica_%03zu.csv", r);
        write_abm_csv(out.path(name), rep);
        const auto& a = rep.records.front();
        const auto& b = rep.records.back();
        reps.push_back({{"replica", r},
                        {"stream_seed", rep.stream_seed},
                        {"gini_end", b.gini},
                        {"min_wealth_end", b.min_wealth},
                        {"total_drift", std::abs(b.total_wealth - a.total_wealth) / a.total_wealth},
                        {"positivity_violations", rep.positivity_violations}});
        violations += rep.positivity_violations;
    }
    pass = violations == 0;
    const auto pps = ens.replicas.front().pairs_per_sweep;
    return json::array(
        {{{"name", "time_normalization"},
          {"pairs_per_sweep", pps},
          {"dt", cfg.abm_dt},
          {"expected_transactions_per_agent_per_dt", 2.0 * static_cast<double>(pps) /
                                                         static_cast<double>(cfg.abm_n_agents)}},
         {{"name", "ensemble"},
          {"replicas", ens.replicas.size()},
          {"mean_gini_start", ens.mean_gini.front()},
          {"mean_gini_end", ens.mean_gini.back()},
          {"isotonic_residual", isotonic_residual(ens.mean_gini)}},
         {{"name", "replicas"}, {"items", reps}}});
}

json cmd_solve_pde(const RunConfig& cfg, Outputs& out) {
    const auto rho0 = make_initial_density(cfg);
    const auto tr = solve(rho0, kernel_by_name(cfg.model), cfg.gamma, to_scheme_config(cfg));
    write_pde_trajectory_csv(out.path("trajectory.csv"), tr);
    out.files.push_back("snapshots/");
    write_snapshots((out.root / "snapshots").string(), tr);
    auto drift = [](const std::vector<double>& v) {
        double d = 0.0;
        for (double x : v) d = std::max(d, std::abs(x - v.front()) / std::abs(v.front()));
        return d;
    };
    double tail = tail_mass(rho0);
    return json::array({{{"name", "run"},
                         {"steps", tr.steps},
                         {"snapshots", tr.snapshots.size()},
                         {"gini_start", tr.gini.front()},
                         {"gini_end", tr.gini.back()},
                         {"m0_drift", drift(tr.m0)},
                         {"m1_drift", drift(tr.m1)},
                         {"min_density", tr.min_density}},
                        {{"name", "truncation"},
                         {"tail_mass_start", tail},
                         {"tail_mass_end", tr.tail_mass_end},
                         {"note", "mass in the top 10% of [0, w_max]; raise w_max if it grows"}}});
}

json cmd_gini(const RunConfig& cfg, const json& args, Outputs& out) {
    const auto rho = density_arg(args, "density", cfg);
    const auto rep = gini_report(rho);
    std::FILE* f = open_csv(out.path("frechet.csv"));
    std::fprintf(f, "w,frechet\n");
    for (std::size_t i = 0; i < rho.size(); ++i)
        std::fprintf(f, "%.17g,%.17g\n", rho.grid().node(i), rep.frechet[i]);
    std::fclose(f);
    return json::array({{{"name", "gini"},
                         {"scaled_gini", rep.G},
                         {"gini", rep.gini},
                         {"lemma_residual", rep.lemma_residual},
                         {"m0", rho.m0()},
                         {"m1", rho.m1()}}});
}

json cmd_metric_norm(const RunConfig& cfg, const json& args, Outputs& out) {
    const auto rho = density_arg(args, "density", cfg);
    const auto target_path = arg_string(args, "target");
    if (target_path.empty()) throw std::invalid_argument("metric norm: --target is required");
    const auto target = read_density_csv(target_path);
    if (!(target.grid() == rho.grid()))
        throw std::invalid_argument("metric norm: density and target grids differ");
    const Grid& g = rho.grid();
    std::vector<double> h(g.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = target[i] - rho[i];
    const auto mode = arg_string(args, "weight", "rho");
    std::vector<double> w;
    if (mode == "rho") {
        w = rho.values();
    } else if (mode == "diffusion") {
        w = diffusion_coefficient(kernel_by_name(cfg.model), rho, cfg.gamma);
    } else {
        throw std::invalid_argument("metric norm: weight must be 'rho' or 'diffusion'");
    }
    const auto sol = solve_weighted_biharmonic(w, h, g);
    std::FILE* f = open_csv(out.path("potential.csv"));
    std::fprintf(f, "w,u,v\n");
    for (std::size_t i = 0; i < g.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", g.node(i), sol.u[i], sol.v[i]);
    std::fclose(f);
    return json::array({{{"name", "norm"},
                         {"weight", mode},
                         {"norm", std::sqrt(sol.norm_sq)},
                         {"norm_sq", sol.norm_sq},
                         {"compat_m0", sol.compat_m0},
                         {"compat_m1", sol.compat_m1},
                         {"floor_active_interior", sol.floor_active_interior}}});
}

json cmd_verify_flow(const RunConfig& cfg, const json& args, Outputs& out) {
    const auto tr = trajectory_arg(args, cfg);
    const auto rep = verify_gradient_flow(tr, kernel_by_name(cfg.model), cfg.gamma);
    std::FILE* f = open_csv(out.path("flow.csv"));
    std::fprintf(f, "t,residual,energy_defect,dgini_dt,norm_sq,richardson\n");
    for (std::size_t j = 0; j < rep.t.size(); ++j)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", rep.t[j], rep.residual[j],
                     rep.energy_defect[j], rep.dgini_dt[j], rep.norm_sq[j], rep.richardson[j]);
    std::fclose(f);
    std::vector<double> one(tr.grid.size(), 1.0);
    return json::array({{{"name", "gradient_flow"},
                         {"snapshots", tr.snapshots.size()},
                         {"median_residual", rep.median_residual},
                         {"median_energy_defect", rep.median_energy_defect},
                         {"mass_drift", conserved_quantities_check(tr, one)},
                         {"mean_drift", conserved_quantities_check(tr, tr.grid.nodes())}}});
}

json cmd_inequalities(const RunConfig& cfg, bool& pass) {
    Rng rng = make_stream(cfg.seed, "fuzz", 0);
    const auto t = transport_inequality_suite(rng, cfg.transport_trials);
    pass = t.pass();
    return json::array(
        {{{"name", "transport"},
          {"trials", t.trials},
          {"tol", t.tol},
          {"violations", {t.violations_a, t.violations_b, t.violations_c, t.violations_d}},
          {"max_slack", {t.max_slack_a, t.max_slack_b, t.max_slack_c, t.max_slack_d}},
          {"sqrt_action_exceeds_b", t.sqrt_action_exceeds_b},
          {"equality_identity", t.equality_identity},
          {"equality_scaling", t.equality_scaling}}});
}

json fm_json(const char* name, const FourthMomentReport& f) {
    return {{"name", name},
            {"segments", f.segments},
            {"violations", f.violations},
            {"max_ratio", f.max_ratio},
            {"max_identity_rel", f.max_identity_rel},
            {"max_continuum_identity_rel", f.max_continuum_identity_rel}};
}

json cmd_fourth_moment(const RunConfig& cfg, const json& args, bool& pass) {
    const auto tr = trajectory_arg(args, cfg);
    const auto along = fourth_moment_check(tr.snapshots, tr.snapshot_t, tr.grid);
    json res = json::array({fm_json("trajectory", along)});
    const Grid g(3.0, 301);
    std::size_t violations = along.violations;
    for (std::size_t p = 0; p < cfg.fourth_moment_paths; ++p) {
        Rng rng = make_stream(cfg.seed, "fuzz", 1000 + p);
        const auto a = random_m1_density(g, rng);
        const auto b = random_m1_density(g, rng);
        const std::size_t K = 16;
        std::vector<double> times(K + 1);
        for (std::size_t j = 0; j <= K; ++j) times[j] = static_cast<double>(j) / K;
        const auto f = fourth_moment_check(linear_path(a, b, K), times, g);
        violations += f.violations;
        res.push_back(fm_json("random_path", f));
    }
    pass = violations == 0;
    return res;
}

json cmd_potentiality(const RunConfig& cfg, const json& args, Outputs& out) {
    const auto rho = density_arg(args, "density", cfg);
    const Grid& g = rho.grid();
    const auto name = arg_string(args, "operator", "yard-sale-w2");
    std::FILE* f = open_csv(out.path("residual.csv"));
    json res;
    if (name == "yard-sale-w2") {
        const auto rep = yard_sale_w2_residual(rho.values(), g);
        std::fprintf(f, "w,admissible,residual,closed_form,closed_form_corrected\n");
        for (std::size_t i = 0; i < g.size(); ++i)
            std::fprintf(f, "%.17g,%d,%.17g,%.17g,%.17g\n", g.node(i), rep.mask[i] ? 1 : 0,
                         rep.residual[i], rep.closed_form[i], rep.closed_form_corrected[i]);
        res = {{"name", name},
               {"max_rel_diff", rep.max_rel_diff},
               {"max_rel_diff_corrected", rep.max_rel_diff_corrected},
               {"max_abs_closed_form", rep.max_abs_closed_form},
               {"max_abs_closed_form_corrected", rep.max_abs_closed_form_corrected},
               {"ablation_rel_diff", rep.ablation_rel_diff}};
    } else {
        const auto L = operator_by_name(name, g);
        const auto rep = potentiality_residual(L, rho.values(), g);
        std::fprintf(f, "w,admissible,residual\n");
        for (std::size_t i = 0; i < g.size(); ++i)
            std::fprintf(f, "%.17g,%d,%.17g\n", g.node(i), rep.mask[i] ? 1 : 0, rep.residual[i]);
        res = {{"name", name},
               {"max_abs_residual", rep.max_abs},
               {"antiderivative", frechet_antiderivative(L, rho.values(), g)}};
    }
    std::fclose(f);
    return json::array({res});
}

json cmd_verify_all(const RunConfig& cfg, const json& args, Outputs& out, bool& pass) {
    VerifySuite suite(cfg, (out.root / "scratch").string());
    const auto results = suite.run_all();
    const bool allow = args.value("allow_expected_failures", false);
    std::FILE* f = open_csv(out.path("criteria.csv"));
    std::fprintf(f, "id,name,status\n");
    json res = json::array();
    pass = true;
    for (const auto& r : results) {
        std::fprintf(f, "%d,%s,%s\n", r.id, r.name.c_str(), status(r).c_str());
        res.push_back(to_json(r));
        pass = pass && (r.pass || (allow && r.expected_failure));
    }
    std::fclose(f);
    std::error_code ec;
    fs::remove_all(out.root / "scratch", ec);
    return res;
}

}  // namespace

bool is_command(const std::string& command) {
    return std::find(std::begin(kCommands), std::end(kCommands), command) != std::end(kCommands);
}

CommandResult run_command(const std::string& command, const RunConfig& cfg, const json& args,
                          const std::string& out_dir) {
    if (!is_command(command)) throw std::invalid_argument("unknown command '" + command + "'");
    validate(cfg);
    ensure_dir(out_dir);
    json manifest{{"manifest_version", 1},
                  {"command", command},
                  {"args", args.is_null() ? json::object() : args},
                  {"config", to_json(cfg)},
                  {"seed", cfg.seed},
                  {"version", kVersion},
                  {"simd_backend", std::string(simd::backend_name(simd::current_backend()))},
                  {"start_time", utc_timestamp()}};

    Outputs out{fs::path(out_dir)};
    CommandResult r;
    json results;
    if (command == "simulate-abm") results = cmd_simulate_abm(cfg, out, r.pass);
    else if (command == "solve-pde") results = cmd_solve_pde(cfg, out);
    else if (command == "gini") results = cmd_gini(cfg, args, out);
    else if (command == "metric-norm") results = cmd_metric_norm(cfg, args, out);
    else if (command == "metric-verify-flow") results = cmd_verify_flow(cfg, args, out);
    else if (command == "metric-inequalities") results = cmd_inequalities(cfg, r.pass);
    else if (command == "metric-fourth-moment") results = cmd_fourth_moment(cfg, args, r.pass);
    else if (command == "potentiality") results = cmd_potentiality(cfg, args, out);
    else results = cmd_verify_all(cfg, args, out, r.pass);

    r.report = {{"command", command},
                {"config", manifest["config"]},
                {"results", results},
                {"pass", r.pass}};
    write_json((fs::path(out_dir) / "report.json").string(), r.report);
    out.files.push_back("report.json");
    manifest["end_time"] = utc_timestamp();
    manifest["outputs"] = out.files;
    write_json((fs::path(out_dir) / "manifest.json").string(), manifest);
    return r;
}

CommandResult rerun_manifest(const std::string& manifest_path, const std::string& out_dir) {
    const json m = read_json(manifest_path);
    if (!m.contains("manifest_version") || !m.contains("command") || !m.contains("config"))
        throw std::invalid_argument(manifest_path + ": not a run manifest");
    const auto base = fs::path(manifest_path).parent_path().string();
    const RunConfig cfg = config_from_json(m["config"], base.empty() ? "." : base);
    const auto prev = simd::current_backend();
    const auto want = m.value("simd_backend", std::string("scalar"));
    if (want == simd::backend_name(simd::Backend::Avx2) && simd::avx2_supported())
        simd::set_backend(simd::Backend::Avx2);
    else
        simd::set_backend(simd::Backend::Scalar);
    try {
        auto r = run_command(m["command"].get<std::string>(), cfg,
                             m.value("args", json::object()), out_dir);
        simd::set_backend(prev);
        return r;
    } catch (...) {
        simd::set_backend(prev);
        throw;
    }
}

}  // namespace giniflow
