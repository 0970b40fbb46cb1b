// SPDX-License-Identifier: Apache-2.0
#include "giniflow/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <unistd.h>

#include "giniflow/commands.hpp"
#include "giniflow/gini.hpp"
#include "giniflow/io.hpp"
#include "giniflow/metric.hpp"
#include "giniflow/potentiality.hpp"
#include "giniflow/rng.hpp"

namespace giniflow {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json to_json(const CriterionResult& r) {
    json j{{"id", r.id},           {"name", r.name},       {"status", status(r)},
           {"pass", r.pass},       {"seconds", r.seconds}, {"details", r.details}};
    if (!r.reason.empty()) j["reason"] = r.reason;
    return j;
}

std::string status(const CriterionResult& r) {
    if (r.pass) return "PASS";
    return r.expected_failure ? "XFAIL" : "FAIL";
}

namespace {

const char* const kNames[kCriterionCount] = {
    "conservation",
    "gini monotonicity",
    "gini derivative identity",
    "gradient-flow equivalence",
    "weighted biharmonic solver",
    "transport inequalities",
    "fourth-moment bound",
    "yard-sale w2 non-potentiality",
    "potentiality round trips",
    "agent/mean-field consistency",
    "determinism",
};

double max_rel_drift(const std::vector<double>& v) {
    double d = 0.0;
    for (double x : v) d = std::max(d, std::abs(x - v.front()) / std::abs(v.front()));
    return d;
}

double measured_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

double interp(const std::vector<double>& x, const std::vector<double>& y, double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double s = (t - x[k - 1]) / (x[k] - x[k - 1]);
    return (1.0 - s) * y[k - 1] + s * y[k];
}

std::vector<char> bytes_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Compares every CSV under a against its counterpart under b.
json compare_csv_trees(const fs::path& a, const fs::path& b, bool& same) {
    std::size_t files = 0, mismatched = 0;
    json bad = json::array();
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        ++files;
        const auto rel = fs::relative(e.path(), a);
        const auto other = b / rel;
        if (!fs::exists(other) || bytes_of(e.path()) != bytes_of(other)) {
            ++mismatched;
            if (bad.size() < 10) bad.push_back(rel.string());
        }
    }
    same = files > 0 && mismatched == 0;
    return {{"csv_files", files}, {"mismatched", mismatched}, {"examples", bad}};
}

}  // namespace

VerifySuite::VerifySuite(RunConfig cfg, std::string scratch_dir) : cfg_(std::move(cfg)) {
    validate(cfg_);
    // Grid preconditions are checked before any criterion runs.
    (void)make_grid(cfg_);
    if (scratch_dir.empty()) {
        scratch_root_ = (fs::temp_directory_path() /
                         ("giniflow-verify-" + std::to_string(::getpid())))
                            .string();
        own_scratch_ = true;
    } else {
        scratch_root_ = std::move(scratch_dir);
    }
}

VerifySuite::~VerifySuite() {
    if (own_scratch_) {
        std::error_code ec;
        fs::remove_all(scratch_root_, ec);
    }
}

std::string VerifySuite::scratch(const std::string& name) {
    const auto p = fs::path(scratch_root_) / name;
    std::error_code ec;
    fs::remove_all(p, ec);
    ensure_dir(p.string());
    return p.string();
}

const PdeTrajectory& VerifySuite::pde() {
    if (!pde_) {
        auto sc = to_scheme_config(cfg_);
        if (sc.snapshot_every == 0) sc.snapshot_every = 1;
        pde_ = std::make_unique<PdeTrajectory>(solve(make_initial_density(cfg_),
                                                     kernel_by_name(cfg_.model), cfg_.gamma, sc));
    }
    return *pde_;
}

const PdeTrajectory& VerifySuite::pde_refined() {
    if (!pde_refined_) {
        RunConfig fine = cfg_;
        fine.n_cells = 2 * cfg_.n_cells - 1;
        auto sc = to_scheme_config(fine);
        if (sc.snapshot_every == 0) sc.snapshot_every = 1;
        // Keep dt / h^2 fixed when dt is given explicitly.
        if (sc.dt) *sc.dt /= 4.0;
        pde_refined_ = std::make_unique<PdeTrajectory>(
            solve(make_initial_density(fine), kernel_by_name(fine.model), fine.gamma, sc));
    }
    return *pde_refined_;
}

const EnsembleTrajectory& VerifySuite::ensemble() {
    if (!ensemble_) {
        const auto init = initial_wealths(cfg_);
        ensemble_ = std::make_unique<EnsembleTrajectory>(run_ensemble(
            to_sim_config(cfg_), kernel_by_name(cfg_.model), init, cfg_.abm_n_seeds));
    }
    return *ensemble_;
}

CriterionResult VerifySuite::run(int id) {
    if (id < 1 || id > kCriterionCount)
        throw std::invalid_argument("unknown criterion " + std::to_string(id));
    CriterionResult r;
    r.id = id;
    r.name = kNames[id - 1];
    const auto t0 = std::chrono::steady_clock::now();
    json& d = r.details;
    try {
        switch (id) {
        case 1: {
            const auto& tr = pde();
            const double m0 = max_rel_drift(tr.m0), m1 = max_rel_drift(tr.m1);
            const auto& ens = ensemble();
            double drift = 0.0, min_w = INFINITY;
            std::size_t violations = 0;
            for (const auto& rep : ens.replicas) {
                for (const auto& rec : rep.records) {
                    drift = std::max(drift, std::abs(rec.total_wealth -
                                                     rep.records.front().total_wealth) /
                                                rep.records.front().total_wealth);
                    min_w = std::min(min_w, rec.min_wealth);
                }
                violations += rep.positivity_violations;
            }
            d = {{"pde_steps", tr.steps},         {"pde_m0_drift", m0},
                 {"pde_m1_drift", m1},            {"pde_min_density", tr.min_density},
                 {"abm_replicas", ens.replicas.size()}, {"abm_total_drift", drift},
                 {"abm_min_wealth", min_w},       {"abm_positivity_violations", violations}};
            r.pass = m0 < 1e-8 && m1 < 1e-8 && drift < 1e-9 && min_w > 0.0 && violations == 0;
            break;
        }
        case 2: {
            const auto& tr = pde();
            double worst = INFINITY;
            for (std::size_t j = 1; j < tr.gini.size(); ++j)
                worst = std::min(worst, tr.gini[j] - tr.gini[j - 1]);
            const auto& ens = ensemble();
            const double iso = isotonic_residual(ens.mean_gini);
            d = {{"pde_min_increment", worst},
                 {"pde_gini_start", tr.gini.front()},
                 {"pde_gini_end", tr.gini.back()},
                 {"abm_isotonic_residual", iso},
                 {"abm_mean_gini_end", ens.mean_gini.back()}};
            r.pass = worst >= -1e-10 && iso < 1e-3;
            break;
        }
        case 3: {
            const std::size_t ns[3] = {200, 400, 800};
            double e[3], h[3];
            for (int k = 0; k < 3; ++k) {
                const Grid g(cfg_.w_max, ns[k]);
                e[k] = lemma_residual(exponential_density(g).values(), g);
                h[k] = g.h();
            }
            const double p1 = measured_order(e[0], e[1], h[0], h[1]);
            const double p2 = measured_order(e[1], e[2], h[1], h[2]);
            d = {{"n", {200, 400, 800}},
                 {"residual", {e[0], e[1], e[2]}},
                 {"order", {p1, p2}}};
            r.pass = std::abs(p1 - 2.0) <= 0.2 && std::abs(p2 - 2.0) <= 0.2 && e[2] < e[1] &&
                     e[1] < e[0];
            break;
        }
        case 4: {
            const auto k = kernel_by_name(cfg_.model);
            const auto a = verify_gradient_flow(pde(), k, cfg_.gamma);
            const auto b = verify_gradient_flow(pde_refined(), k, cfg_.gamma);
            d = {{"n", {cfg_.n_cells, pde_refined().grid.size()}},
                 {"median_residual", {a.median_residual, b.median_residual}},
                 {"median_energy_defect", {a.median_energy_defect, b.median_energy_defect}},
                 {"snapshots", {pde().snapshots.size(), pde_refined().snapshots.size()}}};
            r.pass = a.median_residual < 1e-2 && a.median_energy_defect < 1e-2 &&
                     b.median_residual < a.median_residual &&
                     b.median_energy_defect < a.median_energy_defect;
            break;
        }
        case 5: {
            const double pi = std::numbers::pi;
            const std::size_t ns[3] = {101, 201, 401};
            double e[3], h[3];
            std::vector<double> last_w, last_h;
            Grid last_g(1.0, 3);
            for (int k = 0; k < 3; ++k) {
                const Grid g(1.0, ns[k]);
                std::vector<double> w(g.size()), rhs(g.size()), ustar(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double x = g.node(i);
                    w[i] = 1.0 + x;
                    ustar[i] = std::sin(pi * x) * std::sin(pi * x);
                    rhs[i] = 2.0 * pi * pi * (1.0 + x) * std::cos(2.0 * pi * x) +
                             2.0 * pi * std::sin(2.0 * pi * x);
                }
                const auto hp = project_compatible(rhs, g);
                const auto sol = solve_weighted_biharmonic(w, hp, g);
                double err = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    err = std::max(err, std::abs(sol.u[i] - ustar[i]));
                e[k] = err;
                h[k] = g.h();
                last_w = w;
                last_h = hp;
                last_g = g;
            }
            const double p1 = measured_order(e[0], e[1], h[0], h[1]);
            const double p2 = measured_order(e[1], e[2], h[1], h[2]);
            const double base = dual_norm(last_w, last_h, last_g);
            double scaling = 0.0;
            for (double beta : {0.25, 4.0}) {
                auto bw = last_w;
                for (double& x : bw) x *= beta;
                const double got = dual_norm(bw, last_h, last_g);
                scaling = std::max(scaling, std::abs(got - base / std::sqrt(beta)) /
                                                (base / std::sqrt(beta)));
            }
            d = {{"n", {101, 201, 401}},
                 {"linf_error", {e[0], e[1], e[2]}},
                 {"order", {p1, p2}},
                 {"scaling_rel_error", scaling}};
            r.pass = std::abs(p1 - 2.0) <= 0.2 && std::abs(p2 - 2.0) <= 0.2 && scaling <= 1e-12;
            break;
        }
        case 6: {
            Rng rng = make_stream(cfg_.seed, "fuzz", 0);
            const auto t = transport_inequality_suite(rng, cfg_.transport_trials);
            d = {{"trials", t.trials},
                 {"violations", {t.violations_a, t.violations_b, t.violations_c, t.violations_d}},
                 {"max_slack", {t.max_slack_a, t.max_slack_b, t.max_slack_c, t.max_slack_d}},
                 {"sqrt_action_exceeds_b", t.sqrt_action_exceeds_b},
                 {"equality_identity", t.equality_identity},
                 {"equality_scaling", t.equality_scaling}};
            r.pass = t.pass() && t.trials == cfg_.transport_trials;
            break;
        }
        case 7: {
            const auto& tr = pde();
            const auto along = fourth_moment_check(tr.snapshots, tr.snapshot_t, tr.grid);
            const Grid g(3.0, 301);
            std::size_t segments = along.segments, violations = along.violations;
            double ratio = along.max_ratio, ident = along.max_identity_rel;
            double ident_cont = along.max_continuum_identity_rel;
            for (std::size_t p = 0; p < cfg_.fourth_moment_paths; ++p) {
                Rng rng = make_stream(cfg_.seed, "fuzz", 1000 + p);
                const auto a = random_m1_density(g, rng);
                const auto b = random_m1_density(g, rng);
                const std::size_t K = 16;
                std::vector<double> times(K + 1);
                for (std::size_t j = 0; j <= K; ++j) times[j] = static_cast<double>(j) / K;
                const auto f = fourth_moment_check(linear_path(a, b, K), times, g);
                segments += f.segments;
                violations += f.violations;
                ratio = std::max(ratio, f.max_ratio);
                ident = std::max(ident, f.max_identity_rel);
                ident_cont = std::max(ident_cont, f.max_continuum_identity_rel);
            }
            d = {{"trajectory_segments", along.segments},
                 {"random_paths", cfg_.fourth_moment_paths},
                 {"segments", segments},
                 {"violations", violations},
                 {"max_ratio", ratio},
                 {"max_identity_rel", ident},
                 {"max_continuum_identity_rel", ident_cont}};
            r.pass = violations == 0 && ident <= 1e-6;
            break;
        }
        case 8: {
            const Grid g = make_grid(cfg_);
            const auto rep = yard_sale_w2_residual(exponential_density(g).values(), g);
            d = {{"max_rel_diff", rep.max_rel_diff},
                 {"max_abs_closed_form", rep.max_abs_closed_form},
                 {"max_rel_diff_corrected", rep.max_rel_diff_corrected},
                 {"max_abs_closed_form_corrected", rep.max_abs_closed_form_corrected},
                 {"ablation_rel_diff", rep.ablation_rel_diff}};
            r.pass = rep.max_rel_diff < 5e-2 && rep.max_abs_closed_form > 0.01;
            const bool corrected = rep.max_rel_diff_corrected < 5e-2 &&
                                   rep.max_abs_closed_form_corrected > 0.01;
            if (!r.pass && corrected) {
                r.expected_failure = true;
                r.reason =
                    "the reference closed form carries (1 + log rho) D; the residual matches "
                    "(1 - log rho) D, which follows from the last term equalling L - D log rho";
            }
            break;
        }
        case 9: {
            const Grid g(cfg_.w_max, 2001);
            std::vector<double> gam(g.size());
            for (std::size_t i = 0; i < g.size(); ++i)
                gam[i] = 4.0 * g.node(i) * std::exp(-2.0 * g.node(i));
            const DensityField densities[3] = {exponential_density(g), bump_density(g, 1.0, 0.3),
                                               tilt_to_m1(g, gam)};
            const char* dnames[3] = {"exponential", "bump", "gamma2"};
            struct Case {
                const char* name;
                OperatorField L;
                std::function<double(std::span<const double>)> F;
            };
            const Case cases[3] = {
                {"m0", constant_operator(g), [&](std::span<const double> x) { return integrate(x, g); }},
                {"half_l2", identity_operator(g),
                 [&](std::span<const double> x) {
                     std::vector<double> sq(x.size());
                     for (std::size_t i = 0; i < x.size(); ++i) sq[i] = 0.5 * x[i] * x[i];
                     return integrate(sq, g);
                 }},
                {"gini", gini_operator(g),
                 [&](std::span<const double> x) { return scaled_gini(x, g); }},
            };
            double worst = 0.0;
            d = json::object();
            for (int di = 0; di < 3; ++di) {
                json row;
                for (const auto& c : cases) {
                    const double err = std::abs(
                        frechet_antiderivative(c.L, densities[di].values(), g) -
                        c.F(densities[di].values()));
                    row[c.name] = err;
                    worst = std::max(worst, err);
                }
                d[dnames[di]] = row;
            }
            d["max_abs_error"] = worst;
            r.pass = worst < 1e-4;
            break;
        }
        case 10: {
            const auto& tr = pde();
            const auto& ens = ensemble();
            double worst = 0.0, at = 0.0;
            for (std::size_t j = 0; j < ens.t.size(); ++j) {
                const double gap = std::abs(ens.mean_gini[j] - interp(tr.t, tr.gini, ens.t[j]));
                if (gap > worst) {
                    worst = gap;
                    at = ens.t[j];
                }
            }
            d = {{"max_abs_gap", worst},
                 {"at_t", at},
                 {"replicas", ens.replicas.size()},
                 {"abm_gini_end", ens.mean_gini.back()},
                 {"pde_gini_end", tr.gini.back()},
                 {"pairs_per_sweep", ens.replicas.front().pairs_per_sweep}};
            r.pass = worst < 0.02 && ens.t.back() + 1e-9 >= std::min(cfg_.abm_T, cfg_.pde_T);
            break;
        }
        case 11: {
            // Cheaper variants of the stochastic and PDE runs; the manifests
            // still carry full configs.
            RunConfig c = cfg_;
            c.abm_n_seeds = 2;
            c.abm_n_agents = std::min<std::size_t>(c.abm_n_agents, 2000);
            c.abm_T = std::min(c.abm_T, 1.0);
            c.pde_T = std::min(c.pde_T, 1.0);
            c.pde_snapshot_every = 25;
            bool all = true;
            for (const char* cmd : {"solve-pde", "simulate-abm", "gini"}) {
                const std::string a = scratch(std::string("det-") + cmd + "-a");
                const std::string b = scratch(std::string("det-") + cmd + "-b");
                run_command(cmd, c, json::object(), a);
                rerun_manifest((fs::path(a) / "manifest.json").string(), b);
                bool same = false;
                d[cmd] = compare_csv_trees(a, b, same);
                all = all && same;
            }
            r.pass = all;
            break;
        }
        }
    } catch (const std::exception& ex) {
        r.pass = false;
        r.reason = std::string("criterion ") + std::to_string(id) + ": " + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CriterionResult> VerifySuite::run_all(const std::vector<int>& ids) {
    std::vector<CriterionResult> out;
    if (ids.empty()) {
        for (int i = 1; i <= kCriterionCount; ++i) out.push_back(run(i));
    } else {
        for (int i : ids) out.push_back(run(i));
    }
    return out;
}

}  // namespace giniflow
