// SPDX-License-Identifier: Apache-2.0
#include "giniflow/abm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace giniflow {

void validate(const SimConfig& c) {
    if (c.n_agents < 2) throw std::invalid_argument("abm.n_agents must be >= 2");
    check_gamma(c.gamma);
    if (!(c.dt > 0.0 && c.dt < 1.0)) throw std::invalid_argument("abm.dt must lie in (0, 1)");
    if (!(c.gamma * c.dt < 1.0)) throw std::invalid_argument("gamma * abm.dt must be < 1");
    if (!(c.T > 0.0)) throw std::invalid_argument("abm.T must be > 0");
    if (c.record_every == 0) throw std::invalid_argument("abm.record_every must be >= 1");
    if (!(c.pairs_per_agent > 0.0))
        throw std::invalid_argument("abm.pairs_per_agent must be > 0");
}

std::size_t pairs_per_sweep(const SimConfig& c) {
    const auto p = static_cast<std::size_t>(
        std::llround(c.pairs_per_agent * static_cast<double>(c.n_agents)));
    return std::max<std::size_t>(p, 1);
}

bool transact(AgentEnsemble& e, std::size_t i, std::size_t j, const TransactionKernel& k,
              double gamma, double dt, Rng& rng) {
    const double tau = std::sqrt(gamma * dt) * k.sample(e.wealths[i], e.wealths[j], rng);
    e.wealths[i] += tau;
    e.wealths[j] -= tau;
    return e.wealths[i] > 0.0 && e.wealths[j] > 0.0;
}

bool step(AgentEnsemble& e, const TransactionKernel& k, double gamma, double dt, Rng& rng) {
    const std::size_t n = e.wealths.size();
    if (n < 2) throw std::invalid_argument("step: need at least 2 agents");
    std::uniform_int_distribution<std::size_t> pick_i(0, n - 1), pick_j(0, n - 2);
    const std::size_t i = pick_i(rng);
    std::size_t j = pick_j(rng);
    if (j >= i) ++j;
    return transact(e, i, j, k, gamma, dt, rng);
}

namespace {

AbmRecord record(const AgentEnsemble& e) {
    double total = 0.0;
    for (double w : e.wealths) total += w;
    return {e.t, empirical_gini(e.wealths),
            *std::min_element(e.wealths.begin(), e.wealths.end()), total};
}

}  // namespace

AbmTrajectory run(const SimConfig& cfg, const TransactionKernel& k,
                  std::span<const double> initial, std::uint64_t replica) {
    validate(cfg);
    AgentEnsemble e;
    if (initial.empty()) {
        e.wealths.assign(cfg.n_agents, 1.0);
    } else {
        if (initial.size() != cfg.n_agents)
            throw std::invalid_argument("abm: initial wealth vector has wrong length");
        for (double w : initial)
            if (!(w > 0.0)) throw std::invalid_argument("abm: initial wealths must be > 0");
        e.wealths.assign(initial.begin(), initial.end());
    }
    AbmTrajectory out;
    out.stream_seed = derive_seed(cfg.seed, "abm", replica);
    out.pairs_per_sweep = pairs_per_sweep(cfg);
    Rng rng(out.stream_seed);

    const auto sweeps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    out.records.push_back(record(e));
    for (std::size_t s = 1; s <= sweeps; ++s) {
        for (std::size_t p = 0; p < out.pairs_per_sweep; ++p)
            out.positivity_violations += !step(e, k, cfg.gamma, cfg.dt, rng);
        e.t = static_cast<double>(s) * cfg.dt;
        if (s % cfg.record_every == 0 || s == sweeps) out.records.push_back(record(e));
    }
    return out;
}

EnsembleTrajectory run_ensemble(const SimConfig& cfg, const TransactionKernel& k,
                                std::span<const double> initial, std::size_t n_seeds) {
    if (n_seeds == 0) throw std::invalid_argument("run_ensemble: n_seeds must be >= 1");
    EnsembleTrajectory out;
    for (std::size_t r = 0; r < n_seeds; ++r) out.replicas.push_back(run(cfg, k, initial, r));
    const std::size_t m = out.replicas.front().records.size();
    const double ns = static_cast<double>(n_seeds);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0, s2 = 0.0;
        for (const auto& rep : out.replicas) {
            s += rep.records[j].gini;
            s2 += rep.records[j].gini * rep.records[j].gini;
        }
        const double mean = s / ns;
        const double var = n_seeds > 1 ? std::max(0.0, (s2 - ns * mean * mean) / (ns - 1.0)) : 0.0;
        out.t.push_back(out.replicas.front().records[j].t);
        out.mean_gini.push_back(mean);
        out.stderr_gini.push_back(std::sqrt(var / ns));
    }
    return out;
}

double empirical_gini(std::span<const double> wealths) {
    if (wealths.empty()) throw std::invalid_argument("empirical_gini: empty wealth vector");
    std::vector<double> w(wealths.begin(), wealths.end());
    std::sort(w.begin(), w.end());
    if (w.front() < 0.0) throw std::invalid_argument("empirical_gini: negative wealth");
    double total = 0.0, ranked = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        total += w[i];
        ranked += static_cast<double>(i + 1) * w[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("empirical_gini: all wealths are zero");
    const double n = static_cast<double>(w.size());
    return 2.0 * ranked / (n * total) - (n + 1.0) / n;
}

double empirical_gini_pairwise(std::span<const double> wealths) {
    if (wealths.empty()) throw std::invalid_argument("empirical_gini: empty wealth vector");
    double total = 0.0, diff = 0.0;
    for (double a : wealths) {
        total += a;
        for (double b : wealths) diff += std::abs(a - b);
    }
    if (!(total > 0.0)) throw std::invalid_argument("empirical_gini: all wealths are zero");
    const double n = static_cast<double>(wealths.size());
    return diff / (2.0 * n * total);
}

std::vector<double> isotonic_fit(std::span<const double> y) {
    struct Block {
        double sum;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (double v : y) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1) {
            const Block& b = blocks.back();
            const Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.count <= b.sum / b.count) break;
            Block merged{a.sum + b.sum, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> fit;
    fit.reserve(y.size());
    for (const auto& b : blocks) fit.insert(fit.end(), b.count, b.sum / b.count);
    return fit;
}

double isotonic_residual(std::span<const double> y) {
    const auto fit = isotonic_fit(y);
    double r = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, std::abs(y[i] - fit[i]));
    return r;
}

}  // namespace giniflow
