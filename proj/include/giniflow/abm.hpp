// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "giniflow/exchange.hpp"
#include "giniflow/rng.hpp"

namespace giniflow {

struct AgentEnsemble {
    std::vector<double> wealths;
    double t = 0.0;
};

struct SimConfig {
    std::size_t n_agents = 10000;
    double gamma = 0.1;
    double dt = 0.01;
    double T = 5.0;
    std::uint64_t seed = 1;
    std::size_t record_every = 10;  // sweeps between recordings
    // Pair selections per unit dt, as a fraction of n_agents. 0.5 gives every
    // agent one expected transaction per dt.
    double pairs_per_agent = 0.5;
};

void validate(const SimConfig& cfg);

// Pairs selected per sweep (one sweep advances time by dt).
std::size_t pairs_per_sweep(const SimConfig& cfg);

// One transaction between a uniformly chosen pair i != j:
// tau = sqrt(gamma dt) * sample(w_i, w_j); w_i += tau; w_j -= tau.
// Returns false if either touched wealth is no longer > 0.
bool step(AgentEnsemble& e, const TransactionKernel& k, double gamma, double dt, Rng& rng);
// The same update with the pair given.
bool transact(AgentEnsemble& e, std::size_t i, std::size_t j, const TransactionKernel& k,
              double gamma, double dt, Rng& rng);

struct AbmRecord {
    double t, gini, min_wealth, total_wealth;
};

struct AbmTrajectory {
    std::vector<AbmRecord> records;
    std::uint64_t stream_seed = 0;
    std::size_t pairs_per_sweep = 0;
    std::size_t positivity_violations = 0;  // counted after every transaction
};

// Starts from `initial` (all ones when empty). Randomness comes from the
// "abm" stream with the given replica index.
AbmTrajectory run(const SimConfig& cfg, const TransactionKernel& k,
                  std::span<const double> initial = {}, std::uint64_t replica = 0);

struct EnsembleTrajectory {
    std::vector<double> t;
    std::vector<double> mean_gini;
    std::vector<double> stderr_gini;
    std::vector<AbmTrajectory> replicas;
};

EnsembleTrajectory run_ensemble(const SimConfig& cfg, const TransactionKernel& k,
                                std::span<const double> initial, std::size_t n_seeds);

// Mean absolute difference over 2 N^2 mean, via the sorted-rank identity.
double empirical_gini(std::span<const double> wealths);
// O(N^2) pairwise definition, kept for tests and small ensembles.
double empirical_gini_pairwise(std::span<const double> wealths);

// Least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> isotonic_fit(std::span<const double> y);
// max_i |y_i - fit_i|
double isotonic_residual(std::span<const double> y);

}  // namespace giniflow
