// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "giniflow/abm.hpp"
#include "giniflow/density.hpp"
#include "giniflow/meanfield.hpp"

namespace giniflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitialDensitySpec {
    std::string kind = "exponential";  // exponential | uniform | bump | csv
    double a = 0.0, b = 2.0;           // uniform
    double center = 1.0, width = 0.25; // bump
    std::string path;                  // csv, resolved against the config directory
};

struct RunConfig {
    std::string model = "yard-sale";
    double w_max = 20.0;
    std::size_t n_cells = 400;
    double gamma = 0.1;

    std::size_t abm_n_agents = 10000;
    double abm_dt = 0.01;
    double abm_T = 5.0;
    std::size_t abm_record_every = 10;
    std::size_t abm_n_seeds = 32;
    double abm_pairs_per_agent = 0.5;
    std::string abm_initial = "density";  // density | ones

    std::optional<double> pde_dt;  // empty means "auto"
    double pde_T = 5.0;
    double pde_safety = 0.5;
    std::size_t pde_snapshot_every = 1;

    InitialDensitySpec initial_density;
    std::string outputs = "out";
    std::uint64_t seed = 20240607;

    std::size_t transport_trials = 100;
    std::size_t fourth_moment_paths = 20;
};

// Strict parsing: unknown keys, wrong types and out-of-range values raise
// ConfigError naming the field. Accepts either a config object or a run
// manifest (whose "config" member is used).
RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json to_json(const RunConfig& c);
void validate(const RunConfig& c);

Grid make_grid(const RunConfig& c);
DensityField make_initial_density(const RunConfig& c);
SimConfig to_sim_config(const RunConfig& c);
SchemeConfig to_scheme_config(const RunConfig& c);
// Initial wealths for the agent model: all ones, or quantiles of the
// initial density rescaled to mean 1.
std::vector<double> initial_wealths(const RunConfig& c);

}  // namespace giniflow
