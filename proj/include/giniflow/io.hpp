// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "giniflow/abm.hpp"
#include "giniflow/meanfield.hpp"

namespace giniflow {

inline constexpr const char* kVersion = "0.1.0";

// "%.17g"
std::string fmt17(double v);
std::string utc_timestamp();

void ensure_dir(const std::string& dir);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// t,gini,m0,m1,m4 (one row per step)
void write_pde_trajectory_csv(const std::string& path, const PdeTrajectory& tr);
// snapshots/index.csv (index,t,file) plus one w,rho CSV per snapshot
void write_snapshots(const std::string& dir, const PdeTrajectory& tr);
// Rebuilds grid, snapshot_t and snapshots from a directory written above.
PdeTrajectory read_snapshots(const std::string& dir, double gamma, const std::string& kernel);

// t,gini,min_wealth,total_wealth
void write_abm_csv(const std::string& path, const AbmTrajectory& tr);
// t,mean_gini,stderr_gini
void write_ensemble_csv(const std::string& path, const EnsembleTrajectory& e);

}  // namespace giniflow
