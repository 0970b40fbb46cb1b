// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "giniflow/config.hpp"

namespace giniflow {

// Result of one subcommand. `report` follows {command, config, results[], pass}.
struct CommandResult {
    nlohmann::json report;
    bool pass = true;
};

// Subcommands: simulate-abm, solve-pde, gini, metric-norm, metric-verify-flow,
// metric-inequalities, metric-fourth-moment, potentiality, verify-all.
//
// `args` holds the subcommand-specific options (file paths, operator names);
// they are echoed into the manifest so a rerun sees the same inputs.
// Writes <out_dir>/manifest.json, <out_dir>/report.json and the CSV outputs.
CommandResult run_command(const std::string& command, const RunConfig& cfg,
                          const nlohmann::json& args, const std::string& out_dir);

// Replays a manifest into out_dir: same command, config, args and SIMD backend
// (falling back to scalar when the recorded backend is unavailable).
CommandResult rerun_manifest(const std::string& manifest_path, const std::string& out_dir);

bool is_command(const std::string& command);

}  // namespace giniflow
