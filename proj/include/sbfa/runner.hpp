#pragma once

#include <iosfwd>
#include <string>

#include "sbfa/run_config.hpp"

namespace sbfa {

// Executes the configured run and writes all artifacts under config.out_dir
// (per-replicate subdirectories when replicates > 1).
void run(const RunConfig& config);

// Writes the scenario dataset as CSV plus a .truth.json sidecar with the
// generating parameters.
void simulate_cmd(Scenario which, int n, std::uint64_t seed, const std::string& out_path);

// Human-readable summary of a finished run directory.
void report(const std::string& run_dir, std::ostream& os);

}  // namespace sbfa
