#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbfa/modelselect.hpp"
#include "sbfa/simulate.hpp"
#include "sbfa/smc.hpp"

namespace sbfa {

// Parsed and validated run configuration (JSON file; unknown keys rejected).
struct RunConfig {
  // dataset: exactly one of path / scenario
  std::string data_path;
  std::optional<Scenario> scenario;
  int scenario_n = 0;  // 0 = scenario default
  std::uint64_t scenario_seed = 1;
  std::optional<Dataset::Kind> kind_override;
  bool standardize = false;

  // model menu: preset labels and/or inline specs
  std::vector<std::string> preset_labels;
  std::vector<std::pair<std::string, ModelSpec>> custom_models;
  int factors = 2;  // k used by the EZ/AZ presets

  EngineConfig engine;
  int replicates = 1;

  std::string out_dir;
  bool checkpoints_at_resamples = true;
  bool posterior_draws_at_checkpoints = false;  // default: final step only

  std::uint64_t master_seed = 1;
};

RunConfig parse_run_config(const std::string& path);
RunConfig run_config_from_json(const std::string& text, const std::string& origin);

// Materializes the dataset (file or scenario) and the model menu.
Dataset load_dataset(const RunConfig& config);
ModelMenu build_menu(const RunConfig& config, const Dataset& data);

}  // namespace sbfa
