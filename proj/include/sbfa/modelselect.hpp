#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbfa/smc.hpp"

namespace sbfa {

// Canonical model presets.
//   EZ:    leading loading 1 per factor, exact zeros off-block, inverse-Wishart
//          factor covariance.
//   AZ:    as EZ with the exact zeros replaced by near-zero-prior cells.
//   EFAk:  lower-triangular free loadings, identity factor covariance.
//   SAT:   saturated covariance diag(s) R diag(s), R ~ LKJ.
// EZ/AZ assign items to factors in contiguous equal blocks and require p to
// be a multiple of k.
ModelSpec preset_spec(const std::string& label, int p, int k, Link link);

// Parses labels like "EZ", "AZ", "EFA2", "SAT" into (kind, k).
bool parse_preset_label(const std::string& label, std::string& kind, int& k);

struct ModelMenu {
  std::vector<std::pair<std::string, ModelSpec>> entries;

  void add(const std::string& label, ModelSpec spec);
  void validate() const;  // unique labels, shared p and link family
  std::size_t size() const { return entries.size(); }
};

struct MenuRunResult {
  std::vector<std::string> labels;
  std::vector<SmcState> states;

  const SmcState& state_for(const std::string& label) const;
};

// Runs every menu entry over the same observation order with per-model
// independent root streams derived from master. The callback (optional) fires
// after each processed observation of each model.
using MenuStepCallback =
    std::function<void(const std::string& label, const SmcEngine& engine, bool resampled)>;
MenuRunResult run_menu(const ModelMenu& menu, const Dataset& data, const EngineConfig& config,
                       RngStream master, const MenuStepCallback& callback = nullptr);

struct ComparisonTable {
  std::vector<std::string> labels;
  VectorXd final_evidence;
  MatrixXd lbf;  // lbf(i,j) = evidence_i - evidence_j

  static ComparisonTable build(const std::vector<std::string>& labels,
                               const std::vector<const EvidenceLedger*>& ledgers);
  // Indices sorted by decreasing final evidence.
  std::vector<int> ranking() const;
};

// LBF_i = cumulativeA_i - cumulativeB_i over the shared index range.
std::vector<std::pair<int, double>> lbf_trajectory(const EvidenceLedger& a,
                                                   const EvidenceLedger& b);

// Jeffreys-style qualitative tag: substantial when exp(lbf) >= 4.
std::string jeffreys_label(double lbf);

// The ledger's cumulative sequence under its prequential scoring-rule name.
std::vector<double> prequential_log_score(const EvidenceLedger& ledger);

}  // namespace sbfa
