#include "sbfa/modelselect.hpp"

#include <algorithm>
#include <cmath>

#include "sbfa/errors.hpp"

namespace sbfa {

bool parse_preset_label(const std::string& label, std::string& kind, int& k) {
  if (label == "EZ" || label == "AZ" || label == "SAT") {
    kind = label;
    k = 0;
    return true;
  }
  if (label.rfind("EFA", 0) == 0 && label.size() > 3) {
    const std::string digits = label.substr(3);
    if (digits.find_first_not_of("0123456789") != std::string::npos) return false;
    kind = "EFA";
    k = std::stoi(digits);
    return k >= 1;
  }
  return false;
}

ModelSpec preset_spec(const std::string& label, int p, int k, Link link) {
  std::string kind;
  int label_k = 0;
  if (!parse_preset_label(label, kind, label_k))
    throw ConfigError("unknown model preset: " + label);
  if (kind == "EFA") k = label_k;

  ModelSpec spec;
  spec.p = p;
  spec.k = kind == "SAT" ? 0 : k;
  spec.link = link;
  spec.residual_mode =
      link == Link::Identity ? ResidualMode::DiagonalInvGamma : ResidualMode::FixedIdentity;
  spec.loading_prior_sd = link == Link::Identity ? 1.0 : 2.0;
  spec.c0 = 2.5;
  spec.intercept_prior_sd = 10.0;
  spec.approx_zero_sd = 0.1;

  if (kind == "SAT") {
    if (link != Link::Identity)
      throw ConfigError("the SAT preset requires continuous data");
    spec.ident = Identification::Saturated;
    spec.factor_cov_mode = FactorCovMode::Identity;  // unused; phi slot holds R
    spec.sat_lkj_eta = 2.0;
    spec.validate();
    return spec;
  }
  if (k < 1) throw ConfigError(label + " preset requires k >= 1");
  spec.loading_pattern.assign(p * k, LoadingCell::fixed(0.0));

  if (kind == "EFA") {
    spec.ident = Identification::EfaLowerTriangular;
    spec.factor_cov_mode = FactorCovMode::Identity;
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < k; ++c)
        if (r >= c) spec.cell(r, c) = LoadingCell::free();
  } else {
    if (p % k != 0)
      throw ConfigError(label + " preset requires p divisible by k (contiguous item blocks)");
    spec.ident = Identification::LeadingOnes;
    spec.factor_cov_mode = FactorCovMode::InverseWishart;
    spec.iw_scale = MatrixXd::Identity(k, k);
    spec.iw_df = k + 4;  // identity scale, low information
    const int block = p / k;
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < k; ++c) {
        const bool in_block = r / block == c;
        if (in_block)
          spec.cell(r, c) = r % block == 0 ? LoadingCell::fixed(1.0) : LoadingCell::free();
        else
          spec.cell(r, c) = kind == "AZ" ? LoadingCell::approx_zero() : LoadingCell::fixed(0.0);
      }
  }
  spec.validate();
  return spec;
}

void ModelMenu::add(const std::string& label, ModelSpec spec) {
  entries.emplace_back(label, std::move(spec));
}

void ModelMenu::validate() const {
  if (entries.empty()) throw ConfigError("model menu is empty");
  const int p = entries.front().second.p;
  const bool binary = entries.front().second.is_binary_link();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].second.validate();
    if (entries[i].second.p != p)
      throw ContractViolation("model menu: item counts differ across entries");
    if (entries[i].second.is_binary_link() != binary)
      throw ContractViolation("model menu: mixed data kinds");
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i].first == entries[j].first)
        throw ContractViolation("model menu: duplicate label " + entries[i].first);
  }
}

const SmcState& MenuRunResult::state_for(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return states[i];
  throw ContractViolation("no menu entry named " + label);
}

MenuRunResult run_menu(const ModelMenu& menu, const Dataset& data, const EngineConfig& config,
                       RngStream master, const MenuStepCallback& callback) {
  menu.validate();
  MenuRunResult out;
  for (std::size_t im = 0; im < menu.entries.size(); ++im) {
    const auto& [label, spec] = menu.entries[im];
    SmcEngine engine(spec, data, config, master.substream(im));
    std::size_t triggers_seen = engine.state().policy.trigger_log.size();
    while (!engine.done()) {
      engine.step();
      const std::size_t triggers_now = engine.state().policy.trigger_log.size();
      if (callback) callback(label, engine, triggers_now != triggers_seen);
      triggers_seen = triggers_now;
    }
    out.labels.push_back(label);
    out.states.push_back(std::move(engine.state()));
  }
  return out;
}

ComparisonTable ComparisonTable::build(const std::vector<std::string>& labels,
                                       const std::vector<const EvidenceLedger*>& ledgers) {
  if (labels.size() != ledgers.size())
    throw ContractViolation("comparison table: label/ledger count mismatch");
  ComparisonTable table;
  table.labels = labels;
  const int m = static_cast<int>(labels.size());
  table.final_evidence = VectorXd(m);
  for (int i = 0; i < m; ++i) table.final_evidence[i] = ledgers[i]->total();
  table.lbf = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) table.lbf(i, j) = table.final_evidence[i] - table.final_evidence[j];
  return table;
}

std::vector<int> ComparisonTable::ranking() const {
  std::vector<int> idx(labels.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return final_evidence[a] > final_evidence[b]; });
  return idx;
}

std::vector<std::pair<int, double>> lbf_trajectory(const EvidenceLedger& a,
                                                   const EvidenceLedger& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::vector<std::pair<int, double>> traj(n);
  for (std::size_t i = 0; i < n; ++i)
    traj[i] = {static_cast<int>(i + 1), a.cumulative[i] - b.cumulative[i]};
  return traj;
}

std::string jeffreys_label(double lbf) {
  return lbf >= std::log(4.0) ? "substantial" : "inconclusive";
}

std::vector<double> prequential_log_score(const EvidenceLedger& ledger) {
  return ledger.cumulative;
}

}  // namespace sbfa
