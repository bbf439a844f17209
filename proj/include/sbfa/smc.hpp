#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbfa/approx.hpp"
#include "sbfa/hmc.hpp"
#include "sbfa/model_ops.hpp"

namespace sbfa {

enum class ProposalKind { Prior, Laplace, VB };

std::string proposal_kind_name(ProposalKind kind);

// Per-step log predictive increments log L_i and their running sum; the
// cumulative value at i is the log model evidence of y_{1:i} (equivalently
// the prequential log score).
struct EvidenceLedger {
  std::vector<double> increments;
  std::vector<double> cumulative;

  void add(double log_li) {
    increments.push_back(log_li);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + log_li);
  }
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  std::size_t size() const { return increments.size(); }
};

struct DegeneracyPolicy {
  double ess_threshold = 0.0;      // absolute count in (1, N]
  std::vector<int> trigger_log;    // 1-based observation indices of resample events
};

struct HmcBudget {
  int pilot_steps = 500;
  int short_steps = 10;
  double target_accept = 0.8;
  int n_leapfrog = 32;
};

// ESS(w) = (sum w)^2 / sum w^2, computed in log space; in [1, N].
double ess(const VectorXd& logw);

struct ParticleSet {
  std::vector<Theta> thetas;
  VectorXd logw;
  std::vector<LatentBlock> latent;     // one block per particle for binary links
  std::vector<RngStream> streams;      // owned per slot; survive resampling
  int i_processed = 0;

  // Covariance factor cache for the identity link, invalidated by jitter.
  std::vector<CholeskyFactor> sigma_chol;
  std::vector<bool> sigma_ok;

  std::size_t size() const { return thetas.size(); }
};

// Full engine state for one model over one data stream.
struct SmcState {
  ModelSpec spec;
  MatrixXd empirical_cov;   // p x p; meaningful iff spec.has_psi()
  ParticleSet ps;
  EvidenceLedger ledger;
  DegeneracyPolicy policy;
  PrefixStats stats;        // continuous sufficient statistics
  MatrixXd data_prefix;     // rows seen so far (kept for binary jitter targets)
  RngStream root;           // single-threaded draws (resampling)
  long proposal_fallbacks = 0;
  bool init_evidence_missing = false;

  SmcState() : stats(0) {}
  const MatrixXd* empirical_cov_ptr() const {
    return spec.has_psi() ? &empirical_cov : nullptr;
  }
};

// Fresh prior-initialized state. empirical_cov may be null when the spec has
// no residual variances.
SmcState make_prior_state(const ModelSpec& spec, const MatrixXd* empirical_cov, int n_theta,
                          double gamma_fraction, RngStream root);

// One IBIS step over theta particles (identity link).
void ibis_step(SmcState& state, const VectorXd& y, const HmcBudget& budget);

// One IBIS step over (theta, z_{1:i}) particles (binary links).
void ibis_lvm_step(SmcState& state, const VectorXd& y, ProposalKind proposal,
                   const HmcBudget& budget);

struct BatchInitOptions {
  int adapt_steps = 1000;
  int thin = 5;
  bool seed_evidence = true;            // estimate the ledger over the initial block
  int evidence_particles = 4000;        // importance-sampling population for that estimate
  ProposalKind proposal = ProposalKind::Laplace;  // latent proposal during seeding
};

// Initializes the particle set from a long batch HMC chain on y_{1:n_init}
// (prior initialization when n_init == 0). The ledger's first n_init
// increments come from a plain importance pass from the prior, or are marked
// unavailable when seeding is disabled.
SmcState initialize_with_batch(const ModelSpec& spec, const Dataset& data,
                               const MatrixXd* empirical_cov, int n_init, int n_theta,
                               double gamma_fraction, const HmcBudget& budget,
                               const BatchInitOptions& options, RngStream root);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double q025 = 0.0;
  double q500 = 0.0;
  double q975 = 0.0;
};

// Self-normalized weighted means and quantiles per scalar parameter; loading
// columns are sign-fixed first.
std::vector<SummaryRow> posterior_summary(const ParticleSet& ps, const ModelSpec& spec);

// Stable-named flattening of one parameter point's free scalars (no sign
// post-processing applied here).
std::vector<std::pair<std::string, double>> flatten_free_scalars(const ModelSpec& spec,
                                                                 const Theta& theta);

// One posterior predictive draw per particle (weights inherited from ps).
MatrixXd predictive_draw(const ParticleSet& ps, const ModelSpec& spec, RngStream& rng);

// One draw from pi(z | theta^m, y) per particle (identity link).
MatrixXd latent_readout(const ParticleSet& ps, const ModelSpec& spec, const VectorXd& y,
                        RngStream& rng);

// Versioned JSON snapshot, sufficient to resume with bit-identical
// continuation (RNG counters included).
void save_checkpoint(const SmcState& state, const std::string& path);
SmcState load_checkpoint(const std::string& path);

// Orchestrates one model over one dataset.
struct EngineConfig {
  int n_theta = 1000;
  double gamma_fraction = 0.5;
  ProposalKind proposal = ProposalKind::Laplace;
  int n_init = 0;
  HmcBudget hmc;
  BatchInitOptions init;
};

class SmcEngine {
 public:
  SmcEngine(ModelSpec spec, const Dataset& data, EngineConfig config, RngStream root);

  bool done() const { return state_.ps.i_processed >= data_.n(); }
  int current_index() const { return state_.ps.i_processed; }
  void step();
  void run() { while (!done()) step(); }

  SmcState& state() { return state_; }
  const SmcState& state() const { return state_; }
  const Dataset& data() const { return data_; }
  const EngineConfig& config() const { return config_; }

 private:
  Dataset data_;
  EngineConfig config_;
  SmcState state_;
};

}  // namespace sbfa
