#pragma once

#include <vector>

#include "sbfa/model_ops.hpp"
#include "sbfa/rng.hpp"

namespace sbfa {

struct HmcConfig {
  double step_size = 0.1;
  int n_leapfrog = 32;  // per-transition count is drawn uniform on [1, n_leapfrog]
  VectorXd mass_diag;
  double target_accept = 0.8;
  int adapt_steps = 0;  // 0 = frozen

  void validate(int dim) const;
};

struct ChainStats {
  long n_accepted = 0;
  long n_total = 0;
  long n_divergent = 0;
  double final_step_size = 0.0;

  double accept_rate() const {
    return n_total > 0 ? static_cast<double>(n_accepted) / static_cast<double>(n_total) : 0.0;
  }
  void merge(const ChainStats& other) {
    n_accepted += other.n_accepted;
    n_total += other.n_total;
    n_divergent += other.n_divergent;
  }
};

struct LeapfrogResult {
  VectorXd v;
  VectorXd momentum;
  bool diverged = false;
};

// n_steps symplectic leapfrog steps with diagonal mass. Non-finite values of
// the gradient or state raise the divergence flag.
LeapfrogResult leapfrog(const VectorXd& v, const VectorXd& momentum,
                        const UnconstrainedTarget& target, const HmcConfig& config, int n_steps);

struct HmcStepResult {
  VectorXd v;
  bool accepted = false;
  bool divergent = false;
  double delta_h = 0.0;
  double accept_prob = 0.0;
};

// One Metropolis-adjusted HMC transition with a jittered leapfrog count.
// Divergences (|dH| > 1000 or non-finite trajectory) are always rejected.
HmcStepResult hmc_step(const VectorXd& v, const UnconstrainedTarget& target,
                       const HmcConfig& config, RngStream& rng);

struct AdaptResult {
  HmcConfig config;  // adaptation frozen
  VectorXd v_end;
  ChainStats stats;
};

// Dual-averaging step-size adaptation toward target_accept with a diagonal
// mass matrix estimated from samples in the second half of the window.
// n_steps == 0 returns the initial configuration unchanged.
AdaptResult adapt(const VectorXd& v0, const UnconstrainedTarget& target, int n_steps,
                  double target_accept, RngStream& rng, const HmcConfig* init = nullptr);

struct JitterResult {
  HmcConfig config;
  ChainStats pilot_stats;
  ChainStats short_stats;
};

// Appendix-style jitter protocol: one long adaptive chain on the first
// particle fixes the tuning, then every other particle runs a short chain
// with that configuration, in parallel, starting from its own value. Each
// particle keeps the last state of its chain. short_steps == 0 is a no-op.
// Throws TuningFailure when more than half of the pilot transitions diverge.
JitterResult pilot_then_short_chains(std::vector<VectorXd>& particles,
                                     const UnconstrainedTarget& target, int pilot_steps,
                                     int short_steps, double target_accept, int n_leapfrog,
                                     std::vector<RngStream>& streams);

}  // namespace sbfa
