#include "sbfa/hmc.hpp"

#include <cmath>

#include "sbfa/errors.hpp"
#include "sbfa/parallel.hpp"

namespace sbfa {

namespace {
constexpr double kDivergenceThreshold = 1000.0;

double kinetic(const VectorXd& momentum, const VectorXd& mass_diag) {
  return 0.5 * (momentum.array().square() / mass_diag.array()).sum();
}
}  // namespace

void HmcConfig::validate(int dim) const {
  if (!(step_size > 0.0)) throw ContractViolation("hmc: step size must be positive");
  if (n_leapfrog < 1) throw ContractViolation("hmc: leapfrog count must be >= 1");
  if (mass_diag.size() != dim) throw ContractViolation("hmc: mass dimension mismatch");
  if ((mass_diag.array() <= 0.0).any()) throw ContractViolation("hmc: mass must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw ContractViolation("hmc: target acceptance must lie in (0,1)");
}

LeapfrogResult leapfrog(const VectorXd& v, const VectorXd& momentum,
                        const UnconstrainedTarget& target, const HmcConfig& config, int n_steps) {
  LeapfrogResult r{v, momentum, false};
  const double eps = config.step_size;
  VectorXd grad(v.size());
  target(r.v, &grad);
  if (!grad.allFinite()) {
    r.diverged = true;
    return r;
  }
  for (int s = 0; s < n_steps; ++s) {
    r.momentum += 0.5 * eps * grad;
    r.v += eps * (r.momentum.array() / config.mass_diag.array()).matrix();
    if (!r.v.allFinite()) {
      r.diverged = true;
      return r;
    }
    target(r.v, &grad);
    if (!grad.allFinite()) {
      r.diverged = true;
      return r;
    }
    r.momentum += 0.5 * eps * grad;
  }
  return r;
}

HmcStepResult hmc_step(const VectorXd& v, const UnconstrainedTarget& target,
                       const HmcConfig& config, RngStream& rng) {
  const Eigen::Index dim = v.size();
  VectorXd momentum(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    momentum[i] = std::sqrt(config.mass_diag[i]) * rng.next_normal();
  const int n_steps =
      1 + static_cast<int>(rng.next_uniform() * config.n_leapfrog) % config.n_leapfrog;

  const double h0 = -target(v, nullptr) + kinetic(momentum, config.mass_diag);
  HmcStepResult out{v, false, false, 0.0, 0.0};
  const LeapfrogResult traj = leapfrog(v, momentum, target, config, n_steps);
  if (traj.diverged) {
    out.divergent = true;
    out.delta_h = std::numeric_limits<double>::infinity();
    return out;
  }
  const double h1 = -target(traj.v, nullptr) + kinetic(traj.momentum, config.mass_diag);
  out.delta_h = h1 - h0;
  if (!std::isfinite(out.delta_h) || std::abs(out.delta_h) > kDivergenceThreshold) {
    out.divergent = true;
    return out;
  }
  out.accept_prob = std::min(1.0, std::exp(-out.delta_h));
  if (rng.next_uniform() < out.accept_prob) {
    out.v = traj.v;
    out.accepted = true;
  }
  return out;
}

namespace {

// Nesterov dual averaging on log step size (Hoffman & Gelman defaults).
struct DualAveraging {
  double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
  double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  long t = 0;

  void reset(double eps0) {
    mu = std::log(10.0 * eps0);
    log_eps = std::log(eps0);
    log_eps_bar = std::log(eps0);
    h_bar = 0.0;
    t = 0;
  }
  void update(double accept_prob, double target) {
    ++t;
    const double frac = 1.0 / (t + t0);
    h_bar = (1.0 - frac) * h_bar + frac * (target - accept_prob);
    log_eps = mu - std::sqrt(static_cast<double>(t)) / gamma * h_bar;
    const double w = std::pow(static_cast<double>(t), -kappa);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
  }
  double current() const { return std::exp(log_eps); }
  double averaged() const { return std::exp(log_eps_bar); }
};

double find_initial_step(const VectorXd& v, const UnconstrainedTarget& target,
                         const HmcConfig& base, RngStream& rng) {
  HmcConfig cfg = base;
  cfg.n_leapfrog = 1;
  double eps = 0.1;
  cfg.step_size = eps;
  auto probe = [&](double e) {
    cfg.step_size = e;
    RngStream probe_rng = rng;  // reuse the same momenta across probes
    const HmcStepResult r = hmc_step(v, target, cfg, probe_rng);
    return r.divergent ? 0.0 : std::exp(std::min(0.0, -r.delta_h));
  };
  double a = probe(eps);
  const bool grow = a > 0.5;
  for (int iter = 0; iter < 40; ++iter) {
    const double next = grow ? eps * 2.0 : eps * 0.5;
    const double an = probe(next);
    if (grow ? an < 0.5 : an > 0.5) return grow ? eps : next;
    eps = next;
    a = an;
    if (eps > 1e4 || eps < 1e-10) break;
  }
  return eps;
}

}  // namespace

AdaptResult adapt(const VectorXd& v0, const UnconstrainedTarget& target, int n_steps,
                  double target_accept, RngStream& rng, const HmcConfig* init) {
  const int dim = static_cast<int>(v0.size());
  HmcConfig cfg;
  if (init) cfg = *init;
  if (cfg.mass_diag.size() != dim) cfg.mass_diag = VectorXd::Ones(dim);
  cfg.target_accept = target_accept;
  AdaptResult out{cfg, v0, {}};
  if (n_steps <= 0) {
    out.config.adapt_steps = 0;
    out.stats.final_step_size = out.config.step_size;
    return out;
  }

  cfg.step_size = find_initial_step(v0, target, cfg, rng);
  DualAveraging da;
  da.reset(cfg.step_size);

  // Window: [0, n_half) step size only; [n_half, n_settle) also collects
  // samples for the mass; the remainder recalibrates the step under the new
  // mass.
  const int n_half = n_steps / 2;
  const int n_settle = std::max(n_half + 1, (n_steps * 85) / 100);
  std::vector<VectorXd> samples;
  samples.reserve(n_settle - n_half);

  VectorXd v = v0;
  for (int t = 0; t < n_steps; ++t) {
    cfg.step_size = da.current();
    const HmcStepResult r = hmc_step(v, target, cfg, rng);
    v = r.v;
    out.stats.n_total++;
    if (r.accepted) out.stats.n_accepted++;
    if (r.divergent) out.stats.n_divergent++;
    da.update(r.divergent ? 0.0 : r.accept_prob, target_accept);
    if (t >= n_half && t < n_settle) samples.push_back(v);
    if (t + 1 == n_settle && samples.size() >= 10) {
      VectorXd mean = VectorXd::Zero(dim), var = VectorXd::Zero(dim);
      for (const auto& s : samples) mean += s;
      mean /= static_cast<double>(samples.size());
      for (const auto& s : samples) var += (s - mean).cwiseAbs2();
      var /= static_cast<double>(samples.size() - 1);
      const double n_s = static_cast<double>(samples.size());
      // Light shrinkage toward unit scale, as is conventional.
      cfg.mass_diag = (n_s / (n_s + 5.0)) * var.array() + 1e-3 * (5.0 / (n_s + 5.0));
      cfg.mass_diag = cfg.mass_diag.cwiseMax(1e-8);
      da.reset(da.averaged());
    }
  }
  cfg.step_size = da.averaged();
  cfg.adapt_steps = 0;
  out.config = cfg;
  out.v_end = v;
  out.stats.final_step_size = cfg.step_size;
  return out;
}

JitterResult pilot_then_short_chains(std::vector<VectorXd>& particles,
                                     const UnconstrainedTarget& target, int pilot_steps,
                                     int short_steps, double target_accept, int n_leapfrog,
                                     std::vector<RngStream>& streams) {
  JitterResult out;
  if (short_steps <= 0) return out;
  if (particles.empty()) return out;
  if (streams.size() != particles.size())
    throw ContractViolation("pilot_then_short_chains: one stream per particle required");

  HmcConfig base;
  base.n_leapfrog = n_leapfrog;
  AdaptResult pilot = adapt(particles[0], target, pilot_steps, target_accept, streams[0], &base);
  if (pilot_steps > 0 && pilot.stats.n_divergent * 2 > pilot.stats.n_total)
    throw TuningFailure("hmc pilot chain diverged on " +
                        std::to_string(pilot.stats.n_divergent) + " of " +
                        std::to_string(pilot.stats.n_total) + " transitions");
  particles[0] = pilot.v_end;
  out.config = pilot.config;
  out.pilot_stats = pilot.stats;

  std::vector<ChainStats> per_chain(particles.size());
  parallel_for(particles.size() - 1, [&](std::size_t idx) {
    const std::size_t m = idx + 1;
    VectorXd v = particles[m];
    ChainStats cs;
    for (int s = 0; s < short_steps; ++s) {
      const HmcStepResult r = hmc_step(v, target, out.config, streams[m]);
      v = r.v;
      cs.n_total++;
      if (r.accepted) cs.n_accepted++;
      if (r.divergent) cs.n_divergent++;
    }
    particles[m] = v;
    per_chain[m] = cs;
  });
  for (const auto& cs : per_chain) out.short_stats.merge(cs);
  out.short_stats.final_step_size = out.config.step_size;
  return out;
}

}  // namespace sbfa
