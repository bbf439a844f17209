#include "sbfa/smc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sbfa/errors.hpp"
#include "sbfa/links.hpp"
#include "sbfa/parallel.hpp"
#include "sbfa/serialize.hpp"

namespace sbfa {

std::string proposal_kind_name(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::Prior: return "prior";
    case ProposalKind::Laplace: return "laplace";
    case ProposalKind::VB: return "vb";
  }
  return "prior";
}

double ess(const VectorXd& logw) {
  const double lse1 = log_sum_exp(logw);
  if (!std::isfinite(lse1))
    throw DegeneratePopulation("ess: all weights are -inf");
  const double lse2 = log_sum_exp(2.0 * logw);
  return std::exp(2.0 * lse1 - lse2);
}

namespace {

void invalidate_sigma_cache(ParticleSet& ps) {
  std::fill(ps.sigma_ok.begin(), ps.sigma_ok.end(), false);
}

void ensure_sigma_cache(const ModelSpec& spec, ParticleSet& ps) {
  parallel_for(ps.size(), [&](std::size_t m) {
    if (!ps.sigma_ok[m]) {
      try {
        ps.sigma_chol[m] = CholeskyFactor::from_matrix(model_covariance(spec, ps.thetas[m]));
      } catch (const ContractViolation&) {
        // numerically unfactorable covariance (extreme prior tail draw):
        // the particle keeps an empty factor and weighs -inf
        ps.sigma_chol[m] = CholeskyFactor{};
      }
      ps.sigma_ok[m] = true;
    }
  });
}

double cached_loglik_or_neg_inf(const ParticleSet& ps, std::size_t m, const VectorXd& y) {
  if (ps.sigma_chol[m].dim() == 0) return -std::numeric_limits<double>::infinity();
  return marginal_loglik_point_cached(ps.thetas[m], ps.sigma_chol[m], y);
}

// log L_i with the pre-update weights, then the weight update itself.
void apply_increments(SmcState& state, const VectorXd& logu) {
  const double log_li = log_sum_exp(state.ps.logw + logu) - log_sum_exp(state.ps.logw);
  if (!std::isfinite(log_li))
    throw DegeneratePopulation(
        "incremental weights are -inf for every particle at observation " +
        std::to_string(state.ps.i_processed + 1));
  state.ledger.add(log_li);
  state.ps.logw += logu;
}

void resample_in_place(SmcState& state) {
  ParticleSet& ps = state.ps;
  const std::vector<int> ancestors = multinomial_resample(ps.logw, state.root);
  std::vector<Theta> thetas(ps.size());
  std::vector<LatentBlock> latent(ps.latent.size());
  std::vector<CholeskyFactor> chols(ps.sigma_chol.size());
  std::vector<bool> ok(ps.sigma_ok.size());
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const int a = ancestors[m];
    thetas[m] = ps.thetas[a];
    if (!ps.latent.empty()) latent[m] = ps.latent[a];
    if (!ps.sigma_chol.empty()) {
      chols[m] = ps.sigma_chol[a];
      ok[m] = ps.sigma_ok[a];
    }
  }
  ps.thetas = std::move(thetas);
  ps.latent = std::move(latent);
  ps.sigma_chol = std::move(chols);
  ps.sigma_ok = std::move(ok);
}

void jitter_marginal(SmcState& state, const HmcBudget& budget) {
  const UnconstrainedTarget target =
      MarginalPosteriorTarget(state.spec, state.stats, state.empirical_cov_ptr()).as_target();
  std::vector<VectorXd> points(state.ps.size());
  parallel_for(state.ps.size(),
               [&](std::size_t m) { points[m] = to_unconstrained(state.spec, state.ps.thetas[m]); });
  pilot_then_short_chains(points, target, budget.pilot_steps, budget.short_steps,
                          budget.target_accept, budget.n_leapfrog, state.ps.streams);
  parallel_for(state.ps.size(),
               [&](std::size_t m) { state.ps.thetas[m] = to_constrained(state.spec, points[m]); });
  invalidate_sigma_cache(state.ps);
}

void jitter_augmented(SmcState& state, const HmcBudget& budget) {
  const AugmentedPosteriorTarget aug(state.spec, state.data_prefix);
  const UnconstrainedTarget target = aug.as_target();
  const int td = aug.theta_dim();
  const int k = state.spec.k;
  const int i = static_cast<int>(state.data_prefix.rows());
  std::vector<VectorXd> points(state.ps.size());
  parallel_for(state.ps.size(), [&](std::size_t m) {
    VectorXd v(aug.dim());
    v.head(td) = to_unconstrained(state.spec, state.ps.thetas[m]);
    for (int t = 0; t < i; ++t)
      v.segment(td + t * k, k) = state.ps.latent[m].z_rows.row(t).transpose();
    points[m] = std::move(v);
  });
  pilot_then_short_chains(points, target, budget.pilot_steps, budget.short_steps,
                          budget.target_accept, budget.n_leapfrog, state.ps.streams);
  parallel_for(state.ps.size(), [&](std::size_t m) {
    state.ps.thetas[m] = to_constrained(state.spec, points[m].head(td));
    for (int t = 0; t < i; ++t)
      state.ps.latent[m].z_rows.row(t) = points[m].segment(td + t * k, k).transpose();
  });
}

void maybe_resample_and_jitter(SmcState& state, const HmcBudget& budget) {
  if (ess(state.ps.logw) >= state.policy.ess_threshold) return;
  resample_in_place(state);
  if (state.spec.is_binary_link())
    jitter_augmented(state, budget);
  else
    jitter_marginal(state, budget);
  state.ps.logw.setZero();
  state.policy.trigger_log.push_back(state.ps.i_processed);
}

GaussianProposal build_proposal(const SmcState& state, ProposalKind kind, const Theta& theta,
                                const VectorXd& y, RngStream& rng, bool& fell_back) {
  fell_back = false;
  switch (kind) {
    case ProposalKind::Prior: break;
    case ProposalKind::Laplace:
      try {
        return laplace_proposal(state.spec, theta, y);
      } catch (const ApproximationFailure&) {
        fell_back = true;
      }
      break;
    case ProposalKind::VB:
      try {
        return vb_proposal(state.spec, theta, y, rng);
      } catch (const ApproximationFailure&) {
        fell_back = true;
      }
      break;
  }
  return prior_proposal(state.spec, theta);
}

}  // namespace

SmcState make_prior_state(const ModelSpec& spec, const MatrixXd* empirical_cov, int n_theta,
                          double gamma_fraction, RngStream root) {
  spec.validate();
  if (n_theta < 1) throw ContractViolation("make_prior_state: need at least one particle");
  if (!(gamma_fraction > 0.0 && gamma_fraction <= 1.0))
    throw ContractViolation("make_prior_state: gamma fraction must lie in (0, 1]");
  SmcState state;
  state.spec = spec;
  if (empirical_cov) state.empirical_cov = *empirical_cov;
  if (spec.has_psi() && empirical_cov == nullptr)
    throw ContractViolation("make_prior_state: empirical covariance required");
  state.stats = PrefixStats(spec.p);
  state.data_prefix = MatrixXd(0, spec.p);
  state.root = root;
  state.policy.ess_threshold = std::max(1.0, gamma_fraction * n_theta);

  ParticleSet& ps = state.ps;
  RngStream init_parent = root.substream(0xA110C);
  ps.thetas.resize(n_theta);
  ps.streams.resize(n_theta);
  ps.logw = VectorXd::Zero(n_theta);
  ps.sigma_chol.resize(spec.is_binary_link() ? 0 : n_theta);
  ps.sigma_ok.assign(spec.is_binary_link() ? 0 : n_theta, false);
  if (spec.is_binary_link()) {
    ps.latent.resize(n_theta);
    for (auto& lb : ps.latent) lb.z_rows = MatrixXd(0, spec.k);
  }
  parallel_for(static_cast<std::size_t>(n_theta), [&](std::size_t m) {
    RngStream draw = init_parent.substream(m);
    ps.thetas[m] = prior_sample(spec, empirical_cov, draw);
  });
  for (int m = 0; m < n_theta; ++m) ps.streams[m] = root.substream(0xB000000 + m);
  return state;
}

void ibis_step(SmcState& state, const VectorXd& y, const HmcBudget& budget) {
  if (state.spec.is_binary_link())
    throw ContractViolation("ibis_step: spec has a binary link; use ibis_lvm_step");
  ParticleSet& ps = state.ps;
  ensure_sigma_cache(state.spec, ps);
  VectorXd logu(ps.size());
  parallel_for(ps.size(), [&](std::size_t m) {
    logu[static_cast<Eigen::Index>(m)] = cached_loglik_or_neg_inf(ps, m, y);
  });
  apply_increments(state, logu);
  state.stats.append(y);
  ps.i_processed += 1;
  maybe_resample_and_jitter(state, budget);
}

void ibis_lvm_step(SmcState& state, const VectorXd& y, ProposalKind proposal,
                   const HmcBudget& budget) {
  if (!state.spec.is_binary_link())
    throw ContractViolation("ibis_lvm_step: spec has the identity link; use ibis_step");
  if (proposal == ProposalKind::Laplace && state.spec.link != Link::Logit)
    throw ContractViolation("ibis_lvm_step: the Laplace proposal requires the logit link");
  ParticleSet& ps = state.ps;
  VectorXd logu(ps.size());
  std::vector<char> fallbacks(ps.size(), 0);
  parallel_for(ps.size(), [&](std::size_t m) {
    const Theta& theta = ps.thetas[m];
    bool fell_back = false;
    const GaussianProposal q = build_proposal(state, proposal, theta, y, ps.streams[m], fell_back);
    fallbacks[m] = fell_back ? 1 : 0;
    const VectorXd z = q.sample(ps.streams[m]);
    const CholeskyFactor phi_chol = CholeskyFactor::from_matrix(theta.phi);
    const double log_prior_z = mvn_logpdf(z, VectorXd::Zero(state.spec.k), phi_chol);
    // grouping keeps the prior/proposal cancellation exact for the prior kind
    logu[static_cast<Eigen::Index>(m)] =
        augmented_loglik_point(state.spec, theta, z, y) + (log_prior_z - q.logpdf(z));
    ps.latent[m].append(z);
  });
  for (char f : fallbacks) state.proposal_fallbacks += f;
  apply_increments(state, logu);
  state.stats.append(y);
  state.data_prefix.conservativeResize(state.data_prefix.rows() + 1, state.spec.p);
  state.data_prefix.row(state.data_prefix.rows() - 1) = y.transpose();
  ps.i_processed += 1;
  maybe_resample_and_jitter(state, budget);
}

namespace {

// Plain importance pass from the prior over y_{1:n_init}, evidence only.
void seed_initial_evidence(SmcState& state, const Dataset& data, int n_init,
                           const BatchInitOptions& options, RngStream parent) {
  const ModelSpec& spec = state.spec;
  const int n_is = std::max(options.evidence_particles, 100);
  std::vector<Theta> thetas(n_is);
  std::vector<RngStream> streams(n_is);
  parallel_for(static_cast<std::size_t>(n_is), [&](std::size_t m) {
    RngStream draw = parent.substream(2 * m);
    thetas[m] = prior_sample(spec, state.empirical_cov_ptr(), draw);
    streams[m] = parent.substream(2 * m + 1);
  });
  std::vector<CholeskyFactor> chols(n_is);
  if (!spec.is_binary_link())
    parallel_for(static_cast<std::size_t>(n_is), [&](std::size_t m) {
      try {
        chols[m] = CholeskyFactor::from_matrix(model_covariance(spec, thetas[m]));
      } catch (const ContractViolation&) {
        chols[m] = CholeskyFactor{};
      }
    });
  VectorXd logw = VectorXd::Zero(n_is);
  SmcState is_view;  // minimal view for build_proposal
  is_view.spec = spec;
  for (int t = 0; t < n_init; ++t) {
    const VectorXd y = data.values.row(t).transpose();
    VectorXd logu(n_is);
    parallel_for(static_cast<std::size_t>(n_is), [&](std::size_t m) {
      if (spec.is_binary_link()) {
        bool fell_back = false;
        const GaussianProposal q =
            build_proposal(is_view, options.proposal, thetas[m], y, streams[m], fell_back);
        const VectorXd z = q.sample(streams[m]);
        const CholeskyFactor phi_chol = CholeskyFactor::from_matrix(thetas[m].phi);
        logu[static_cast<Eigen::Index>(m)] =
            augmented_loglik_point(spec, thetas[m], z, y) +
            mvn_logpdf(z, VectorXd::Zero(spec.k), phi_chol) - q.logpdf(z);
      } else {
        logu[static_cast<Eigen::Index>(m)] =
            chols[m].dim() == 0 ? -std::numeric_limits<double>::infinity()
                                : marginal_loglik_point_cached(thetas[m], chols[m], y);
      }
    });
    const double log_li = log_sum_exp(logw + logu) - log_sum_exp(logw);
    if (!std::isfinite(log_li))
      throw DegeneratePopulation("initial-evidence importance pass degenerated at observation " +
                                 std::to_string(t + 1));
    state.ledger.add(log_li);
    logw += logu;
  }
}

}  // namespace

SmcState initialize_with_batch(const ModelSpec& spec, const Dataset& data,
                               const MatrixXd* empirical_cov, int n_init, int n_theta,
                               double gamma_fraction, const HmcBudget& budget,
                               const BatchInitOptions& options, RngStream root) {
  if (n_init < 0 || n_init > data.n())
    throw ContractViolation("initialize_with_batch: n_init out of range");
  SmcState state = make_prior_state(spec, empirical_cov, n_theta, gamma_fraction, root);
  if (n_init == 0) return state;

  const MatrixXd prefix = data.values.topRows(n_init);
  for (int t = 0; t < n_init; ++t) state.stats.append(prefix.row(t).transpose());
  state.data_prefix = prefix;
  state.ps.i_processed = n_init;

  // Reference chain on the initial block, thinned into the particle slots.
  RngStream chain_rng = root.substream(0xBA7C4);
  const int thin = std::max(1, options.thin);
  if (spec.is_binary_link()) {
    const AugmentedPosteriorTarget aug(spec, prefix);
    const UnconstrainedTarget target = aug.as_target();
    const int td = aug.theta_dim();
    VectorXd v0(aug.dim());
    v0.head(td) = to_unconstrained(spec, state.ps.thetas[0]);
    v0.tail(n_init * spec.k).setZero();
    AdaptResult ar = adapt(v0, target, options.adapt_steps, budget.target_accept, chain_rng);
    VectorXd v = ar.v_end;
    for (std::size_t m = 0; m < state.ps.size(); ++m) {
      for (int s = 0; s < thin; ++s) v = hmc_step(v, target, ar.config, chain_rng).v;
      state.ps.thetas[m] = to_constrained(spec, v.head(td));
      LatentBlock lb;
      lb.z_rows = MatrixXd(n_init, spec.k);
      for (int t = 0; t < n_init; ++t)
        lb.z_rows.row(t) = v.segment(td + t * spec.k, spec.k).transpose();
      state.ps.latent[m] = std::move(lb);
    }
  } else {
    const UnconstrainedTarget target =
        MarginalPosteriorTarget(spec, state.stats, state.empirical_cov_ptr()).as_target();
    const VectorXd v0 = to_unconstrained(spec, state.ps.thetas[0]);
    AdaptResult ar = adapt(v0, target, options.adapt_steps, budget.target_accept, chain_rng);
    VectorXd v = ar.v_end;
    for (std::size_t m = 0; m < state.ps.size(); ++m) {
      for (int s = 0; s < thin; ++s) v = hmc_step(v, target, ar.config, chain_rng).v;
      state.ps.thetas[m] = to_constrained(spec, v);
    }
    invalidate_sigma_cache(state.ps);
  }
  state.ps.logw.setZero();

  if (options.seed_evidence) {
    seed_initial_evidence(state, data, n_init, options, root.substream(0x15EED));
  } else {
    state.init_evidence_missing = true;
    for (int t = 0; t < n_init; ++t) state.ledger.add(0.0);
  }
  return state;
}

namespace {

template <typename Fn>
void for_each_free_scalar(const ModelSpec& spec, const Theta& theta, Fn&& fn) {
  for (int r = 0; r < spec.p; ++r)
    for (int c = 0; c < spec.k; ++c)
      if (spec.cell(r, c).kind != CellKind::FixedValue)
        fn("lambda[" + std::to_string(r + 1) + "," + std::to_string(c + 1) + "]",
           theta.lambda(r, c));
  for (int j = 0; j < spec.p; ++j) fn("alpha[" + std::to_string(j + 1) + "]", theta.alpha[j]);
  const int d = spec.phi_dim();
  const bool phi_free = spec.is_saturated() || spec.factor_cov_mode != FactorCovMode::Identity;
  if (phi_free) {
    const bool corr =
        spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        if (corr && i == j) continue;  // unit diagonal is not a parameter
        fn("phi[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]", theta.phi(i, j));
      }
  }
  if (spec.has_psi())
    for (int j = 0; j < spec.p; ++j) fn("psi[" + std::to_string(j + 1) + "]", theta.psi_diag[j]);
}

}  // namespace

std::vector<std::pair<std::string, double>> flatten_free_scalars(const ModelSpec& spec,
                                                                 const Theta& theta) {
  std::vector<std::pair<std::string, double>> out;
  for_each_free_scalar(spec, theta,
                       [&](const std::string& name, double value) { out.emplace_back(name, value); });
  return out;
}

namespace {

double weighted_quantile(std::vector<std::pair<double, double>>& value_weight, double q) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& vw : value_weight) total += vw.second;
  double acc = 0.0;
  for (const auto& vw : value_weight) {
    acc += vw.second;
    if (acc >= q * total) return vw.first;
  }
  return value_weight.back().first;
}

}  // namespace

std::vector<SummaryRow> posterior_summary(const ParticleSet& ps, const ModelSpec& spec) {
  if (ps.thetas.empty()) return {};
  const double lse = log_sum_exp(ps.logw);
  VectorXd w = (ps.logw.array() - lse).exp();

  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // per scalar, per particle
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const Theta fixed = fix_loading_signs_one(spec, ps.thetas[m]);
    std::size_t idx = 0;
    for_each_free_scalar(spec, fixed, [&](const std::string& name, double value) {
      if (m == 0) {
        names.push_back(name);
        values.emplace_back(ps.size());
      }
      values[idx][m] = value;
      ++idx;
    });
  }
  std::vector<SummaryRow> rows(names.size());
  for (std::size_t s = 0; s < names.size(); ++s) {
    SummaryRow row;
    row.name = names[s];
    double mean = 0.0;
    std::vector<std::pair<double, double>> vw(ps.size());
    for (std::size_t m = 0; m < ps.size(); ++m) {
      mean += w[static_cast<Eigen::Index>(m)] * values[s][m];
      vw[m] = {values[s][m], w[static_cast<Eigen::Index>(m)]};
    }
    row.mean = mean;
    row.q025 = weighted_quantile(vw, 0.025);
    row.q500 = weighted_quantile(vw, 0.5);
    row.q975 = weighted_quantile(vw, 0.975);
    rows[s] = std::move(row);
  }
  return rows;
}

MatrixXd predictive_draw(const ParticleSet& ps, const ModelSpec& spec, RngStream& rng) {
  MatrixXd draws(ps.size(), spec.p);
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const Theta& theta = ps.thetas[m];
    if (spec.is_binary_link()) {
      const CholeskyFactor phi_chol = CholeskyFactor::from_matrix(theta.phi);
      const VectorXd z = sample_mvn(VectorXd::Zero(spec.k), phi_chol, rng);
      const VectorXd eta = theta.alpha + theta.lambda * z;
      for (int j = 0; j < spec.p; ++j) {
        const double pi =
            spec.link == Link::Logit ? sigmoid(eta[j]) : std_normal_cdf(eta[j]);
        draws(static_cast<Eigen::Index>(m), j) = rng.next_uniform() < pi ? 1.0 : 0.0;
      }
    } else {
      const CholeskyFactor chol = CholeskyFactor::from_matrix(model_covariance(spec, theta));
      draws.row(static_cast<Eigen::Index>(m)) = sample_mvn(theta.alpha, chol, rng).transpose();
    }
  }
  return draws;
}

MatrixXd latent_readout(const ParticleSet& ps, const ModelSpec& spec, const VectorXd& y,
                        RngStream& rng) {
  if (spec.is_binary_link())
    throw ContractViolation("latent_readout: requires the identity link");
  MatrixXd draws(ps.size(), spec.k);
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const GaussianMoments g = latent_conditional_posterior(spec, ps.thetas[m], y);
    draws.row(static_cast<Eigen::Index>(m)) = sample_mvn(g.mean, g.cov_chol, rng).transpose();
  }
  return draws;
}

void save_checkpoint(const SmcState& state, const std::string& path) {
  Json j;
  j["format"] = "sbfa-checkpoint";
  j["version"] = 1;
  j["spec"] = spec_to_json(state.spec);
  j["empirical_cov"] = matrix_to_json(state.empirical_cov);
  j["i_processed"] = state.ps.i_processed;
  j["logw"] = vector_to_json(state.ps.logw);
  Json thetas = Json::array();
  for (const auto& t : state.ps.thetas) thetas.push_back(theta_to_json(t));
  j["thetas"] = std::move(thetas);
  Json latent = Json::array();
  for (const auto& lb : state.ps.latent) latent.push_back(matrix_to_json(lb.z_rows));
  j["latent"] = std::move(latent);
  Json streams = Json::array();
  for (const auto& s : state.ps.streams) streams.push_back(stream_to_json(s));
  j["streams"] = std::move(streams);
  j["root"] = stream_to_json(state.root);
  Json increments = Json::array();
  for (double inc : state.ledger.increments) increments.push_back(real_to_json(inc));
  j["ledger_increments"] = std::move(increments);
  j["ess_threshold"] = state.policy.ess_threshold;
  j["trigger_log"] = state.policy.trigger_log;
  j["stats_n"] = state.stats.n;
  j["stats_sum_y"] = vector_to_json(state.stats.sum_y);
  j["stats_sum_yy"] = matrix_to_json(state.stats.sum_yy);
  j["data_prefix"] = matrix_to_json(state.data_prefix);
  j["proposal_fallbacks"] = state.proposal_fallbacks;
  j["init_evidence_missing"] = state.init_evidence_missing;
  std::ofstream out(path);
  if (!out) throw DataError("save_checkpoint: cannot open " + path);
  out << j.dump() << "\n";
}

SmcState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_checkpoint: cannot open " + path);
  Json j;
  in >> j;
  if (j.value("format", "") != "sbfa-checkpoint" || j.value("version", 0) != 1)
    throw DataError("load_checkpoint: unrecognized checkpoint format");
  SmcState state;
  state.spec = spec_from_json(j.at("spec"));
  state.empirical_cov = matrix_from_json(j.at("empirical_cov"));
  state.ps.i_processed = j.at("i_processed").get<int>();
  state.ps.logw = vector_from_json(j.at("logw"));
  for (const auto& t : j.at("thetas")) state.ps.thetas.push_back(theta_from_json(t));
  for (const auto& lb : j.at("latent")) {
    LatentBlock block;
    block.z_rows = matrix_from_json(lb);
    state.ps.latent.push_back(std::move(block));
  }
  for (const auto& s : j.at("streams")) state.ps.streams.push_back(stream_from_json(s));
  state.root = stream_from_json(j.at("root"));
  for (const auto& inc : j.at("ledger_increments")) state.ledger.add(real_from_json(inc));
  state.policy.ess_threshold = j.at("ess_threshold").get<double>();
  state.policy.trigger_log = j.at("trigger_log").get<std::vector<int>>();
  state.stats = PrefixStats(state.spec.p);
  state.stats.n = j.at("stats_n").get<int>();
  state.stats.sum_y = vector_from_json(j.at("stats_sum_y"));
  state.stats.sum_yy = matrix_from_json(j.at("stats_sum_yy"));
  state.data_prefix = matrix_from_json(j.at("data_prefix"));
  state.proposal_fallbacks = j.at("proposal_fallbacks").get<long>();
  state.init_evidence_missing = j.at("init_evidence_missing").get<bool>();
  const std::size_t n = state.ps.size();
  state.ps.sigma_chol.resize(state.spec.is_binary_link() ? 0 : n);
  state.ps.sigma_ok.assign(state.spec.is_binary_link() ? 0 : n, false);
  return state;
}

SmcEngine::SmcEngine(ModelSpec spec, const Dataset& data, EngineConfig config, RngStream root)
    : data_(data), config_(config) {
  spec.validate();
  data_.validate();
  if (data_.p() != spec.p) throw ContractViolation("engine: dataset width does not match spec");
  const bool binary_data = data_.kind == Dataset::Kind::Binary;
  if (binary_data != spec.is_binary_link())
    throw ContractViolation("engine: dataset kind does not match the spec link");

  MatrixXd cov;
  const MatrixXd* cov_ptr = nullptr;
  if (spec.has_psi()) {
    if (data_.n() < 2) throw DataError("engine: need at least two observations");
    const MatrixXd centered = data_.values.rowwise() - data_.values.colwise().mean();
    cov = centered.transpose() * centered / static_cast<double>(data_.n() - 1);
    for (int jj = 0; jj < spec.p; ++jj)
      if (!(cov(jj, jj) > 0.0)) throw DataError("engine: item " + std::to_string(jj + 1) +
                                                " has zero variance");
    cov_ptr = &cov;
  }
  state_ = initialize_with_batch(spec, data_, cov_ptr, config_.n_init, config_.n_theta,
                                 config_.gamma_fraction, config_.hmc, config_.init, root);
}

void SmcEngine::step() {
  if (done()) return;
  const VectorXd y = data_.values.row(state_.ps.i_processed).transpose();
  if (state_.spec.is_binary_link())
    ibis_lvm_step(state_, y, config_.proposal, config_.hmc);
  else
    ibis_step(state_, y, config_.hmc);
}

}  // namespace sbfa
