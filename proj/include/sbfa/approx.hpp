#pragma once

#include "sbfa/distributions.hpp"
#include "sbfa/model_spec.hpp"

namespace sbfa {

// Gaussian proposal q(z) for one observation's latent row.
struct GaussianProposal {
  VectorXd mean;
  CholeskyFactor cov_chol;

  double logpdf(const VectorXd& z) const { return mvn_logpdf(z, mean, cov_chol); }
  VectorXd sample(RngStream& rng) const { return sample_mvn(mean, cov_chol, rng); }
};

// Gradient of l(z | y, theta) = log f(y | z, theta) - (1/2) z^T Phi^-1 z for
// the logit link: -Phi^-1 z + sum_j dpi_j/dz {y_j/pi_j - (1-y_j)/(1-pi_j)}.
VectorXd score(const ModelSpec& spec, const Theta& theta, const VectorXd& z, const VectorXd& y);

// Expected information: Phi^-1 + sum_j (dpi_j/dz)(dpi_j/dz)^T / [pi_j(1-pi_j)].
// Independent of y.
MatrixXd fisher_information(const ModelSpec& spec, const Theta& theta, const VectorXd& z);

// Negative Hessian of l at z (logit link), using the analytic second
// derivative pi(1-pi)(1-2pi) of the response function.
MatrixXd observed_information(const ModelSpec& spec, const Theta& theta, const VectorXd& z,
                              const VectorXd& y);

// Newton iterations z <- z + I(z)^-1 score(z) until the sup-norm of the score
// drops below tol. Throws ApproximationFailure on non-convergence.
VectorXd fisher_scoring_mode(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                             const VectorXd& z0, double tol = 1e-8, int max_iter = 100);

// N(mode, I(mode)^-1); set use_observed_information for the observed-Hessian
// covariance variant.
GaussianProposal laplace_proposal(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                                  bool use_observed_information = false);

struct VbOptions {
  int n_iters = 200;
  int mc_samples = 4;
  double step_scale = 0.1;  // step at iteration t is step_scale / sqrt(t)
};

// Mean-field Gaussian fitted by reparameterized stochastic gradient ascent on
// the evidence lower bound. Works for both binary links. elbo_trace, when
// given, receives the per-iteration ELBO estimates.
GaussianProposal vb_proposal(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                             RngStream& rng, const VbOptions& options = {},
                             std::vector<double>* elbo_trace = nullptr);

// The latent prior N(0, Phi) as a proposal (Eq. weight then reduces to the
// augmented likelihood).
GaussianProposal prior_proposal(const ModelSpec& spec, const Theta& theta);

}  // namespace sbfa
