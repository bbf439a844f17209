#pragma once

#include <functional>
#include <optional>

#include "sbfa/distributions.hpp"
#include "sbfa/model_spec.hpp"
#include "sbfa/transforms.hpp"

namespace sbfa {

// Observation covariance: Lambda Phi Lambda^T + Psi for the identity link,
// diag(s) R diag(s) for the saturated model.
MatrixXd model_covariance(const ModelSpec& spec, const Theta& theta);

// Inverse-gamma rates (c0-1)/(S_y^-1)_jj for the residual variances.
VectorXd residual_rates(const ModelSpec& spec, const MatrixXd& empirical_cov);

double prior_logpdf(const ModelSpec& spec, const Theta& theta,
                    const MatrixXd* empirical_cov = nullptr);
// Same density with the residual rates already computed (null when the spec
// has no residual variances).
double prior_logpdf_with_rates(const ModelSpec& spec, const Theta& theta,
                               const VectorXd* psi_rates);
Theta prior_sample(const ModelSpec& spec, const MatrixXd* empirical_cov, RngStream& rng);

// Identity link: log N(y | alpha, Lambda Phi Lambda^T + Psi). This is the
// IBIS incremental weight u_i(theta).
double marginal_loglik_point(const ModelSpec& spec, const Theta& theta, const VectorXd& y);
// Same with the covariance factor precomputed (per-particle cache).
double marginal_loglik_point_cached(const Theta& theta, const CholeskyFactor& sigma_chol,
                                    const VectorXd& y);

// Binary links: log f(y | z, theta) with eta = alpha + Lambda z.
double augmented_loglik_point(const ModelSpec& spec, const Theta& theta, const VectorXd& z,
                              const VectorXd& y);

struct GaussianMoments {
  VectorXd mean;
  CholeskyFactor cov_chol;
};

// Exact Gaussian conditional of z given y under the identity link,
// N((Phi^-1 + L^T Psi^-1 L)^-1 L^T Psi^-1 (y - alpha), (Phi^-1 + L^T Psi^-1 L)^-1).
GaussianMoments latent_conditional_posterior(const ModelSpec& spec, const Theta& theta,
                                             const VectorXd& y);

// Running sufficient statistics of a continuous prefix y_{1:n}; the marginal
// posterior target is O(p^3) regardless of n.
struct PrefixStats {
  int n = 0;
  VectorXd sum_y;
  MatrixXd sum_yy;  // sum y y^T

  explicit PrefixStats(int p) : sum_y(VectorXd::Zero(p)), sum_yy(MatrixXd::Zero(p, p)) {}
  void append(const VectorXd& y);
  VectorXd mean() const { return n > 0 ? VectorXd(sum_y / n) : VectorXd(sum_y); }
};

// Callable handed to the HMC kernel; grad may be null.
struct UnconstrainedTarget {
  int dim = 0;
  std::function<double(const VectorXd& v, VectorXd* grad)> logpdf_grad;

  double operator()(const VectorXd& v, VectorXd* grad) const { return logpdf_grad(v, grad); }
};

// log pi(theta | y_{1:n}) + log-Jacobian on the unconstrained scale
// (continuous models; latent factors marginalised out).
class MarginalPosteriorTarget {
 public:
  MarginalPosteriorTarget(ModelSpec spec, PrefixStats stats, const MatrixXd* empirical_cov);
  double logpdf(const VectorXd& v, VectorXd* grad) const;
  UnconstrainedTarget as_target() const;
  const UnconstrainedLayout& layout() const { return layout_; }

 private:
  ModelSpec spec_;
  PrefixStats stats_;
  UnconstrainedLayout layout_;
  std::optional<VectorXd> psi_rates_;
};

// log pi(theta, z_{1:i} | y_{1:i}) + log-Jacobian over the concatenated
// unconstrained vector [theta | z_1 ... z_i] (binary models).
class AugmentedPosteriorTarget {
 public:
  AugmentedPosteriorTarget(ModelSpec spec, MatrixXd y_prefix);
  double logpdf(const VectorXd& v, VectorXd* grad) const;
  UnconstrainedTarget as_target() const;
  int theta_dim() const { return layout_.dim(); }
  int dim() const { return theta_dim() + static_cast<int>(y_prefix_.rows()) * spec_.k; }
  const UnconstrainedLayout& layout() const { return layout_; }

 private:
  ModelSpec spec_;
  MatrixXd y_prefix_;  // i x p
  UnconstrainedLayout layout_;
};

// Spec-facing wrappers. data_prefix holds one observation per row; latent is
// required for non-identity links and forbidden for the identity link.
double posterior_logpdf_unconstrained(const ModelSpec& spec, const VectorXd& v,
                                      const MatrixXd& data_prefix,
                                      const LatentBlock* latent = nullptr,
                                      const MatrixXd* empirical_cov = nullptr);
double posterior_logpdf_grad_unconstrained(const ModelSpec& spec, const VectorXd& v,
                                           const MatrixXd& data_prefix, VectorXd& grad,
                                           const LatentBlock* latent = nullptr,
                                           const MatrixXd* empirical_cov = nullptr);

}  // namespace sbfa
