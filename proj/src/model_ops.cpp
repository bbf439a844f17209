#include "sbfa/model_ops.hpp"

#include <cmath>

#include "sbfa/errors.hpp"
#include "sbfa/links.hpp"

namespace sbfa {

MatrixXd model_covariance(const ModelSpec& spec, const Theta& theta) {
  if (spec.is_saturated()) {
    const VectorXd s = theta.psi_diag.cwiseSqrt();
    return s.asDiagonal() * theta.phi * s.asDiagonal();
  }
  MatrixXd sigma = theta.lambda * theta.phi * theta.lambda.transpose();
  if (spec.residual_mode == ResidualMode::DiagonalInvGamma)
    sigma += MatrixXd(theta.psi_diag.asDiagonal());
  else
    sigma += MatrixXd::Identity(spec.p, spec.p);
  return sigma;
}

VectorXd residual_rates(const ModelSpec& spec, const MatrixXd& empirical_cov) {
  if (empirical_cov.rows() != spec.p || empirical_cov.cols() != spec.p)
    throw ContractViolation("residual_rates: empirical covariance must be p x p");
  const MatrixXd inv = CholeskyFactor::from_matrix(empirical_cov).inverse();
  VectorXd rates(spec.p);
  for (int j = 0; j < spec.p; ++j) rates[j] = (spec.c0 - 1.0) / inv(j, j);
  return rates;
}

double prior_logpdf_with_rates(const ModelSpec& spec, const Theta& theta,
                               const VectorXd* psi_rates) {
  if (spec.has_psi() && psi_rates == nullptr)
    throw ContractViolation("prior_logpdf: residual rates required");
  double lp = 0.0;
  for (int r = 0; r < spec.p; ++r)
    for (int c = 0; c < spec.k; ++c) {
      const auto& cell = spec.cell(r, c);
      if (cell.kind == CellKind::Free)
        lp += normal_logpdf(theta.lambda(r, c), 0.0, spec.loading_prior_sd);
      else if (cell.kind == CellKind::ApproxZero)
        lp += normal_logpdf(theta.lambda(r, c), 0.0, spec.approx_zero_sd);
    }
  for (int j = 0; j < spec.p; ++j)
    lp += normal_logpdf(theta.alpha[j], 0.0, spec.intercept_prior_sd);
  if (spec.is_saturated())
    lp += lkj_logpdf(CholeskyFactor::from_matrix(theta.phi), spec.sat_lkj_eta);
  else if (spec.factor_cov_mode == FactorCovMode::LkjCorrelation)
    lp += lkj_logpdf(CholeskyFactor::from_matrix(theta.phi), spec.lkj_eta);
  else if (spec.factor_cov_mode == FactorCovMode::InverseWishart)
    lp += inv_wishart_logpdf(theta.phi, spec.iw_scale, spec.iw_df);
  if (spec.has_psi())
    for (int j = 0; j < spec.p; ++j)
      lp += inv_gamma_logpdf(theta.psi_diag[j], spec.c0, (*psi_rates)[j]);
  return lp;
}

double prior_logpdf(const ModelSpec& spec, const Theta& theta, const MatrixXd* empirical_cov) {
  if (spec.has_psi()) {
    if (empirical_cov == nullptr)
      throw ContractViolation("prior_logpdf: empirical covariance required for residual prior");
    const VectorXd rates = residual_rates(spec, *empirical_cov);
    return prior_logpdf_with_rates(spec, theta, &rates);
  }
  return prior_logpdf_with_rates(spec, theta, nullptr);
}

Theta prior_sample(const ModelSpec& spec, const MatrixXd* empirical_cov, RngStream& rng) {
  Theta theta = Theta::zeros(spec);
  for (int r = 0; r < spec.p; ++r)
    for (int c = 0; c < spec.k; ++c) {
      const auto& cell = spec.cell(r, c);
      if (cell.kind == CellKind::Free)
        theta.lambda(r, c) = spec.loading_prior_sd * rng.next_normal();
      else if (cell.kind == CellKind::ApproxZero)
        theta.lambda(r, c) = spec.approx_zero_sd * rng.next_normal();
    }
  for (int j = 0; j < spec.p; ++j) theta.alpha[j] = spec.intercept_prior_sd * rng.next_normal();

  const int d = spec.phi_dim();
  const bool lkj_phi = spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation;
  if (lkj_phi && d > 1) {
    // LKJ draw through its canonical-partial-correlation factorisation.
    const double eta = spec.is_saturated() ? spec.sat_lkj_eta : spec.lkj_eta;
    VectorXd u(d * (d - 1) / 2);
    for (int i = 1; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        const double a = eta + 0.5 * (d - 2 - j);
        const double z = 2.0 * rng.next_symmetric_beta(a) - 1.0;
        u[strict_lower_index(i, j)] = std::atanh(z);
      }
    const MatrixXd w = corr_chol_from_cpc(u, d);
    theta.phi = w * w.transpose();
    theta.phi.diagonal().setOnes();
  } else if (!spec.is_saturated() && spec.factor_cov_mode == FactorCovMode::InverseWishart) {
    // Bartlett draw of Wishart(scale^-1, df), then invert.
    const MatrixXd v = CholeskyFactor::from_matrix(spec.iw_scale).inverse();
    const MatrixXd lv = CholeskyFactor::from_matrix(v).lower;
    MatrixXd a = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      a(i, i) = std::sqrt(rng.next_chi2(spec.iw_df - i));
      for (int j = 0; j < i; ++j) a(i, j) = rng.next_normal();
    }
    const MatrixXd x = lv * a;
    theta.phi = CholeskyFactor::from_matrix(x * x.transpose()).inverse();
  }

  if (spec.has_psi()) {
    if (empirical_cov == nullptr)
      throw ContractViolation("prior_sample: empirical covariance required for residual prior");
    const VectorXd rates = residual_rates(spec, *empirical_cov);
    for (int j = 0; j < spec.p; ++j) theta.psi_diag[j] = rates[j] / rng.next_gamma(spec.c0);
  }
  return theta;
}

double marginal_loglik_point(const ModelSpec& spec, const Theta& theta, const VectorXd& y) {
  if (spec.is_binary_link())
    throw ContractViolation("marginal_loglik_point: requires the identity link");
  const CholeskyFactor chol = CholeskyFactor::from_matrix(model_covariance(spec, theta));
  return mvn_logpdf(y, theta.alpha, chol);
}

double marginal_loglik_point_cached(const Theta& theta, const CholeskyFactor& sigma_chol,
                                    const VectorXd& y) {
  return mvn_logpdf(y, theta.alpha, sigma_chol);
}

double augmented_loglik_point(const ModelSpec& spec, const Theta& theta, const VectorXd& z,
                              const VectorXd& y) {
  if (!spec.is_binary_link())
    throw ContractViolation("augmented_loglik_point: requires a logit or probit link");
  if (y.size() != spec.p || z.size() != spec.k)
    throw ContractViolation("augmented_loglik_point: dimension mismatch");
  const VectorXd eta = theta.alpha + theta.lambda * z;
  double ll = 0.0;
  for (int j = 0; j < spec.p; ++j) {
    if (y[j] != 0.0 && y[j] != 1.0)
      throw ContractViolation("augmented_loglik_point: data must be binary");
    const double e = y[j] == 1.0 ? eta[j] : -eta[j];
    ll += spec.link == Link::Logit ? log_sigmoid(e) : log_std_normal_cdf(e);
  }
  return ll;
}

GaussianMoments latent_conditional_posterior(const ModelSpec& spec, const Theta& theta,
                                             const VectorXd& y) {
  if (spec.is_binary_link())
    throw ContractViolation("latent_conditional_posterior: requires the identity link");
  if (spec.k < 1) throw ContractViolation("latent_conditional_posterior: requires k >= 1");
  const VectorXd psi_inv =
      spec.residual_mode == ResidualMode::DiagonalInvGamma
          ? VectorXd(theta.psi_diag.cwiseInverse())
          : VectorXd(VectorXd::Ones(spec.p));
  const MatrixXd lt_psi_inv = theta.lambda.transpose() * psi_inv.asDiagonal();
  const MatrixXd phi_inv = CholeskyFactor::from_matrix(theta.phi).inverse();
  const MatrixXd precision = phi_inv + lt_psi_inv * theta.lambda;
  const MatrixXd cov = CholeskyFactor::from_matrix(precision).inverse();
  GaussianMoments g{cov * (lt_psi_inv * (y - theta.alpha)), CholeskyFactor::from_matrix(cov)};
  return g;
}

void PrefixStats::append(const VectorXd& y) {
  ++n;
  sum_y += y;
  sum_yy += y * y.transpose();
}

}  // namespace sbfa
