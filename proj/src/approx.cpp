#include "sbfa/approx.hpp"

#include <cmath>

#include "sbfa/errors.hpp"
#include "sbfa/links.hpp"
#include "sbfa/model_ops.hpp"

namespace sbfa {

namespace {

void check_logit_binary(const ModelSpec& spec, const char* who) {
  if (spec.link != Link::Logit)
    throw ContractViolation(std::string(who) + ": derivatives are available for the logit link");
}

MatrixXd phi_inverse(const Theta& theta) {
  if (theta.phi.isIdentity(0.0)) return theta.phi;
  return CholeskyFactor::from_matrix(theta.phi).inverse();
}

}  // namespace

VectorXd score(const ModelSpec& spec, const Theta& theta, const VectorXd& z, const VectorXd& y) {
  check_logit_binary(spec, "score");
  const VectorXd eta = theta.alpha + theta.lambda * z;
  VectorXd resid(spec.p);
  for (int j = 0; j < spec.p; ++j) resid[j] = y[j] - sigmoid(eta[j]);
  return theta.lambda.transpose() * resid - phi_inverse(theta) * z;
}

MatrixXd fisher_information(const ModelSpec& spec, const Theta& theta, const VectorXd& z) {
  check_logit_binary(spec, "fisher_information");
  const VectorXd eta = theta.alpha + theta.lambda * z;
  MatrixXd info = phi_inverse(theta);
  for (int j = 0; j < spec.p; ++j) {
    const double pi = sigmoid(eta[j]);
    info += pi * (1.0 - pi) * theta.lambda.row(j).transpose() * theta.lambda.row(j);
  }
  return info;
}

MatrixXd observed_information(const ModelSpec& spec, const Theta& theta, const VectorXd& z,
                              const VectorXd& y) {
  check_logit_binary(spec, "observed_information");
  const VectorXd eta = theta.alpha + theta.lambda * z;
  MatrixXd info = phi_inverse(theta);
  for (int j = 0; j < spec.p; ++j) {
    const double pi = sigmoid(eta[j]);
    const double dpi = pi * (1.0 - pi);       // dpi/deta
    const double d2pi = dpi * (1.0 - 2.0 * pi);  // d2pi/deta2
    const double u = y[j] / pi - (1.0 - y[j]) / (1.0 - pi);
    const double curv = y[j] / (pi * pi) + (1.0 - y[j]) / ((1.0 - pi) * (1.0 - pi));
    const double h = d2pi * u - dpi * dpi * curv;  // d2 loglik / deta2
    info -= h * theta.lambda.row(j).transpose() * theta.lambda.row(j);
  }
  return info;
}

VectorXd fisher_scoring_mode(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                             const VectorXd& z0, double tol, int max_iter) {
  check_logit_binary(spec, "fisher_scoring_mode");
  VectorXd z = z0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const VectorXd g = score(spec, theta, z, y);
    if (g.lpNorm<Eigen::Infinity>() < tol) return z;
    const MatrixXd info = fisher_information(spec, theta, z);
    z += CholeskyFactor::from_matrix(info).solve(g);
    if (!z.allFinite())
      throw ApproximationFailure("fisher_scoring_mode: iterate became non-finite");
  }
  const double gnorm = score(spec, theta, z, y).lpNorm<Eigen::Infinity>();
  if (gnorm < 1e-5) return z;  // close enough for a proposal mean
  throw ApproximationFailure("fisher_scoring_mode: no convergence, |score| = " +
                             std::to_string(gnorm));
}

GaussianProposal laplace_proposal(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                                  bool use_observed_information) {
  const VectorXd mode =
      fisher_scoring_mode(spec, theta, y, VectorXd::Zero(spec.k));
  const MatrixXd info = use_observed_information ? observed_information(spec, theta, mode, y)
                                                 : fisher_information(spec, theta, mode);
  const MatrixXd cov = CholeskyFactor::from_matrix(info).inverse();
  return GaussianProposal{mode, CholeskyFactor::from_matrix(cov)};
}

GaussianProposal vb_proposal(const ModelSpec& spec, const Theta& theta, const VectorXd& y,
                             RngStream& rng, const VbOptions& options,
                             std::vector<double>* elbo_trace) {
  if (!spec.is_binary_link())
    throw ContractViolation("vb_proposal: requires a logit or probit link");
  const int k = spec.k;
  const MatrixXd phi_inv = phi_inverse(theta);
  const CholeskyFactor phi_chol = CholeskyFactor::from_matrix(theta.phi);
  VectorXd m = VectorXd::Zero(k);
  VectorXd log_s = VectorXd::Zero(k);

  auto log_l = [&](const VectorXd& z) {
    return augmented_loglik_point(spec, theta, z, y) +
           mvn_logpdf(z, VectorXd::Zero(k), phi_chol);
  };
  // grad of log f(y|z) + log N(z; 0, Phi) wrt z
  auto grad_l = [&](const VectorXd& z) {
    const VectorXd eta = theta.alpha + theta.lambda * z;
    VectorXd w(spec.p);
    for (int j = 0; j < spec.p; ++j) {
      if (spec.link == Link::Logit) {
        w[j] = y[j] - sigmoid(eta[j]);
      } else {
        const double e = y[j] == 1.0 ? eta[j] : -eta[j];
        const double mills = std::exp(std::log(std_normal_pdf(e)) - log_std_normal_cdf(e));
        w[j] = y[j] == 1.0 ? mills : -mills;
      }
    }
    return VectorXd(theta.lambda.transpose() * w - phi_inv * z);
  };

  for (int t = 1; t <= options.n_iters; ++t) {
    VectorXd gm = VectorXd::Zero(k), gs = VectorXd::Zero(k);
    double elbo = 0.0;
    const VectorXd s = log_s.array().exp();
    for (int r = 0; r < options.mc_samples; ++r) {
      VectorXd xi(k);
      for (int l = 0; l < k; ++l) xi[l] = rng.next_normal();
      const VectorXd z = m + s.cwiseProduct(xi);
      const VectorXd g = grad_l(z);
      if (!g.allFinite()) throw ApproximationFailure("vb_proposal: non-finite ELBO gradient");
      gm += g;
      gs += g.cwiseProduct(s.cwiseProduct(xi));
      if (elbo_trace) elbo += log_l(z);
    }
    gm /= options.mc_samples;
    gs /= options.mc_samples;
    gs.array() += 1.0;  // entropy term
    if (elbo_trace) {
      const double entropy = 0.5 * k * std::log(2 * M_PI * M_E) + log_s.sum();
      const double estimate = elbo / options.mc_samples + entropy;
      if (!std::isfinite(estimate))
        throw ApproximationFailure("vb_proposal: non-finite ELBO estimate");
      elbo_trace->push_back(estimate);
    }
    const double step = options.step_scale / std::sqrt(static_cast<double>(t));
    m += step * gm;
    log_s += step * gs;
    if (!m.allFinite() || !log_s.allFinite())
      throw ApproximationFailure("vb_proposal: parameters became non-finite");
  }
  const VectorXd s = log_s.array().exp();
  MatrixXd lower = MatrixXd::Zero(k, k);
  lower.diagonal() = s;
  return GaussianProposal{m, CholeskyFactor::from_lower(lower)};
}

GaussianProposal prior_proposal(const ModelSpec& spec, const Theta& theta) {
  return GaussianProposal{VectorXd::Zero(spec.k), CholeskyFactor::from_matrix(theta.phi)};
}

}  // namespace sbfa
