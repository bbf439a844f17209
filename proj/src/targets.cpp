#include <cmath>
#include <limits>

#include "sbfa/errors.hpp"
#include "sbfa/links.hpp"
#include "sbfa/model_ops.hpp"

namespace sbfa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Gradient accumulator in constrained coordinates. d_phi uses the full-matrix
// convention (mirror entries both counted), matching the forward-mode
// partials of the phi transforms.
struct ConstrainedGrads {
  VectorXd d_alpha;
  MatrixXd d_lambda;
  MatrixXd d_phi;
  VectorXd d_psi;  // wrt variance entries

  ConstrainedGrads(const ModelSpec& spec)
      : d_alpha(VectorXd::Zero(spec.p)),
        d_lambda(MatrixXd::Zero(spec.p, spec.k)),
        d_phi(MatrixXd::Zero(spec.phi_dim(), spec.phi_dim())),
        d_psi(VectorXd::Zero(spec.has_psi() ? spec.p : 0)) {}
};

void add_theta_prior_grads(const ModelSpec& spec, const Theta& theta, const VectorXd* psi_rates,
                           ConstrainedGrads& cg) {
  for (int r = 0; r < spec.p; ++r)
    for (int c = 0; c < spec.k; ++c) {
      const auto& cell = spec.cell(r, c);
      if (cell.kind == CellKind::Free)
        cg.d_lambda(r, c) -= theta.lambda(r, c) / (spec.loading_prior_sd * spec.loading_prior_sd);
      else if (cell.kind == CellKind::ApproxZero)
        cg.d_lambda(r, c) -= theta.lambda(r, c) / (spec.approx_zero_sd * spec.approx_zero_sd);
    }
  cg.d_alpha -= theta.alpha / (spec.intercept_prior_sd * spec.intercept_prior_sd);
  if (spec.has_psi()) {
    for (int j = 0; j < spec.p; ++j) {
      const double psi = theta.psi_diag[j];
      cg.d_psi[j] += -(spec.c0 + 1.0) / psi + (*psi_rates)[j] / (psi * psi);
    }
  }
  if (!spec.is_saturated() && spec.factor_cov_mode == FactorCovMode::InverseWishart) {
    const MatrixXd phi_inv = CholeskyFactor::from_matrix(theta.phi).inverse();
    cg.d_phi += -0.5 * (spec.iw_df + spec.k + 1.0) * phi_inv +
                0.5 * phi_inv * spec.iw_scale * phi_inv;
  }
  // LKJ phi priors are handled in unconstrained space (see chain_to_unconstrained).
}

// Chain rule from constrained gradients to the flat unconstrained vector.
// Adds the transform log-Jacobian gradient and, for LKJ-type phi blocks, the
// prior-plus-Jacobian term which collapses to -2 a z per partial correlation.
VectorXd chain_to_unconstrained(const ModelSpec& spec, const UnconstrainedLayout& lay,
                                const VectorXd& v, const Theta& theta,
                                const ConstrainedGrads& cg) {
  VectorXd grad = VectorXd::Zero(lay.dim());
  for (int m = 0; m < lay.n_load; ++m) {
    const auto [r, c] = lay.load_cells[m];
    grad[lay.load_offset + m] = cg.d_lambda(r, c);
  }
  grad.segment(lay.alpha_offset, lay.n_alpha) = cg.d_alpha;

  const int d = spec.phi_dim();
  if (lay.n_phi > 0) {
    const VectorXd u = v.segment(lay.phi_offset, lay.n_phi);
    const bool lkj_phi =
        spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation;
    if (lkj_phi) {
      const double eta = spec.is_saturated() ? spec.sat_lkj_eta : spec.lkj_eta;
      for (int m = 0; m < lay.n_phi; ++m)
        grad[lay.phi_offset + m] = cg.d_phi.cwiseProduct(corr_partial(u, d, m)).sum();
      for (int i = 1; i < d; ++i)
        for (int j = 0; j < i; ++j) {
          const int m = strict_lower_index(i, j);
          const double a = eta + 0.5 * (d - 2 - j);
          grad[lay.phi_offset + m] += -2.0 * a * std::tanh(u[m]);
        }
    } else {
      for (int m = 0; m < lay.n_phi; ++m)
        grad[lay.phi_offset + m] = cg.d_phi.cwiseProduct(cov_partial(u, d, m)).sum();
      for (int j = 0; j < d; ++j)
        grad[lay.phi_offset + lower_index(j, j)] += d - j + 1;  // transform Jacobian
    }
  }
  for (int j = 0; j < lay.n_psi; ++j)
    grad[lay.psi_offset + j] = cg.d_psi[j] * theta.psi_diag[j] + 1.0;
  return grad;
}

}  // namespace

MarginalPosteriorTarget::MarginalPosteriorTarget(ModelSpec spec, PrefixStats stats,
                                                 const MatrixXd* empirical_cov)
    : spec_(std::move(spec)),
      stats_(std::move(stats)),
      layout_(UnconstrainedLayout::from_spec(spec_)) {
  if (spec_.is_binary_link())
    throw ContractViolation("MarginalPosteriorTarget: requires the identity link");
  if (spec_.has_psi()) {
    if (empirical_cov == nullptr)
      throw ContractViolation("MarginalPosteriorTarget: empirical covariance required");
    psi_rates_ = residual_rates(spec_, *empirical_cov);
  }
}

double MarginalPosteriorTarget::logpdf(const VectorXd& v, VectorXd* grad) const {
  if (grad) grad->setZero(layout_.dim());
  if (!v.allFinite()) return kNegInf;
  Theta theta = to_constrained(spec_, layout_, v);
  CholeskyFactor chol;
  try {
    chol = CholeskyFactor::from_matrix(model_covariance(spec_, theta));
  } catch (const ContractViolation&) {
    return kNegInf;
  }
  const VectorXd* rates = psi_rates_ ? &*psi_rates_ : nullptr;
  double lp = prior_logpdf_with_rates(spec_, theta, rates) + log_jacobian(spec_, layout_, v);

  const int n = stats_.n;
  const int p = spec_.p;
  MatrixXd big_m;
  MatrixXd sigma_inv;
  if (n > 0) {
    big_m = stats_.sum_yy - stats_.sum_y * theta.alpha.transpose() -
            theta.alpha * stats_.sum_y.transpose() + n * theta.alpha * theta.alpha.transpose();
    sigma_inv = chol.inverse();
    lp += -0.5 * (n * p * kLog2Pi + n * chol.log_det + sigma_inv.cwiseProduct(big_m).sum());
  }
  if (!std::isfinite(lp)) {
    if (grad) grad->setZero();
    return kNegInf;
  }
  if (!grad) return lp;

  ConstrainedGrads cg(spec_);
  if (n > 0) {
    const MatrixXd g = 0.5 * (sigma_inv * big_m * sigma_inv - n * sigma_inv);
    cg.d_alpha += sigma_inv * (stats_.sum_y - n * theta.alpha);
    if (spec_.is_saturated()) {
      const VectorXd s = theta.psi_diag.cwiseSqrt();
      cg.d_phi += s.asDiagonal() * g * s.asDiagonal();
      for (int j = 0; j < p; ++j)
        cg.d_psi[j] +=
            (g.row(j).array() * theta.phi.row(j).array() * s.transpose().array()).sum() / s[j];
    } else {
      cg.d_lambda += 2.0 * g * theta.lambda * theta.phi;
      cg.d_phi += theta.lambda.transpose() * g * theta.lambda;
      if (spec_.has_psi()) cg.d_psi += g.diagonal();
    }
  }
  add_theta_prior_grads(spec_, theta, rates, cg);
  *grad = chain_to_unconstrained(spec_, layout_, v, theta, cg);
  return lp;
}

UnconstrainedTarget MarginalPosteriorTarget::as_target() const {
  return UnconstrainedTarget{layout_.dim(),
                             [self = *this](const VectorXd& v, VectorXd* g) {
                               return self.logpdf(v, g);
                             }};
}

AugmentedPosteriorTarget::AugmentedPosteriorTarget(ModelSpec spec, MatrixXd y_prefix)
    : spec_(std::move(spec)),
      y_prefix_(std::move(y_prefix)),
      layout_(UnconstrainedLayout::from_spec(spec_)) {
  if (!spec_.is_binary_link())
    throw ContractViolation("AugmentedPosteriorTarget: requires a logit or probit link");
  if (y_prefix_.cols() != spec_.p)
    throw ContractViolation("AugmentedPosteriorTarget: data prefix must have p columns");
}

double AugmentedPosteriorTarget::logpdf(const VectorXd& v, VectorXd* grad) const {
  const int i = static_cast<int>(y_prefix_.rows());
  const int k = spec_.k;
  const int td = layout_.dim();
  if (v.size() != td + i * k)
    throw ContractViolation("AugmentedPosteriorTarget: vector length mismatch");
  if (grad) grad->setZero(v.size());
  if (!v.allFinite()) return kNegInf;

  const VectorXd vt = v.head(td);
  Theta theta = to_constrained(spec_, layout_, vt);
  double lp = prior_logpdf_with_rates(spec_, theta, nullptr) + log_jacobian(spec_, layout_, vt);

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> z(
      v.data() + td, i, k);

  CholeskyFactor phi_chol;
  try {
    phi_chol = CholeskyFactor::from_matrix(theta.phi);
  } catch (const ContractViolation&) {
    return kNegInf;
  }
  const MatrixXd phi_inv = phi_chol.inverse();

  // Latent prior: sum_t log N(z_t; 0, Phi).
  const MatrixXd sz = z.transpose() * z;
  lp += -0.5 * (i * k * kLog2Pi + i * phi_chol.log_det + phi_inv.cwiseProduct(sz).sum());

  // Augmented likelihood and the per-cell weight dl/deta.
  MatrixXd eta = MatrixXd::Zero(i, spec_.p);
  if (k > 0) eta = z * theta.lambda.transpose();
  eta.rowwise() += theta.alpha.transpose();
  MatrixXd w(i, spec_.p);
  for (int t = 0; t < i; ++t)
    for (int j = 0; j < spec_.p; ++j) {
      const double e = eta(t, j);
      const bool one = y_prefix_(t, j) == 1.0;
      if (spec_.link == Link::Logit) {
        lp += log_sigmoid(one ? e : -e);
        w(t, j) = (one ? 1.0 : 0.0) - sigmoid(e);
      } else {
        const double lcdf = log_std_normal_cdf(one ? e : -e);
        lp += lcdf;
        const double mills = std::exp(std::log(std_normal_pdf(e)) - lcdf);
        w(t, j) = one ? mills : -mills;
      }
    }
  if (!std::isfinite(lp)) {
    if (grad) grad->setZero();
    return kNegInf;
  }
  if (!grad) return lp;

  ConstrainedGrads cg(spec_);
  cg.d_alpha += w.colwise().sum().transpose();
  if (k > 0) cg.d_lambda += w.transpose() * z;
  cg.d_phi += 0.5 * (phi_inv * sz * phi_inv - i * phi_inv);
  add_theta_prior_grads(spec_, theta, nullptr, cg);
  grad->head(td) = chain_to_unconstrained(spec_, layout_, vt, theta, cg);

  if (k > 0) {
    const MatrixXd dz = w * theta.lambda - z * phi_inv;  // i x k
    for (int t = 0; t < i; ++t)
      grad->segment(td + t * k, k) = dz.row(t).transpose();
  }
  return lp;
}

UnconstrainedTarget AugmentedPosteriorTarget::as_target() const {
  return UnconstrainedTarget{dim(),
                             [self = *this](const VectorXd& v, VectorXd* g) {
                               return self.logpdf(v, g);
                             }};
}

double posterior_logpdf_unconstrained(const ModelSpec& spec, const VectorXd& v,
                                      const MatrixXd& data_prefix, const LatentBlock* latent,
                                      const MatrixXd* empirical_cov) {
  if (spec.is_binary_link()) {
    if (latent == nullptr)
      throw ContractViolation("posterior_logpdf_unconstrained: latent block required");
    if (latent->rows() != data_prefix.rows())
      throw ContractViolation("posterior_logpdf_unconstrained: latent row count mismatch");
    AugmentedPosteriorTarget target(spec, data_prefix);
    VectorXd full(target.dim());
    full.head(target.theta_dim()) = v;
    for (Eigen::Index t = 0; t < latent->rows(); ++t)
      full.segment(target.theta_dim() + t * spec.k, spec.k) = latent->z_rows.row(t).transpose();
    return target.logpdf(full, nullptr);
  }
  if (latent != nullptr)
    throw ContractViolation("posterior_logpdf_unconstrained: latent forbidden for identity link");
  PrefixStats stats(spec.p);
  for (Eigen::Index t = 0; t < data_prefix.rows(); ++t)
    stats.append(data_prefix.row(t).transpose());
  MarginalPosteriorTarget target(spec, std::move(stats), empirical_cov);
  return target.logpdf(v, nullptr);
}

double posterior_logpdf_grad_unconstrained(const ModelSpec& spec, const VectorXd& v,
                                           const MatrixXd& data_prefix, VectorXd& grad,
                                           const LatentBlock* latent,
                                           const MatrixXd* empirical_cov) {
  if (spec.is_binary_link()) {
    if (latent == nullptr)
      throw ContractViolation("posterior_logpdf_grad_unconstrained: latent block required");
    AugmentedPosteriorTarget target(spec, data_prefix);
    VectorXd full(target.dim());
    full.head(target.theta_dim()) = v;
    for (Eigen::Index t = 0; t < latent->rows(); ++t)
      full.segment(target.theta_dim() + t * spec.k, spec.k) = latent->z_rows.row(t).transpose();
    VectorXd g_full;
    const double lp = target.logpdf(full, &g_full);
    grad = g_full.head(target.theta_dim());
    return lp;
  }
  PrefixStats stats(spec.p);
  for (Eigen::Index t = 0; t < data_prefix.rows(); ++t)
    stats.append(data_prefix.row(t).transpose());
  MarginalPosteriorTarget target(spec, std::move(stats), empirical_cov);
  return target.logpdf(v, &grad);
}

}  // namespace sbfa
