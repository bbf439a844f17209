#include "sbfa/transforms.hpp"

#include <cmath>

#include "sbfa/errors.hpp"

namespace sbfa {

UnconstrainedLayout UnconstrainedLayout::from_spec(const ModelSpec& spec) {
  UnconstrainedLayout lay;
  for (int r = 0; r < spec.p; ++r)
    for (int c = 0; c < spec.k; ++c)
      if (spec.cell(r, c).kind != CellKind::FixedValue) lay.load_cells.emplace_back(r, c);
  lay.n_load = static_cast<int>(lay.load_cells.size());
  lay.n_alpha = spec.p;
  const int d = spec.phi_dim();
  if (spec.is_saturated()) {
    lay.n_phi = d * (d - 1) / 2;
  } else {
    switch (spec.factor_cov_mode) {
      case FactorCovMode::Identity: lay.n_phi = 0; break;
      case FactorCovMode::LkjCorrelation: lay.n_phi = d * (d - 1) / 2; break;
      case FactorCovMode::InverseWishart: lay.n_phi = d * (d + 1) / 2; break;
    }
  }
  lay.n_psi = spec.has_psi() ? spec.p : 0;
  lay.load_offset = 0;
  lay.alpha_offset = lay.n_load;
  lay.phi_offset = lay.alpha_offset + lay.n_alpha;
  lay.psi_offset = lay.phi_offset + lay.n_phi;
  return lay;
}

MatrixXd corr_chol_from_cpc(const VectorXd& u, int d) {
  MatrixXd w = MatrixXd::Zero(d, d);
  w(0, 0) = 1.0;
  for (int i = 1; i < d; ++i) {
    double prod = 1.0;
    for (int j = 0; j < i; ++j) {
      const double z = std::tanh(u[strict_lower_index(i, j)]);
      w(i, j) = z * prod;
      prod *= std::sqrt(1.0 - z * z);
    }
    w(i, i) = prod;
  }
  return w;
}

VectorXd cpc_from_corr_chol(const MatrixXd& w, int d) {
  VectorXd u(d * (d - 1) / 2);
  for (int i = 1; i < d; ++i) {
    double prod = 1.0;
    for (int j = 0; j < i; ++j) {
      const double z = w(i, j) / prod;
      if (!(z > -1.0 && z < 1.0))
        throw ContractViolation("cpc_from_corr_chol: factor rows must have unit norm");
      u[strict_lower_index(i, j)] = std::atanh(z);
      prod *= std::sqrt(1.0 - z * z);
    }
  }
  return u;
}

double corr_log_jacobian(const VectorXd& u, int d) {
  // Three pieces: tanh per entry, the triangular z -> W map, and W -> R.
  double lj = 0.0;
  for (int i = 1; i < d; ++i) {
    double prod = 1.0;
    for (int j = 0; j < i; ++j) {
      const double z = std::tanh(u[strict_lower_index(i, j)]);
      const double log1mz2 = std::log1p(-z * z);
      lj += log1mz2 + 0.5 * (i - 1 - j) * log1mz2;
      prod *= std::sqrt(1.0 - z * z);
    }
    lj += (d - 1 - i) * std::log(prod);  // prod == W(i,i)
  }
  return lj;
}

MatrixXd corr_partial(const VectorXd& u, int d, int m) {
  // Differentiate the construction loop against u[m]; dR = dW W^T + W dW^T.
  MatrixXd w = MatrixXd::Zero(d, d), dw = MatrixXd::Zero(d, d);
  w(0, 0) = 1.0;
  for (int i = 1; i < d; ++i) {
    double prod = 1.0, dprod = 0.0;
    for (int j = 0; j < i; ++j) {
      const int idx = strict_lower_index(i, j);
      const double z = std::tanh(u[idx]);
      const double dz = (idx == m) ? 1.0 - z * z : 0.0;
      w(i, j) = z * prod;
      dw(i, j) = dz * prod + z * dprod;
      const double c = std::sqrt(1.0 - z * z);
      const double dc = -z * dz / c;
      dprod = dprod * c + prod * dc;
      prod *= c;
    }
    w(i, i) = prod;
    dw(i, i) = dprod;
  }
  MatrixXd dwt = dw * w.transpose();
  return dwt + dwt.transpose();
}

MatrixXd cov_from_log_chol(const VectorXd& u, int d) {
  MatrixXd l = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      l(i, j) = (i == j) ? std::exp(u[lower_index(i, j)]) : u[lower_index(i, j)];
  return l * l.transpose();
}

VectorXd log_chol_from_cov(const MatrixXd& phi, int d) {
  const CholeskyFactor chol = CholeskyFactor::from_matrix(phi);
  VectorXd u(d * (d + 1) / 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      u[lower_index(i, j)] = (i == j) ? std::log(chol.lower(i, i)) : chol.lower(i, j);
  return u;
}

double cov_log_jacobian(const VectorXd& u, int d) {
  double lj = d * std::log(2.0);
  for (int j = 0; j < d; ++j) lj += (d - j + 1) * u[lower_index(j, j)];
  return lj;
}

MatrixXd cov_partial(const VectorXd& u, int d, int m) {
  MatrixXd l = MatrixXd::Zero(d, d), dl = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      const int idx = lower_index(i, j);
      const double diag = (i == j) ? std::exp(u[idx]) : u[idx];
      l(i, j) = diag;
      if (idx == m) dl(i, j) = (i == j) ? diag : 1.0;  // d exp(u)/du = exp(u)
    }
  MatrixXd dlt = dl * l.transpose();
  return dlt + dlt.transpose();
}

VectorXd to_unconstrained(const ModelSpec& spec, const Theta& theta) {
  return to_unconstrained(spec, UnconstrainedLayout::from_spec(spec), theta);
}

Theta to_constrained(const ModelSpec& spec, const VectorXd& v) {
  return to_constrained(spec, UnconstrainedLayout::from_spec(spec), v);
}

double log_jacobian(const ModelSpec& spec, const VectorXd& v) {
  return log_jacobian(spec, UnconstrainedLayout::from_spec(spec), v);
}

VectorXd to_unconstrained(const ModelSpec& spec, const UnconstrainedLayout& lay,
                          const Theta& theta) {
  VectorXd v(lay.dim());
  for (int m = 0; m < lay.n_load; ++m) {
    const auto [r, c] = lay.load_cells[m];
    v[lay.load_offset + m] = theta.lambda(r, c);
  }
  v.segment(lay.alpha_offset, lay.n_alpha) = theta.alpha;
  const int d = spec.phi_dim();
  if (lay.n_phi > 0) {
    if (spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation) {
      const CholeskyFactor chol = CholeskyFactor::from_matrix(theta.phi);
      v.segment(lay.phi_offset, lay.n_phi) = cpc_from_corr_chol(chol.lower, d);
    } else {
      v.segment(lay.phi_offset, lay.n_phi) = log_chol_from_cov(theta.phi, d);
    }
  }
  for (int j = 0; j < lay.n_psi; ++j) v[lay.psi_offset + j] = std::log(theta.psi_diag[j]);
  return v;
}

Theta to_constrained(const ModelSpec& spec, const UnconstrainedLayout& lay, const VectorXd& v) {
  if (v.size() != lay.dim()) throw ContractViolation("to_constrained: dimension mismatch");
  Theta theta = Theta::zeros(spec);
  for (int m = 0; m < lay.n_load; ++m) {
    const auto [r, c] = lay.load_cells[m];
    theta.lambda(r, c) = v[lay.load_offset + m];
  }
  theta.alpha = v.segment(lay.alpha_offset, lay.n_alpha);
  const int d = spec.phi_dim();
  if (lay.n_phi > 0) {
    const VectorXd u = v.segment(lay.phi_offset, lay.n_phi);
    if (spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation) {
      const MatrixXd w = corr_chol_from_cpc(u, d);
      theta.phi = w * w.transpose();
      theta.phi.diagonal().setOnes();  // kill rounding drift on the unit diagonal
    } else {
      theta.phi = cov_from_log_chol(u, d);
    }
  }
  for (int j = 0; j < lay.n_psi; ++j) theta.psi_diag[j] = std::exp(v[lay.psi_offset + j]);
  return theta;
}

double log_jacobian(const ModelSpec& spec, const UnconstrainedLayout& lay, const VectorXd& v) {
  if (v.size() != lay.dim()) throw ContractViolation("log_jacobian: dimension mismatch");
  double lj = 0.0;
  const int d = spec.phi_dim();
  if (lay.n_phi > 0) {
    const VectorXd u = v.segment(lay.phi_offset, lay.n_phi);
    if (spec.is_saturated() || spec.factor_cov_mode == FactorCovMode::LkjCorrelation)
      lj += corr_log_jacobian(u, d);
    else
      lj += cov_log_jacobian(u, d);
  }
  for (int j = 0; j < lay.n_psi; ++j) lj += v[lay.psi_offset + j];
  return lj;
}

}  // namespace sbfa
