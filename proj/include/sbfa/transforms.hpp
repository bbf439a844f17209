#pragma once

#include <utility>
#include <vector>

#include "sbfa/model_spec.hpp"

namespace sbfa {

// Slice map of the flat unconstrained vector:
//   [ free/approx-zero loadings | alpha | phi parameters | log residual variances ]
// Loadings and alpha are unconstrained as-is; residual variances use log;
// correlation matrices use tanh canonical partial correlations of the
// Cholesky factor; covariance matrices use log-Cholesky.
struct UnconstrainedLayout {
  int n_load = 0;
  int n_alpha = 0;
  int n_phi = 0;
  int n_psi = 0;
  int load_offset = 0, alpha_offset = 0, phi_offset = 0, psi_offset = 0;
  std::vector<std::pair<int, int>> load_cells;  // (row, col) of non-fixed cells, row-major

  int dim() const { return n_load + n_alpha + n_phi + n_psi; }
  static UnconstrainedLayout from_spec(const ModelSpec& spec);
};

VectorXd to_unconstrained(const ModelSpec& spec, const Theta& theta);
Theta to_constrained(const ModelSpec& spec, const VectorXd& v);
// log |d(constrained)/d(unconstrained)| at v; the constrained coordinates are
// the free loadings, alpha, the lower triangle of phi, and the residual
// variances.
double log_jacobian(const ModelSpec& spec, const VectorXd& v);

// Hot-path variants with the layout precomputed.
VectorXd to_unconstrained(const ModelSpec& spec, const UnconstrainedLayout& lay,
                          const Theta& theta);
Theta to_constrained(const ModelSpec& spec, const UnconstrainedLayout& lay, const VectorXd& v);
double log_jacobian(const ModelSpec& spec, const UnconstrainedLayout& lay, const VectorXd& v);

// Correlation-matrix transform pieces (d x d, u of length d(d-1)/2, row-major
// over strictly-lower entries). Exposed for the gradient code and for tests.
MatrixXd corr_chol_from_cpc(const VectorXd& u, int d);
VectorXd cpc_from_corr_chol(const MatrixXd& w, int d);
double corr_log_jacobian(const VectorXd& u, int d);
// Full symmetric dR for a unit perturbation of u[m] (forward mode).
MatrixXd corr_partial(const VectorXd& u, int d, int m);

// Covariance log-Cholesky pieces (u of length d(d+1)/2, row-major over the
// lower triangle including the diagonal; diagonal entries are log scale).
MatrixXd cov_from_log_chol(const VectorXd& u, int d);
VectorXd log_chol_from_cov(const MatrixXd& phi, int d);
double cov_log_jacobian(const VectorXd& u, int d);
MatrixXd cov_partial(const VectorXd& u, int d, int m);

inline int strict_lower_index(int i, int j) { return i * (i - 1) / 2 + j; }
inline int lower_index(int i, int j) { return i * (i + 1) / 2 + j; }

}  // namespace sbfa
