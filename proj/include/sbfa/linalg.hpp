#pragma once

#include <Eigen/Dense>

namespace sbfa {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Lower-triangular Cholesky factor L of an SPD matrix together with
// log det(L L^T). Densities work off the factor so the reconstructed matrix
// is never formed on the hot path.
struct CholeskyFactor {
  MatrixXd lower;
  double log_det = 0.0;  // log det of the factored matrix, i.e. 2*sum(log diag(L))

  // Factors an SPD matrix. If the plain factorization fails, retries once
  // with 1e-9 jitter on the diagonal, then throws ContractViolation.
  static CholeskyFactor from_matrix(const MatrixXd& m);

  // Wraps an already lower-triangular factor. A zero diagonal entry is
  // allowed and marks a degenerate direction (log_det becomes -inf).
  static CholeskyFactor from_lower(const MatrixXd& lower);

  Eigen::Index dim() const { return lower.rows(); }
  MatrixXd reconstruct() const { return lower * lower.transpose(); }

  // Solves L x = b.
  VectorXd solve_lower(const VectorXd& b) const;
  // Solves (L L^T) x = b.
  VectorXd solve(const VectorXd& b) const;
  // Inverse of the factored matrix (small dimensions only).
  MatrixXd inverse() const;
};

}  // namespace sbfa
