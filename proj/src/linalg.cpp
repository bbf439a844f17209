#include "sbfa/linalg.hpp"

#include <cmath>

#include "sbfa/errors.hpp"

namespace sbfa {

CholeskyFactor CholeskyFactor::from_matrix(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw ContractViolation("cholesky: matrix is not square");
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    // One jitter retry: the model covariance is SPD in exact arithmetic but
    // can lose definiteness in floating point.
    MatrixXd jittered = m;
    jittered.diagonal().array() += 1e-9;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
      throw ContractViolation("cholesky: matrix is not positive definite (after 1e-9 jitter)");
  }
  return from_lower(llt.matrixL());
}

CholeskyFactor CholeskyFactor::from_lower(const MatrixXd& lower) {
  CholeskyFactor c;
  c.lower = lower;
  c.log_det = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double d = lower(i, i);
    if (d < 0.0) throw ContractViolation("cholesky: negative diagonal entry");
    // A zero diagonal marks a degenerate (point-mass) direction: sampling
    // still works, densities return -inf through log_det.
    c.log_det += 2.0 * std::log(d);
  }
  return c;
}

VectorXd CholeskyFactor::solve_lower(const VectorXd& b) const {
  return lower.triangularView<Eigen::Lower>().solve(b);
}

VectorXd CholeskyFactor::solve(const VectorXd& b) const {
  VectorXd y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

MatrixXd CholeskyFactor::inverse() const {
  const Eigen::Index d = dim();
  MatrixXd linv = lower.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(d, d));
  return linv.transpose() * linv;
}

}  // namespace sbfa
