#include "sbfa/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbfa/errors.hpp"

namespace sbfa {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_multigamma(int d, double a) {
  double s = 0.25 * d * (d - 1) * std::log(M_PI);
  for (int j = 0; j < d; ++j) s += std::lgamma(a - 0.5 * j);
  return s;
}
}  // namespace

double mvn_logpdf(const VectorXd& x, const VectorXd& mean, const CholeskyFactor& cov_chol) {
  const Eigen::Index d = cov_chol.dim();
  if (x.size() != d || mean.size() != d)
    throw ContractViolation("mvn_logpdf: dimension mismatch");
  const VectorXd u = cov_chol.solve_lower(x - mean);
  return -0.5 * (d * kLog2Pi + cov_chol.log_det + u.squaredNorm());
}

VectorXd sample_mvn(const VectorXd& mean, const CholeskyFactor& cov_chol, RngStream& rng) {
  const Eigen::Index d = cov_chol.dim();
  if (mean.size() != d) throw ContractViolation("sample_mvn: dimension mismatch");
  VectorXd xi(d);
  for (Eigen::Index i = 0; i < d; ++i) xi[i] = rng.next_normal();
  return mean + cov_chol.lower * xi;
}

double lkj_log_normalizer(int d, double eta) {
  if (d < 1 || eta <= 0.0) throw ContractViolation("lkj_log_normalizer: bad arguments");
  // c_d(eta) = prod_{k=1}^{d-1} 2^{(2 eta - 2 + d - k)(d - k)} applied as a sum
  // with the symmetric-beta normalizers, LKJ (2009).
  double log_c = 0.0;
  for (int k = 1; k <= d - 1; ++k) {
    const double a = eta + 0.5 * (d - k - 1);
    const double log_beta = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
    log_c += (d - k) * ((2.0 * eta - 2.0 + d - k) * std::log(2.0) + log_beta);
  }
  return log_c;
}

double lkj_logpdf(const CholeskyFactor& corr_chol, double eta) {
  const int d = static_cast<int>(corr_chol.dim());
  // Unit diagonal on reconstruction <=> unit row norms of the factor.
  for (int i = 0; i < d; ++i) {
    const double row_norm2 = corr_chol.lower.row(i).head(i + 1).squaredNorm();
    if (std::abs(row_norm2 - 1.0) > 1e-8)
      throw ContractViolation("lkj_logpdf: factor does not reconstruct a correlation matrix");
  }
  return (eta - 1.0) * corr_chol.log_det - lkj_log_normalizer(d, eta);
}

double inv_wishart_logpdf(const MatrixXd& cov, const MatrixXd& scale, double df) {
  const int d = static_cast<int>(cov.rows());
  if (scale.rows() != d || scale.cols() != d || cov.cols() != d)
    throw ContractViolation("inv_wishart_logpdf: dimension mismatch");
  if (!(df > d - 1)) throw ContractViolation("inv_wishart_logpdf: df must exceed d - 1");
  const CholeskyFactor cov_chol = CholeskyFactor::from_matrix(cov);
  const CholeskyFactor scale_chol = CholeskyFactor::from_matrix(scale);
  // tr(S Sigma^-1) via triangular solves against the columns of S.
  double trace = 0.0;
  for (int j = 0; j < d; ++j) trace += cov_chol.solve(scale.col(j))[j];
  return 0.5 * df * scale_chol.log_det - 0.5 * df * d * std::log(2.0) -
         log_multigamma(d, 0.5 * df) - 0.5 * (df + d + 1.0) * cov_chol.log_det - 0.5 * trace;
}

double inv_gamma_logpdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ContractViolation("inv_gamma_logpdf: shape and rate must be positive");
  if (x <= 0.0) return kNegInf;  // support edge, by convention not an error
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * (kLog2Pi + z * z) - std::log(sd);
}

double log_sum_exp(const VectorXd& v) {
  if (v.size() == 0) return kNegInf;
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf/nan propagates)
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double log_mean_exp(const VectorXd& v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

std::vector<int> multinomial_resample(const VectorXd& logw, RngStream& rng) {
  const Eigen::Index n = logw.size();
  const double m = logw.maxCoeff();
  if (!std::isfinite(m))
    throw DegeneratePopulation("multinomial_resample: all weights are -inf");
  VectorXd cum(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += std::exp(logw[i] - m);
    cum[i] = acc;
  }
  std::vector<int> ancestors(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.next_uniform() * acc;
    const double* begin = cum.data();
    const double* it = std::lower_bound(begin, begin + n, u);
    ancestors[static_cast<std::size_t>(i)] =
        static_cast<int>(std::min<Eigen::Index>(it - begin, n - 1));
  }
  return ancestors;
}

}  // namespace sbfa
