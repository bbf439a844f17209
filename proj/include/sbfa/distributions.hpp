#pragma once

#include <vector>

#include "sbfa/linalg.hpp"
#include "sbfa/rng.hpp"

namespace sbfa {

// All densities are returned on the log scale.

double mvn_logpdf(const VectorXd& x, const VectorXd& mean, const CholeskyFactor& cov_chol);

VectorXd sample_mvn(const VectorXd& mean, const CholeskyFactor& cov_chol, RngStream& rng);

// Log normalizing constant c_d(eta) with density det(R)^(eta-1) / c_d(eta)
// over the strictly lower triangle of the correlation matrix.
double lkj_log_normalizer(int d, double eta);

// corr_chol must factor a correlation matrix (unit diagonal on reconstruction).
double lkj_logpdf(const CholeskyFactor& corr_chol, double eta);

// Scale/df convention: prior mean is scale / (df - d - 1).
double inv_wishart_logpdf(const MatrixXd& cov, const MatrixXd& scale, double df);

// Rate convention: density rate^shape / Gamma(shape) * x^-(shape+1) * exp(-rate/x).
// Returns -inf for x <= 0.
double inv_gamma_logpdf(double x, double shape, double rate);

double normal_logpdf(double x, double mean, double sd);

double log_sum_exp(const VectorXd& v);
double log_mean_exp(const VectorXd& v);

// N i.i.d. ancestor indices with probability proportional to exp(logw - max).
// Throws DegeneratePopulation when every weight is -inf.
std::vector<int> multinomial_resample(const VectorXd& logw, RngStream& rng);

}  // namespace sbfa
