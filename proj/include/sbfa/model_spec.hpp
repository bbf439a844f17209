#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbfa/linalg.hpp"

namespace sbfa {

enum class Link { Identity, Logit, Probit };

enum class CellKind { FixedValue, Free, ApproxZero };

struct LoadingCell {
  CellKind kind = CellKind::FixedValue;
  double value = 0.0;  // only meaningful for FixedValue

  static LoadingCell fixed(double v) { return {CellKind::FixedValue, v}; }
  static LoadingCell free() { return {CellKind::Free, 0.0}; }
  static LoadingCell approx_zero() { return {CellKind::ApproxZero, 0.0}; }
};

enum class FactorCovMode { Identity, LkjCorrelation, InverseWishart };

enum class ResidualMode { DiagonalInvGamma, FixedIdentity };

// How the scale/rotation indeterminacy is resolved.
//  LeadingOnes: one loading per factor fixed to 1 (CFA-style).
//  EfaLowerTriangular: Lambda lower-triangular with free diagonal, signs
//  resolved at read-out.
//  Saturated: k = 0 and the observation covariance is diag(s) R diag(s) with
//  R a p x p correlation matrix (stored in Theta::phi) and s^2 in psi_diag.
enum class Identification { LeadingOnes, EfaLowerTriangular, Saturated };

struct ModelSpec {
  int p = 0;
  int k = 0;
  Link link = Link::Identity;
  Identification ident = Identification::LeadingOnes;
  std::vector<LoadingCell> loading_pattern;  // p*k, row-major

  FactorCovMode factor_cov_mode = FactorCovMode::Identity;
  double lkj_eta = 2.0;
  MatrixXd iw_scale;  // k x k, used when factor_cov_mode == InverseWishart
  double iw_df = 0.0;
  double sat_lkj_eta = 2.0;  // LKJ shape of the saturated correlation matrix

  ResidualMode residual_mode = ResidualMode::DiagonalInvGamma;
  double c0 = 2.5;  // inverse-gamma shape for the residual variances

  double loading_prior_sd = 1.0;
  double approx_zero_sd = 0.1;
  double intercept_prior_sd = 10.0;

  const LoadingCell& cell(int row, int col) const { return loading_pattern[row * k + col]; }
  LoadingCell& cell(int row, int col) { return loading_pattern[row * k + col]; }

  bool is_saturated() const { return ident == Identification::Saturated; }
  // Dimension of the matrix stored in Theta::phi.
  int phi_dim() const { return is_saturated() ? p : k; }
  bool has_psi() const { return residual_mode == ResidualMode::DiagonalInvGamma || is_saturated(); }
  bool is_binary_link() const { return link != Link::Identity; }

  int n_free_loadings() const;
  // Row of the designated leading loading for a factor column, or -1 when the
  // column has none (saturated model, or a column without a fixed 1).
  int leading_row(int col) const;

  // Throws ContractViolation when the spec is internally inconsistent.
  void validate() const;
};

// One parameter point. FixedValue cells of lambda always hold their constant.
struct Theta {
  VectorXd alpha;    // p
  MatrixXd lambda;   // p x k
  MatrixXd phi;      // phi_dim x phi_dim (correlation or covariance per spec)
  VectorXd psi_diag; // p when the spec has residual variances, else empty

  static Theta zeros(const ModelSpec& spec);
};

struct Dataset {
  enum class Kind { Continuous, Binary };
  MatrixXd values;  // n x p
  Kind kind = Kind::Continuous;
  std::vector<std::string> item_names;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
  void validate() const;  // binary kind => every value in {0,1}
};

// Latent rows carried by one particle in the augmented scheme; row t holds
// z_t for observation t (0-based), row count equals observations processed.
struct LatentBlock {
  MatrixXd z_rows;  // i x k

  Eigen::Index rows() const { return z_rows.rows(); }
  void append(const VectorXd& z);
};

// Column sign convention: for each factor column with a designated leading
// loading, flip the column (and phi rows/cols) when that loading is negative.
// Lambda Phi Lambda^T is unchanged.
Theta fix_loading_signs_one(const ModelSpec& spec, Theta theta);
std::vector<Theta> fix_loading_signs(const ModelSpec& spec, std::vector<Theta> draws);

}  // namespace sbfa
