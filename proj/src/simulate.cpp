#include "sbfa/simulate.hpp"

#include "sbfa/errors.hpp"
#include "sbfa/links.hpp"

namespace sbfa {

TrueParams scenario_params(Scenario which) {
  TrueParams t;
  switch (which) {
    case Scenario::Continuous1:
    case Scenario::Continuous2: {
      t.link = Link::Identity;
      t.alpha = VectorXd::Zero(6);
      t.psi_diag = VectorXd(6);
      t.psi_diag << 0.35, 0.58, 0.58, 0.35, 0.58, 0.58;
      t.phi = MatrixXd(2, 2);
      t.phi << 0.65, 0.13, 0.13, 0.65;
      t.lambda = MatrixXd::Zero(6, 2);
      t.lambda.col(0) << 1.0, 0.8, 0.8, 0.0, 0.0, 0.0;
      t.lambda.col(1) << 0.0, 0.0, 0.0, 1.0, 0.8, 0.8;
      if (which == Scenario::Continuous2) {
        // Small cross-loadings added in three positions.
        t.lambda(1, 1) = 0.3;
        t.lambda(4, 0) = 0.3;
        t.lambda(5, 0) = 0.3;
      }
      break;
    }
    case Scenario::Binary1: {
      t.link = Link::Logit;
      t.alpha = VectorXd(6);
      t.alpha << -0.53, 0.35, -1.4, -1.4, -0.96, -2.33;
      t.lambda = MatrixXd::Ones(6, 1);
      t.phi = MatrixXd::Identity(1, 1);
      break;
    }
  }
  return t;
}

Dataset simulate_from_params(const TrueParams& params, int n, RngStream& rng) {
  if (n < 1) throw ContractViolation("simulate: n must be >= 1");
  const int p = static_cast<int>(params.alpha.size());
  const int k = static_cast<int>(params.lambda.cols());
  const CholeskyFactor phi_chol = CholeskyFactor::from_matrix(params.phi);
  Dataset ds;
  ds.values = MatrixXd(n, p);
  ds.kind = params.link == Link::Identity ? Dataset::Kind::Continuous : Dataset::Kind::Binary;
  ds.item_names.reserve(p);
  for (int j = 0; j < p; ++j) ds.item_names.push_back("item" + std::to_string(j + 1));
  for (int i = 0; i < n; ++i) {
    VectorXd xi(k);
    for (int l = 0; l < k; ++l) xi[l] = rng.next_normal();
    const VectorXd z = phi_chol.lower * xi;
    const VectorXd eta = params.alpha + params.lambda * z;
    for (int j = 0; j < p; ++j) {
      switch (params.link) {
        case Link::Identity:
          ds.values(i, j) = eta[j] + std::sqrt(params.psi_diag[j]) * rng.next_normal();
          break;
        case Link::Logit:
          ds.values(i, j) = rng.next_uniform() < sigmoid(eta[j]) ? 1.0 : 0.0;
          break;
        case Link::Probit:
          ds.values(i, j) = rng.next_uniform() < std_normal_cdf(eta[j]) ? 1.0 : 0.0;
          break;
      }
    }
  }
  return ds;
}

Dataset simulate_scenario(Scenario which, int n, RngStream& rng) {
  const TrueParams t = scenario_params(which);
  return simulate_from_params(t, n, rng);
}

int scenario_default_n(Scenario which) {
  return which == Scenario::Binary1 ? 100 : 200;
}

}  // namespace sbfa
