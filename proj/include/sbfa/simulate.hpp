#pragma once

#include "sbfa/model_spec.hpp"
#include "sbfa/rng.hpp"

namespace sbfa {

enum class Scenario { Continuous1, Continuous2, Binary1 };

// Generating parameters written to the simulation sidecar.
struct TrueParams {
  Link link = Link::Identity;
  VectorXd alpha;
  MatrixXd lambda;
  MatrixXd phi;
  VectorXd psi_diag;  // empty for binary scenarios
};

TrueParams scenario_params(Scenario which);

// Draws z ~ N(0, Phi) and produces y through the measurement model.
Dataset simulate_from_params(const TrueParams& params, int n, RngStream& rng);

Dataset simulate_scenario(Scenario which, int n, RngStream& rng);

// Default sample sizes used in the simulation studies (continuous: 200,
// binary: 100).
int scenario_default_n(Scenario which);

}  // namespace sbfa
