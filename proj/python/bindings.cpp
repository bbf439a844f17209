#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbfa/approx.hpp"
#include "sbfa/errors.hpp"
#include "sbfa/modelselect.hpp"
#include "sbfa/serialize.hpp"
#include "sbfa/simulate.hpp"
#include "sbfa/smc.hpp"
#include "sbfa/version.hpp"

namespace py = pybind11;
using namespace sbfa;

namespace {

Link link_arg(const std::string& name) { return link_from_name(name); }

Scenario scenario_arg(const std::string& name) {
  if (name == "continuous1") return Scenario::Continuous1;
  if (name == "continuous2") return Scenario::Continuous2;
  if (name == "binary1") return Scenario::Binary1;
  throw ConfigError("unknown scenario: " + name);
}

ProposalKind proposal_arg(const std::string& name) {
  if (name == "prior") return ProposalKind::Prior;
  if (name == "laplace") return ProposalKind::Laplace;
  if (name == "vb") return ProposalKind::VB;
  throw ConfigError("unknown proposal: " + name);
}

Dataset dataset_from_array(const MatrixXd& values, const std::string& kind) {
  Dataset ds;
  ds.values = values;
  if (kind == "binary")
    ds.kind = Dataset::Kind::Binary;
  else if (kind == "continuous")
    ds.kind = Dataset::Kind::Continuous;
  else
    throw ConfigError("kind must be 'continuous' or 'binary'");
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    ds.item_names.push_back("item" + std::to_string(j + 1));
  ds.validate();
  return ds;
}

py::dict summarize_state(const SmcState& state) {
  py::dict out;
  out["evidence_increments"] = state.ledger.increments;
  out["evidence_cumulative"] = state.ledger.cumulative;
  out["log_evidence"] = state.ledger.total();
  out["triggers"] = state.policy.trigger_log;
  out["proposal_fallbacks"] = state.proposal_fallbacks;
  py::list rows;
  for (const auto& row : posterior_summary(state.ps, state.spec)) {
    py::dict r;
    r["name"] = row.name;
    r["mean"] = row.mean;
    r["q025"] = row.q025;
    r["q500"] = row.q500;
    r["q975"] = row.q975;
    rows.append(std::move(r));
  }
  out["summary"] = std::move(rows);
  out["ess"] = ess(state.ps.logw);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sbfa, m) {
  m.doc() = "Sequential Bayesian factor analysis: IBIS and IBIS-LVM engines";
  m.attr("__version__") = kVersion;

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DegeneratePopulation>(m, "DegeneratePopulation", PyExc_RuntimeError);
  py::register_exception<TuningFailure>(m, "TuningFailure", PyExc_RuntimeError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_readonly("p", &ModelSpec::p)
      .def_readonly("k", &ModelSpec::k)
      .def_property_readonly("link", [](const ModelSpec& s) { return link_name(s.link); })
      .def("to_json", [](const ModelSpec& s) { return spec_to_json(s).dump(); })
      .def_static("from_json",
                  [](const std::string& text) { return spec_from_json(Json::parse(text)); })
      .def("__repr__", [](const ModelSpec& s) {
        return "<ModelSpec p=" + std::to_string(s.p) + " k=" + std::to_string(s.k) + " link=" +
               link_name(s.link) + ">";
      });

  m.def("preset_spec",
        [](const std::string& label, int p, int k, const std::string& link) {
          return preset_spec(label, p, k, link_arg(link));
        },
        py::arg("label"), py::arg("p"), py::arg("k") = 2, py::arg("link") = "identity",
        "Build an EZ / AZ / EFAk / SAT model preset");

  m.def("simulate",
        [](const std::string& scenario, int n, std::uint64_t seed) {
          RngStream rng = RngStream::seeded(seed, 0x5C3);
          const Scenario which = scenario_arg(scenario);
          const TrueParams params = scenario_params(which);
          const Dataset ds =
              simulate_from_params(params, n > 0 ? n : scenario_default_n(which), rng);
          py::dict truth;
          truth["alpha"] = params.alpha;
          truth["lambda"] = params.lambda;
          truth["phi"] = params.phi;
          truth["psi_diag"] = params.psi_diag;
          truth["link"] = link_name(params.link);
          return py::make_tuple(ds.values, truth);
        },
        py::arg("scenario"), py::arg("n") = 0, py::arg("seed") = 1,
        "Generate a scenario dataset; returns (values, truth dict)");

  m.def("run_ibis",
        [](const ModelSpec& spec, const MatrixXd& values, const std::string& kind,
           std::uint64_t seed, int n_particles, double gamma_fraction,
           const std::string& proposal, int n_init, int pilot_steps, int short_steps) {
          const Dataset data = dataset_from_array(values, kind);
          EngineConfig config;
          config.n_theta = n_particles;
          config.gamma_fraction = gamma_fraction;
          config.proposal = proposal_arg(proposal);
          config.n_init = n_init;
          config.hmc.pilot_steps = pilot_steps;
          config.hmc.short_steps = short_steps;
          config.init.proposal = config.proposal;
          SmcEngine engine(spec, data, config, RngStream::seeded(seed, 0));
          engine.run();
          return summarize_state(engine.state());
        },
        py::arg("spec"), py::arg("values"), py::arg("kind"), py::arg("seed") = 1,
        py::arg("n_particles") = 1000, py::arg("gamma_fraction") = 0.5,
        py::arg("proposal") = "laplace", py::arg("n_init") = 0, py::arg("pilot_steps") = 500,
        py::arg("short_steps") = 10,
        "Run IBIS (continuous) or IBIS-LVM (binary) over a data matrix");

  m.def("ess", [](const VectorXd& logw) { return ess(logw); },
        "Effective sample size of log weights");
  m.def("log_sum_exp", [](const VectorXd& v) { return log_sum_exp(v); });
  m.def("mvn_logpdf",
        [](const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
          return mvn_logpdf(x, mean, CholeskyFactor::from_matrix(cov));
        },
        py::arg("x"), py::arg("mean"), py::arg("cov"));
  m.def("lkj_logpdf",
        [](const MatrixXd& corr, double eta) {
          return lkj_logpdf(CholeskyFactor::from_matrix(corr), eta);
        },
        py::arg("corr"), py::arg("eta"));
  m.def("inv_gamma_logpdf", &inv_gamma_logpdf, py::arg("x"), py::arg("shape"), py::arg("rate"));

  m.def("laplace_proposal",
        [](const ModelSpec& spec, const VectorXd& alpha, const MatrixXd& lambda,
           const VectorXd& y) {
          Theta theta = Theta::zeros(spec);
          theta.alpha = alpha;
          theta.lambda = lambda;
          const GaussianProposal q = laplace_proposal(spec, theta, y);
          return py::make_tuple(q.mean, q.cov_chol.reconstruct());
        },
        py::arg("spec"), py::arg("alpha"), py::arg("lambda"), py::arg("y"),
        "Laplace approximation of the single-observation latent posterior");

  m.def("fisher_information",
        [](const ModelSpec& spec, const VectorXd& alpha, const MatrixXd& lambda,
           const VectorXd& z) {
          Theta theta = Theta::zeros(spec);
          theta.alpha = alpha;
          theta.lambda = lambda;
          return fisher_information(spec, theta, z);
        },
        py::arg("spec"), py::arg("alpha"), py::arg("lambda"), py::arg("z"));
}
