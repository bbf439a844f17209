#include <CLI11.hpp>
#include <iostream>

#include "sbfa/errors.hpp"
#include "sbfa/runner.hpp"
#include "sbfa/version.hpp"

namespace {

// Exit codes: 0 ok, 1 internal, 2 config, 3 data, 4 degenerate population,
// 5 tuning failure.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const sbfa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sbfa::ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sbfa::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const sbfa::DegeneratePopulation& e) {
    std::cerr << "degenerate particle population: " << e.what() << "\n";
    return 4;
  } catch (const sbfa::TuningFailure& e) {
    std::cerr << "tuning failure: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential Bayesian factor analysis (IBIS / IBIS-LVM)"};
  app.set_version_flag("--version", sbfa::kVersion);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Generate a scenario dataset as CSV");
  std::string scenario_name = "continuous1";
  int sim_n = 0;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "data.csv";
  sim->add_option("--scenario", scenario_name, "continuous1|continuous2|binary1")
      ->required();
  sim->add_option("--n", sim_n, "sample size (0 = scenario default)");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  auto* run_cmd = app.add_subcommand("run", "Run the engines described by a config file");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();

  auto* rep = app.add_subcommand("report", "Summarize a finished run directory");
  std::string run_dir;
  rep->add_option("--run-dir", run_dir, "directory produced by 'run'")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    return guarded([&] {
      sbfa::Scenario which;
      if (scenario_name == "continuous1")
        which = sbfa::Scenario::Continuous1;
      else if (scenario_name == "continuous2")
        which = sbfa::Scenario::Continuous2;
      else if (scenario_name == "binary1")
        which = sbfa::Scenario::Binary1;
      else
        throw sbfa::ConfigError("unknown scenario: " + scenario_name);
      sbfa::simulate_cmd(which, sim_n, sim_seed, sim_out);
      std::cout << "wrote " << sim_out << "\n";
    });
  }
  if (run_cmd->parsed()) {
    return guarded([&] {
      const sbfa::RunConfig config = sbfa::parse_run_config(config_path);
      sbfa::run(config);
      std::cout << "artifacts written to " << config.out_dir << "\n";
    });
  }
  return guarded([&] { sbfa::report(run_dir, std::cout); });
}
