#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbfa/csv_io.hpp"
#include "sbfa/errors.hpp"
#include "sbfa/run_config.hpp"
#include "sbfa/runner.hpp"
#include "sbfa/serialize.hpp"

using namespace sbfa;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv ingestion rules") {
  const std::string binary = write_temp("sbfa_bin.csv", "a,b\n0,1\n1,0\n");
  const Dataset ds = ingest_csv(binary);
  CHECK(ds.kind == Dataset::Kind::Binary);
  CHECK(ds.n() == 2);
  CHECK(ds.item_names[1] == "b");

  // a 2 present and no override: continuous with a warning
  const std::string twos = write_temp("sbfa_twos.csv", "a,b\n0,1\n2,0\n1,1\n");
  CHECK(ingest_csv(twos).kind == Dataset::Kind::Continuous);

  const std::string ragged = write_temp("sbfa_ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(ingest_csv(ragged), DataError);

  const std::string junk = write_temp("sbfa_junk.csv", "a,b\n1,x\n");
  CHECK_THROWS_AS(ingest_csv(junk), DataError);

  const std::string constant = write_temp("sbfa_const.csv", "a,b\n1,2\n1,3\n1,4\n");
  CHECK_THROWS_AS(ingest_csv(constant), DataError);

  // standardization: mean 0, sd 1 to 1e-12
  const std::string cont = write_temp("sbfa_cont.csv", "a,b\n1.5,2\n-0.5,4\n0.25,7\n1,1\n");
  const Dataset std_ds = ingest_csv(cont, std::nullopt, true);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(std_ds.values.col(j).mean()) < 1e-12);
    const double sd = std::sqrt(
        (std_ds.values.col(j).array() - std_ds.values.col(j).mean()).square().sum() /
        (std_ds.n() - 1));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
  }

  // binary override rejects out-of-range values
  CHECK_THROWS_AS(ingest_csv(twos, Dataset::Kind::Binary), DataError);
}

TEST_CASE("csv round trip at full precision") {
  MatrixXd values(3, 2);
  values << 0.1234567890123456, -1e-17, 3.0000000000000004, 12345.678901234567, -0.5, 1.0 / 3.0;
  const std::string path = (fs::temp_directory_path() / "sbfa_roundtrip.csv").string();
  write_csv(path, {"x", "y"}, values);
  const Dataset back = ingest_csv(path);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) CHECK(back.values(i, j) == values(i, j));
}

TEST_CASE("run config parsing and validation") {
  const std::string good = R"({
    "dataset": {"scenario": "continuous1", "n": 30, "seed": 9},
    "models": ["EZ", "EFA2"],
    "factors": 2,
    "engine": {"n_theta": 100, "proposal": "laplace", "pilot_steps": 120},
    "output": {"dir": "/tmp/sbfa_run_cfg"},
    "seed": 11
  })";
  const RunConfig cfg = run_config_from_json(good, "test");
  CHECK(cfg.scenario == Scenario::Continuous1);
  CHECK(cfg.engine.n_theta == 100);
  CHECK(cfg.engine.hmc.pilot_steps == 120);
  CHECK(cfg.master_seed == 11);

  CHECK_THROWS_AS(run_config_from_json(R"({"bogus": 1})", "test"), ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(
          R"({"dataset": {"scenario": "continuous1", "typo": 2}, "models": ["EZ"], "output": {"dir": "x"}})",
          "test"),
      ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(
          R"({"dataset": {"scenario": "nope"}, "models": ["EZ"], "output": {"dir": "x"}})",
          "test"),
      ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(
          R"({"dataset": {"scenario": "continuous1"}, "models": ["WAT"], "output": {"dir": "x"}})",
          "test"),
      ConfigError);
}

TEST_CASE("simulate command writes data and a truth sidecar") {
  const fs::path dir = fs::temp_directory_path() / "sbfa_simulate_test";
  fs::remove_all(dir);
  const std::string out = (dir / "bin1.csv").string();
  simulate_cmd(Scenario::Binary1, 0, 42, out);
  const Dataset ds = ingest_csv(out);
  CHECK(ds.n() == 100);  // scenario default
  CHECK(ds.p() == 6);
  CHECK(ds.kind == Dataset::Kind::Binary);

  const Json truth = Json::parse(slurp(dir / "bin1.truth.json"));
  const VectorXd alpha = vector_from_json(truth.at("alpha"));
  VectorXd expected(6);
  expected << -0.53, 0.35, -1.4, -1.4, -0.96, -2.33;
  CHECK((alpha - expected).lpNorm<Eigen::Infinity>() == 0.0);

  simulate_cmd(Scenario::Continuous1, 50, 1, (dir / "c1.csv").string());
  const Json truth_c = Json::parse(slurp(dir / "c1.truth.json"));
  const MatrixXd lambda = matrix_from_json(truth_c.at("lambda"));
  CHECK(lambda(0, 0) == 1.0);
  CHECK(lambda(1, 0) == 0.8);
  CHECK(lambda(5, 1) == 0.8);
  fs::remove_all(dir);
}

TEST_CASE("end-to-end run produces coherent artifacts and is seed-deterministic") {
  const fs::path dir = fs::temp_directory_path() / "sbfa_run_test";
  fs::remove_all(dir);
  RunConfig cfg;
  cfg.scenario = Scenario::Continuous1;
  cfg.scenario_n = 24;
  cfg.scenario_seed = 3;
  cfg.preset_labels = {"EZ", "EFA1"};
  cfg.factors = 2;
  cfg.engine.n_theta = 120;
  cfg.engine.hmc.pilot_steps = 120;
  cfg.out_dir = (dir / "a").string();
  cfg.master_seed = 5;
  run(cfg);

  CHECK(fs::exists(dir / "a" / "evidence.csv"));
  CHECK(fs::exists(dir / "a" / "lbf_trajectories.csv"));
  CHECK(fs::exists(dir / "a" / "triggers.csv"));
  CHECK(fs::exists(dir / "a" / "summary.txt"));
  CHECK(fs::exists(dir / "a" / "run_meta.json"));
  CHECK(fs::exists(dir / "a" / "posterior_draws_EZ.csv"));
  CHECK(fs::exists(dir / "a" / "checkpoints" / "EZ" / "ckpt_final.json"));

  // evidence.csv has one row per observation plus a header
  {
    std::ifstream in(dir / "a" / "evidence.csv");
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "index,EZ,EFA1");
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 24);
  }

  // identical master seed reproduces evidence.csv byte for byte
  cfg.out_dir = (dir / "b").string();
  run(cfg);
  CHECK(slurp(dir / "a" / "evidence.csv") == slurp(dir / "b" / "evidence.csv"));
  CHECK(slurp(dir / "a" / "lbf_trajectories.csv") == slurp(dir / "b" / "lbf_trajectories.csv"));

  // report runs off the artifacts
  std::ostringstream os;
  report((dir / "a").string(), os);
  CHECK(os.str().find("Final log model evidence") != std::string::npos);
  CHECK(os.str().find("EZ") != std::string::npos);
  fs::remove_all(dir);
}
