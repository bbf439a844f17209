#include "sbfa/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "sbfa/csv_io.hpp"
#include "sbfa/errors.hpp"
#include "sbfa/parallel.hpp"
#include "sbfa/serialize.hpp"
#include "sbfa/version.hpp"

namespace fs = std::filesystem;

namespace sbfa {

namespace {

std::string zero_pad(int v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

void write_posterior_draws_header(std::ofstream& out, const ModelSpec& spec) {
  out << "checkpoint_step,particle,weight";
  const Theta probe = Theta::zeros(spec);
  for (const auto& [name, value] : flatten_free_scalars(spec, probe)) out << "," << name;
  out << "\n";
}

void append_posterior_draws(std::ofstream& out, const ModelSpec& spec, const ParticleSet& ps,
                            int step) {
  const double lse = log_sum_exp(ps.logw);
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const Theta fixed = fix_loading_signs_one(spec, ps.thetas[m]);
    out << step << "," << m << ","
        << format_double(std::exp(ps.logw[static_cast<Eigen::Index>(m)] - lse));
    for (const auto& [name, value] : flatten_free_scalars(spec, fixed))
      out << "," << format_double(value);
    out << "\n";
  }
}

std::string build_summary(const std::vector<std::string>& labels,
                          const std::vector<const SmcState*>& states) {
  std::vector<const EvidenceLedger*> ledgers;
  for (const auto* s : states) ledgers.push_back(&s->ledger);
  const ComparisonTable table = ComparisonTable::build(labels, ledgers);
  std::ostringstream os;
  os << "Final log model evidence (ranked):\n";
  for (int idx : table.ranking()) {
    os << "  " << std::left << std::setw(8) << labels[idx] << " "
       << format_double(table.final_evidence[idx]);
    if (states[idx]->init_evidence_missing) os << "  (relative to the initialization block)";
    os << "\n";
  }
  const int m = static_cast<int>(labels.size());
  if (m > 1) {
    os << "\nLog Bayes factors, cell = LBF(column model / row model):\n";
    os << std::setw(8) << "";
    for (int c = 0; c < m - 1; ++c) os << std::setw(12) << labels[c];
    os << "\n";
    for (int r = 1; r < m; ++r) {
      os << std::setw(8) << labels[r];
      for (int c = 0; c < m - 1; ++c) {
        if (c < r) {
          std::ostringstream cell;
          cell << std::fixed << std::setprecision(2) << table.lbf(c, r);
          os << std::setw(12) << cell.str();
        } else {
          os << std::setw(12) << "";
        }
      }
      os << "\n";
    }
    const std::vector<int> rank = table.ranking();
    const double top_lbf = table.lbf(rank[0], rank[1]);
    os << "\nBest model: " << labels[rank[0]] << " over " << labels[rank[1]] << " with LBF "
       << std::fixed << std::setprecision(2) << top_lbf << " (" << jeffreys_label(top_lbf)
       << ")\n";
    // antisymmetry spot check
    if (std::abs(table.lbf(0, m - 1) + table.lbf(m - 1, 0)) > 1e-12)
      throw ContractViolation("LBF matrix failed the antisymmetry check");
  }
  os << "\nResample triggers per model:\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    os << "  " << std::left << std::setw(8) << labels[i]
       << states[i]->policy.trigger_log.size();
    if (states[i]->proposal_fallbacks > 0)
      os << "  (proposal fallbacks to prior: " << states[i]->proposal_fallbacks << ")";
    os << "\n";
  }
  return os.str();
}

void run_one_replicate(const RunConfig& config, const Dataset& data, const ModelMenu& menu,
                       const fs::path& dir, std::uint64_t rep_index) {
  fs::create_directories(dir);
  RngStream master = RngStream::seeded(config.master_seed, rep_index);

  std::map<std::string, std::ofstream> draw_files;
  for (const auto& [label, spec] : menu.entries) {
    fs::create_directories(dir / "checkpoints" / label);
    auto& out = draw_files[label];
    out.open(dir / ("posterior_draws_" + label + ".csv"));
    write_posterior_draws_header(out, spec);
  }

  MenuStepCallback callback = [&](const std::string& label, const SmcEngine& engine,
                                  bool resampled) {
    if (!resampled || !config.checkpoints_at_resamples) return;
    const int step = engine.state().ps.i_processed;
    save_checkpoint(engine.state(),
                    (dir / "checkpoints" / label / ("ckpt_i" + zero_pad(step, 6) + ".json"))
                        .string());
    if (config.posterior_draws_at_checkpoints)
      append_posterior_draws(draw_files[label], engine.state().spec, engine.state().ps, step);
  };

  const MenuRunResult result = run_menu(menu, data, config.engine, master, callback);

  const int n = static_cast<int>(data.n());
  std::vector<const SmcState*> states;
  for (const auto& s : result.states) states.push_back(&s);

  // evidence.csv: per-model cumulative log evidence by observation index.
  {
    std::ofstream out(dir / "evidence.csv");
    out << "index";
    for (const auto& label : result.labels) out << "," << label;
    out << "\n";
    for (int i = 0; i < n; ++i) {
      out << (i + 1);
      for (const auto* s : states) {
        out << ",";
        const bool missing = s->init_evidence_missing && i < config.engine.n_init;
        if (!missing && i < static_cast<int>(s->ledger.size()))
          out << format_double(s->ledger.cumulative[i]);
      }
      out << "\n";
    }
  }

  // lbf_trajectories.csv over all unordered pairs.
  if (result.labels.size() > 1) {
    std::ofstream out(dir / "lbf_trajectories.csv");
    out << "index";
    for (std::size_t a = 0; a < result.labels.size(); ++a)
      for (std::size_t b = a + 1; b < result.labels.size(); ++b)
        out << "," << result.labels[a] << "_vs_" << result.labels[b];
    out << "\n";
    for (int i = 0; i < n; ++i) {
      out << (i + 1);
      for (std::size_t a = 0; a < result.labels.size(); ++a)
        for (std::size_t b = a + 1; b < result.labels.size(); ++b)
          out << ","
              << format_double(states[a]->ledger.cumulative[i] - states[b]->ledger.cumulative[i]);
      out << "\n";
    }
  }

  {
    std::ofstream out(dir / "triggers.csv");
    out << "model,step\n";
    for (std::size_t i = 0; i < result.labels.size(); ++i)
      for (int step : states[i]->policy.trigger_log)
        out << result.labels[i] << "," << step << "\n";
  }

  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    append_posterior_draws(draw_files[result.labels[i]], result.states[i].spec,
                           result.states[i].ps, n);
    save_checkpoint(result.states[i],
                    (dir / "checkpoints" / result.labels[i] / "ckpt_final.json").string());
  }

  {
    std::ofstream out(dir / "summary.txt");
    out << build_summary(result.labels, states);
  }
}

Json config_echo(const RunConfig& config) {
  Json j;
  if (config.scenario) {
    Json ds{{"n", config.scenario_n}, {"seed", config.scenario_seed}};
    switch (*config.scenario) {
      case Scenario::Continuous1: ds["scenario"] = "continuous1"; break;
      case Scenario::Continuous2: ds["scenario"] = "continuous2"; break;
      case Scenario::Binary1: ds["scenario"] = "binary1"; break;
    }
    j["dataset"] = ds;
  } else {
    j["dataset"] = Json{{"path", config.data_path}, {"standardize", config.standardize}};
  }
  Json models = Json::array();
  for (const auto& label : config.preset_labels) models.push_back(label);
  for (const auto& [label, spec] : config.custom_models)
    models.push_back(Json{{"label", label}, {"spec", spec_to_json(spec)}});
  j["models"] = models;
  j["factors"] = config.factors;
  j["engine"] = Json{{"n_theta", config.engine.n_theta},
                     {"gamma_fraction", config.engine.gamma_fraction},
                     {"proposal", proposal_kind_name(config.engine.proposal)},
                     {"n_init", config.engine.n_init},
                     {"pilot_steps", config.engine.hmc.pilot_steps},
                     {"short_steps", config.engine.hmc.short_steps},
                     {"target_accept", config.engine.hmc.target_accept},
                     {"n_leapfrog", config.engine.hmc.n_leapfrog},
                     {"replicates", config.replicates},
                     {"seed_init_evidence", config.engine.init.seed_evidence}};
  j["seed"] = config.master_seed;
  return j;
}

}  // namespace

void run(const RunConfig& config) {
  const Dataset data = load_dataset(config);
  const ModelMenu menu = build_menu(config, data);
  const fs::path root(config.out_dir);
  fs::create_directories(root);

  {
    Json meta;
    meta["tool"] = "sbfa";
    meta["version"] = kVersion;
    meta["config"] = config_echo(config);
    meta["workers"] = worker_count();
    meta["n_observations"] = data.n();
    meta["items"] = data.item_names;
    std::ofstream out(root / "run_meta.json");
    out << meta.dump(2) << "\n";
  }

  for (int rep = 0; rep < config.replicates; ++rep) {
    const fs::path dir =
        config.replicates > 1 ? root / ("rep" + zero_pad(rep + 1, 2)) : root;
    run_one_replicate(config, data, menu, dir, static_cast<std::uint64_t>(rep));
  }

  if (config.replicates > 1) {
    // Cross-replicate spread of the final evidence per model.
    std::vector<std::string> labels;
    std::vector<std::vector<double>> finals;
    for (int rep = 0; rep < config.replicates; ++rep) {
      const fs::path f = root / ("rep" + zero_pad(rep + 1, 2)) / "evidence.csv";
      std::ifstream in(f);
      std::string header, line, last;
      std::getline(in, header);
      while (std::getline(in, line))
        if (!line.empty()) last = line;
      std::stringstream hs(header), ls(last);
      std::string tok;
      std::getline(hs, tok, ',');
      std::getline(ls, tok, ',');
      std::size_t col = 0;
      std::string name;
      while (std::getline(hs, name, ',')) {
        std::getline(ls, tok, ',');
        if (rep == 0) {
          labels.push_back(name);
          finals.emplace_back();
        }
        finals[col].push_back(std::stod(tok));
        ++col;
      }
    }
    std::ofstream out(root / "evidence_replicates.csv");
    out << "model,mean,sd";
    for (int rep = 0; rep < config.replicates; ++rep) out << ",rep" << (rep + 1);
    out << "\n";
    for (std::size_t c = 0; c < labels.size(); ++c) {
      double mean = 0.0;
      for (double v : finals[c]) mean += v;
      mean /= finals[c].size();
      double var = 0.0;
      for (double v : finals[c]) var += (v - mean) * (v - mean);
      var = finals[c].size() > 1 ? var / (finals[c].size() - 1) : 0.0;
      out << labels[c] << "," << format_double(mean) << "," << format_double(std::sqrt(var));
      for (double v : finals[c]) out << "," << format_double(v);
      out << "\n";
    }
  }
}

void simulate_cmd(Scenario which, int n, std::uint64_t seed, const std::string& out_path) {
  RngStream rng = RngStream::seeded(seed, 0x5C3);
  const int rows = n > 0 ? n : scenario_default_n(which);
  const TrueParams params = scenario_params(which);
  const Dataset ds = simulate_from_params(params, rows, rng);
  const fs::path out(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_csv(out_path, ds.item_names, ds.values);

  Json truth;
  truth["link"] = link_name(params.link);
  truth["alpha"] = vector_to_json(params.alpha);
  truth["lambda"] = matrix_to_json(params.lambda);
  truth["phi"] = matrix_to_json(params.phi);
  truth["psi_diag"] = vector_to_json(params.psi_diag);
  truth["n"] = rows;
  truth["seed"] = seed;
  fs::path sidecar = out;
  sidecar.replace_extension(".truth.json");
  std::ofstream side(sidecar);
  side << truth.dump(2) << "\n";
}

void report(const std::string& run_dir, std::ostream& os) {
  const fs::path dir(run_dir);
  const fs::path ckpt_root = dir / "checkpoints";
  if (!fs::exists(ckpt_root)) throw DataError("report: " + run_dir + " has no checkpoints/");
  std::vector<std::string> labels;
  std::vector<SmcState> states;
  for (const auto& entry : fs::directory_iterator(ckpt_root)) {
    if (!entry.is_directory()) continue;
    const fs::path final_ckpt = entry.path() / "ckpt_final.json";
    if (!fs::exists(final_ckpt)) continue;
    labels.push_back(entry.path().filename().string());
    states.push_back(load_checkpoint(final_ckpt.string()));
  }
  if (labels.empty()) throw DataError("report: no final checkpoints under " + run_dir);
  // Stable order: by label.
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<std::string> sorted_labels;
  std::vector<const SmcState*> sorted_states;
  for (std::size_t i : order) {
    sorted_labels.push_back(labels[i]);
    sorted_states.push_back(&states[i]);
  }
  os << build_summary(sorted_labels, sorted_states);
}

}  // namespace sbfa
