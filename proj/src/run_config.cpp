#include "sbfa/run_config.hpp"

#include <fstream>
#include <set>

#include "sbfa/csv_io.hpp"
#include "sbfa/errors.hpp"
#include "sbfa/serialize.hpp"

namespace sbfa {

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

Scenario scenario_from_name(const std::string& s) {
  if (s == "continuous1") return Scenario::Continuous1;
  if (s == "continuous2") return Scenario::Continuous2;
  if (s == "binary1") return Scenario::Binary1;
  throw ConfigError("unknown scenario: " + s + " (continuous1|continuous2|binary1)");
}

ProposalKind proposal_from_name(const std::string& s) {
  if (s == "prior") return ProposalKind::Prior;
  if (s == "laplace") return ProposalKind::Laplace;
  if (s == "vb") return ProposalKind::VB;
  throw ConfigError("unknown proposal kind: " + s + " (prior|laplace|vb)");
}

}  // namespace

RunConfig run_config_from_json(const std::string& text, const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("cannot parse " + origin + ": " + e.what());
  }
  reject_unknown_keys(j, {"dataset", "models", "factors", "engine", "output", "seed"}, origin);
  RunConfig cfg;

  if (!j.contains("dataset")) throw ConfigError("missing 'dataset' section");
  const Json& ds = j.at("dataset");
  reject_unknown_keys(ds, {"path", "scenario", "n", "seed", "kind", "standardize"},
                      "dataset section");
  if (ds.contains("path") == ds.contains("scenario"))
    throw ConfigError("dataset needs exactly one of 'path' or 'scenario'");
  if (ds.contains("path")) cfg.data_path = ds.at("path").get<std::string>();
  if (ds.contains("scenario"))
    cfg.scenario = scenario_from_name(ds.at("scenario").get<std::string>());
  cfg.scenario_n = ds.value("n", 0);
  cfg.scenario_seed = ds.value("seed", 1ULL);
  if (ds.contains("kind")) {
    const std::string kind = ds.at("kind").get<std::string>();
    if (kind == "binary")
      cfg.kind_override = Dataset::Kind::Binary;
    else if (kind == "continuous")
      cfg.kind_override = Dataset::Kind::Continuous;
    else
      throw ConfigError("dataset.kind must be 'binary' or 'continuous'");
  }
  cfg.standardize = ds.value("standardize", false);

  if (!j.contains("models")) throw ConfigError("missing 'models' list");
  for (const auto& entry : j.at("models")) {
    if (entry.is_string()) {
      cfg.preset_labels.push_back(entry.get<std::string>());
      std::string kind;
      int k = 0;
      if (!parse_preset_label(cfg.preset_labels.back(), kind, k))
        throw ConfigError("unknown model preset: " + cfg.preset_labels.back());
    } else {
      reject_unknown_keys(entry, {"label", "spec"}, "inline model entry");
      cfg.custom_models.emplace_back(entry.at("label").get<std::string>(),
                                     spec_from_json(entry.at("spec")));
    }
  }
  cfg.factors = j.value("factors", 2);
  if (cfg.factors < 1) throw ConfigError("'factors' must be >= 1");

  if (j.contains("engine")) {
    const Json& e = j.at("engine");
    reject_unknown_keys(e,
                        {"n_theta", "gamma_fraction", "proposal", "n_init", "pilot_steps",
                         "short_steps", "target_accept", "n_leapfrog", "replicates",
                         "seed_init_evidence", "init_evidence_particles", "batch_adapt_steps",
                         "batch_thin"},
                        "engine section");
    cfg.engine.n_theta = e.value("n_theta", cfg.engine.n_theta);
    cfg.engine.gamma_fraction = e.value("gamma_fraction", cfg.engine.gamma_fraction);
    if (e.contains("proposal"))
      cfg.engine.proposal = proposal_from_name(e.at("proposal").get<std::string>());
    cfg.engine.n_init = e.value("n_init", cfg.engine.n_init);
    cfg.engine.hmc.pilot_steps = e.value("pilot_steps", cfg.engine.hmc.pilot_steps);
    cfg.engine.hmc.short_steps = e.value("short_steps", cfg.engine.hmc.short_steps);
    cfg.engine.hmc.target_accept = e.value("target_accept", cfg.engine.hmc.target_accept);
    cfg.engine.hmc.n_leapfrog = e.value("n_leapfrog", cfg.engine.hmc.n_leapfrog);
    cfg.replicates = e.value("replicates", 1);
    cfg.engine.init.seed_evidence = e.value("seed_init_evidence", true);
    cfg.engine.init.evidence_particles =
        e.value("init_evidence_particles", cfg.engine.init.evidence_particles);
    cfg.engine.init.adapt_steps = e.value("batch_adapt_steps", cfg.engine.init.adapt_steps);
    cfg.engine.init.thin = e.value("batch_thin", cfg.engine.init.thin);
    cfg.engine.init.proposal = cfg.engine.proposal;
  }
  if (cfg.engine.n_theta < 1) throw ConfigError("engine.n_theta must be >= 1");
  if (!(cfg.engine.gamma_fraction > 0.0 && cfg.engine.gamma_fraction <= 1.0))
    throw ConfigError("engine.gamma_fraction must lie in (0, 1]");
  if (cfg.replicates < 1) throw ConfigError("engine.replicates must be >= 1");
  if (cfg.engine.n_init < 0) throw ConfigError("engine.n_init must be >= 0");

  if (!j.contains("output")) throw ConfigError("missing 'output' section");
  const Json& o = j.at("output");
  reject_unknown_keys(o, {"dir", "checkpoints", "posterior_draws"}, "output section");
  cfg.out_dir = o.at("dir").get<std::string>();
  if (o.contains("checkpoints")) {
    const std::string c = o.at("checkpoints").get<std::string>();
    if (c == "resample")
      cfg.checkpoints_at_resamples = true;
    else if (c == "final")
      cfg.checkpoints_at_resamples = false;
    else
      throw ConfigError("output.checkpoints must be 'resample' or 'final'");
  }
  if (o.contains("posterior_draws")) {
    const std::string c = o.at("posterior_draws").get<std::string>();
    if (c == "checkpoints")
      cfg.posterior_draws_at_checkpoints = true;
    else if (c == "final")
      cfg.posterior_draws_at_checkpoints = false;
    else
      throw ConfigError("output.posterior_draws must be 'final' or 'checkpoints'");
  }

  cfg.master_seed = j.value("seed", 1ULL);
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_config_from_json(text, path);
}

Dataset load_dataset(const RunConfig& config) {
  if (config.scenario) {
    RngStream rng = RngStream::seeded(config.scenario_seed, 0x5C3);
    const int n = config.scenario_n > 0 ? config.scenario_n : scenario_default_n(*config.scenario);
    return simulate_scenario(*config.scenario, n, rng);
  }
  return ingest_csv(config.data_path, config.kind_override, config.standardize);
}

ModelMenu build_menu(const RunConfig& config, const Dataset& data) {
  const Link link = data.kind == Dataset::Kind::Binary ? Link::Logit : Link::Identity;
  const int p = static_cast<int>(data.p());
  ModelMenu menu;
  for (const auto& label : config.preset_labels)
    menu.add(label, preset_spec(label, p, config.factors, link));
  for (const auto& [label, spec] : config.custom_models) menu.add(label, spec);
  menu.validate();
  return menu;
}

}  // namespace sbfa
