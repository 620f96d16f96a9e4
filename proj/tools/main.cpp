// netchoice command line: deterministic front end over the library.
//
// Subcommands: train, evaluate, propagate, synth, experiment, counterfactual,
// split. Every run is driven by a JSON config (--config); --seed, --workers
// and --out override the config. All error paths exit nonzero with a single
// "<code>: <message>" line on stderr; wall-clock time is logged per command.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netchoice/choice_data.hpp"
#include "netchoice/counterfactual.hpp"
#include "netchoice/csv.hpp"
#include "netchoice/errors.hpp"
#include "netchoice/evaluation.hpp"
#include "netchoice/gcn.hpp"
#include "netchoice/graph.hpp"
#include "netchoice/metrics.hpp"
#include "netchoice/optimizer.hpp"
#include "netchoice/propagation.hpp"
#include "netchoice/serialization.hpp"

using namespace netchoice;
using nlohmann::json;

namespace {

struct CliConfig {
  std::string observations;
  std::string chooser_features;
  std::string item_features;
  std::string edges;

  Family family = Family::Logit;
  Method method = Method::LogitFamily;
  std::vector<Method> methods{Method::LogitFamily, Method::Laplacian,
                              Method::Gcn, Method::Propagation};
  HyperGrid grid;
  std::optional<double> train_fraction;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  int trials = 8;
  std::uint64_t seed = 0;
  int max_epochs = kDefaultMaxEpochs;
  int workers = 1;
  double rho = 0.5;
  std::string evaluate_on = "test";
  std::string out = ".";

  bool fix_reference_item = false;
  bool fix_global_utilities = false;
  bool l2_on_intercepts = false;
  GcnConfig gcn;

  SampleComplexityPlan synth;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, path + ": " + e.what());
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

CliConfig parse_config(const std::string& path) {
  const json doc = load_json(path);
  CliConfig cfg;
  if (doc.contains("paths")) {
    const json& p = doc.at("paths");
    maybe(p, "observations", cfg.observations);
    maybe(p, "chooser_features", cfg.chooser_features);
    maybe(p, "item_features", cfg.item_features);
    maybe(p, "edges", cfg.edges);
  }
  if (doc.contains("family")) {
    cfg.family = family_from_string(doc.at("family").get<std::string>());
  }
  if (doc.contains("method")) {
    cfg.method = method_from_string(doc.at("method").get<std::string>());
  }
  if (doc.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : doc.at("methods")) {
      cfg.methods.push_back(method_from_string(m.get<std::string>()));
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    maybe(g, "learning_rates", cfg.grid.learning_rates);
    maybe(g, "l2_strengths", cfg.grid.l2_strengths);
    maybe(g, "lambdas", cfg.grid.lambdas);
    maybe(g, "rhos", cfg.grid.rhos);
  }
  if (doc.contains("train_fraction")) {
    cfg.train_fraction = doc.at("train_fraction").get<double>();
  }
  maybe(doc, "fractions", cfg.fractions);
  maybe(doc, "trials", cfg.trials);
  maybe(doc, "seed", cfg.seed);
  maybe(doc, "max_epochs", cfg.max_epochs);
  maybe(doc, "workers", cfg.workers);
  maybe(doc, "rho", cfg.rho);
  maybe(doc, "evaluate_on", cfg.evaluate_on);
  maybe(doc, "out", cfg.out);
  if (doc.contains("flags")) {
    const json& f = doc.at("flags");
    maybe(f, "fix_reference_item", cfg.fix_reference_item);
    maybe(f, "fix_global_utilities", cfg.fix_global_utilities);
    maybe(f, "l2_on_intercepts", cfg.l2_on_intercepts);
    bool concat_h0 = cfg.gcn.concat_input;
    maybe(f, "concat_h0", concat_h0);
    cfg.gcn.concat_input = concat_h0;
  }
  if (doc.contains("gcn")) {
    const json& g = doc.at("gcn");
    maybe(g, "layer1_dim", cfg.gcn.layer1_dim);
    maybe(g, "layer2_dim", cfg.gcn.layer2_dim);
    maybe(g, "embedding_dim", cfg.gcn.input_dim);
    maybe(g, "dropout_rate", cfg.gcn.dropout_rate);
    maybe(g, "concatenate_layers", cfg.gcn.concatenate_layers);
  }
  if (doc.contains("synth")) {
    const json& s = doc.at("synth");
    maybe(s, "n", cfg.synth.n);
    maybe(s, "p", cfg.synth.p);
    maybe(s, "k", cfg.synth.k);
    maybe(s, "lambdas", cfg.synth.lambdas);
    maybe(s, "samples", cfg.synth.samples);
    maybe(s, "trials", cfg.synth.trials);
    maybe(s, "epochs", cfg.synth.epochs);
    maybe(s, "learning_rate", cfg.synth.learning_rate);
    int lo = cfg.synth.set_size_range.first;
    int hi = cfg.synth.set_size_range.second;
    maybe(s, "set_size_min", lo);
    maybe(s, "set_size_max", hi);
    cfg.synth.set_size_range = {lo, hi};
  }
  return cfg;
}

ChoiceDataset load_configured_dataset(const CliConfig& cfg) {
  if (cfg.observations.empty()) {
    throw Error(ErrorCode::Config, "config has no paths.observations");
  }
  return load_dataset(cfg.observations, cfg.chooser_features,
                      cfg.item_features);
}

SocialGraph load_configured_graph(const CliConfig& cfg,
                                  const ChoiceDataset& ds) {
  if (cfg.edges.empty()) {
    throw Error(ErrorCode::Config,
                "this method needs a social graph: set paths.edges");
  }
  return load_edges(cfg.edges, ds.chooser_index);
}

ModelSpec spec_for_dataset(const CliConfig& cfg, const ChoiceDataset& ds) {
  ModelSpec spec;
  spec.family = cfg.family;
  spec.n = ds.n_choosers;
  spec.k = ds.n_items;
  spec.d_x = ds.d_x;
  spec.d_y = ds.d_y;
  spec.fix_reference_item = cfg.fix_reference_item;
  spec.fix_global_utilities = cfg.fix_global_utilities;
  spec.validate();
  return spec;
}

ChooserSplit configured_split(const CliConfig& cfg, const ChoiceDataset& ds) {
  if (!cfg.train_fraction.has_value()) {
    throw Error(ErrorCode::Config, "config has no train_fraction");
  }
  return split_choosers(ds, *cfg.train_fraction, cfg.seed);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
}

std::string out_path(const CliConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

int cmd_train(const CliConfig& cfg) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  const ChooserSplit split = configured_split(cfg, ds);

  switch (cfg.method) {
    case Method::LogitFamily:
    case Method::Laplacian: {
      std::optional<SocialGraph> graph;
      if (cfg.method == Method::Laplacian) {
        graph.emplace(load_configured_graph(cfg, ds));
      }
      ModelSpec spec = spec_for_dataset(cfg, ds);
      const GridSearchResult res = grid_search(
          cfg.method, spec, ds, split, cfg.grid, graph ? &*graph : nullptr,
          cfg.max_epochs, cfg.workers, cfg.l2_on_intercepts);
      spec.per_chooser_intercepts = cfg.method == Method::Laplacian;
      write_text(out_path(cfg, "params.json"),
                 params_to_json(res.report.final_params, spec));
      write_text(out_path(cfg, "report.json"),
                 report_to_json(res.report, res.best));
      std::cerr << "validation nll: " << res.validation_score << "\n";
      return 0;
    }
    case Method::Gcn: {
      const SocialGraph graph = load_configured_graph(cfg, ds);
      const GcnTrainReport report =
          train_gcn(graph, ds, split, cfg.gcn, cfg.grid, cfg.seed,
                    cfg.max_epochs, cfg.workers);
      write_text(out_path(cfg, "gcn_params.json"),
                 gcn_params_to_json(report.params, report.config));
      write_text(out_path(cfg, "report.json"), gcn_report_to_json(report));
      std::cerr << "validation nll: " << report.validation_nll << "\n";
      return 0;
    }
    case Method::Propagation:
      throw Error(ErrorCode::Config,
                  "propagation has no trained parameters; use the propagate "
                  "subcommand");
  }
  return 1;
}

std::vector<int> evaluation_choosers(const CliConfig& cfg,
                                     const ChoiceDataset& ds) {
  if (cfg.evaluate_on == "all" || !cfg.train_fraction.has_value()) {
    std::vector<int> all(ds.n_choosers);
    for (int i = 0; i < ds.n_choosers; ++i) all[i] = i;
    return all;
  }
  const ChooserSplit split = configured_split(cfg, ds);
  if (cfg.evaluate_on == "test") return split.test;
  if (cfg.evaluate_on == "validation") return split.validation;
  if (cfg.evaluate_on == "train") return split.train;
  throw Error(ErrorCode::Config,
              "evaluate_on must be one of test/validation/train/all");
}

int cmd_evaluate(const CliConfig& cfg, const std::string& params_path) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  std::ifstream in(params_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + params_path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  auto [params, spec] = params_from_json(text);
  if (spec.n != ds.n_choosers || spec.k != ds.n_items || spec.d_x != ds.d_x ||
      spec.d_y != ds.d_y) {
    throw Error(ErrorCode::Config,
                "fitted parameters do not match the dataset shapes");
  }
  const std::vector<int> choosers = evaluation_choosers(cfg, ds);
  json metrics;
  metrics["evaluate_on"] = cfg.evaluate_on;
  metrics["nll"] = negative_log_likelihood(params, spec, ds, choosers);
  metrics["mrr"] = model_mean_relative_rank(params, spec, ds, choosers);
  write_text(out_path(cfg, "metrics.json"), metrics.dump(2) + "\n");
  std::cout << metrics.dump(2) << "\n";
  return 0;
}

int cmd_split(const CliConfig& cfg) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  const ChooserSplit split = configured_split(cfg, ds);
  csv::Writer w(out_path(cfg, "split.csv"));
  w.write_row({"chooser_id", "role"});
  auto dump = [&](const std::vector<int>& ids, const char* role) {
    for (int a : ids) w.write_row({ds.chooser_ids[a], role});
  };
  dump(split.train, "train");
  dump(split.validation, "validation");
  dump(split.test, "test");
  return 0;
}

int cmd_propagate(const CliConfig& cfg) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  const SocialGraph graph = load_configured_graph(cfg, ds);
  std::vector<int> sources;
  if (cfg.train_fraction.has_value()) {
    sources = configured_split(cfg, ds).train;
  } else {
    sources.resize(ds.n_choosers);
    for (int i = 0; i < ds.n_choosers; ++i) sources[i] = i;
  }
  PropagationConfig pcfg;
  pcfg.rho = cfg.rho;
  const PropagationResult res =
      propagate(choice_fractions(ds, sources), graph, pcfg);
  if (!res.converged) {
    std::cerr << "propagation hit the iteration cap without converging\n";
  }
  write_fractions_csv(out_path(cfg, "zinf.csv"), res.z, ds.chooser_ids,
                      ds.item_ids);
  return 0;
}

int cmd_synth(const CliConfig& cfg) {
  SampleComplexityPlan plan = cfg.synth;
  plan.base_seed = cfg.seed;
  plan.workers = cfg.workers;
  const auto curves = run_sample_complexity(plan);
  write_curves_csv(out_path(cfg, "curves.csv"), curves);
  return 0;
}

int cmd_experiment(const CliConfig& cfg) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  const SocialGraph graph = load_configured_graph(cfg, ds);
  ExperimentPlan plan;
  plan.methods = cfg.methods;
  plan.fractions = cfg.fractions;
  plan.trials = cfg.trials;
  plan.base_seed = cfg.seed;
  plan.grid = cfg.grid;
  plan.family = cfg.family;
  plan.l2_on_intercepts = cfg.l2_on_intercepts;
  plan.gcn = cfg.gcn;
  plan.max_epochs = cfg.max_epochs;
  plan.workers = cfg.workers;
  const auto results = run_semi_supervised(ds, graph, plan);
  write_results_csv(out_path(cfg, "results.csv"), results);
  return 0;
}

Scenario load_scenario(const std::string& path, const ChoiceDataset& ds) {
  const json doc = load_json(path);
  Scenario scenario;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "replace_all_sets") {
    scenario.kind = Scenario::Kind::ReplaceAllSets;
  } else if (kind == "intersect_sets") {
    scenario.kind = Scenario::Kind::IntersectSets;
  } else if (kind == "add_item") {
    scenario.kind = Scenario::Kind::AddItem;
  } else {
    throw Error(ErrorCode::Schema,
                path + ": unknown scenario kind '" + kind + "'");
  }
  for (const auto& item : doc.at("items")) {
    const std::string id = item.get<std::string>();
    auto it = ds.item_index.find(id);
    if (it == ds.item_index.end()) {
      throw Error(ErrorCode::Schema, path + ": unknown item '" + id + "'");
    }
    scenario.items.push_back(it->second);
  }
  if (scenario.kind == Scenario::Kind::AddItem && scenario.items.size() != 1) {
    throw Error(ErrorCode::Schema, path + ": add_item takes exactly one item");
  }
  return scenario;
}

GroupMap load_groups(const std::string& path, const ChoiceDataset& ds) {
  const csv::Table table = csv::read_file(path);
  GroupMap groups;
  groups.group_of.assign(ds.n_choosers, -1);
  std::unordered_map<std::string, int> group_index;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + " row " + std::to_string(r);
    if (row.size() < 2) {
      throw Error(ErrorCode::Schema, where + ": two columns required");
    }
    auto it = ds.chooser_index.find(row[0]);
    if (it == ds.chooser_index.end()) {
      throw Error(ErrorCode::Schema,
                  where + ": unknown chooser '" + row[0] + "'");
    }
    auto [git, inserted] = group_index.emplace(
        row[1], static_cast<int>(groups.group_ids.size()));
    if (inserted) groups.group_ids.push_back(row[1]);
    groups.group_of[it->second] = git->second;
  }
  for (int a = 0; a < ds.n_choosers; ++a) {
    if (groups.group_of[a] < 0) {
      throw Error(ErrorCode::Schema,
                  path + ": chooser '" + ds.chooser_ids[a] + "' has no group");
    }
  }
  return groups;
}

int cmd_counterfactual(const CliConfig& cfg,
                       const std::vector<std::string>& params_paths,
                       const std::string& scenario_path,
                       const std::string& groups_path) {
  const ChoiceDataset ds = load_configured_dataset(cfg);
  const Scenario scenario = load_scenario(scenario_path, ds);
  const GroupMap groups = load_groups(groups_path, ds);

  std::vector<ModelParams> models;
  ModelSpec spec;
  for (size_t i = 0; i < params_paths.size(); ++i) {
    std::ifstream in(params_paths[i]);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + params_paths[i]);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    auto [params, s] = params_from_json(text);
    if (i == 0) {
      spec = s;
    } else if (s.n != spec.n || s.k != spec.k || s.d_x != spec.d_x ||
               s.family != spec.family ||
               s.per_chooser_intercepts != spec.per_chooser_intercepts) {
      throw Error(ErrorCode::Config, "ensemble members disagree on the spec");
    }
    models.push_back(std::move(params));
  }
  if (spec.n != ds.n_choosers || spec.k != ds.n_items || spec.d_x != ds.d_x) {
    throw Error(ErrorCode::Config,
                "fitted parameters do not match the dataset shapes");
  }

  // Base set per chooser: everything that chooser ever saw on a ballot.
  std::vector<std::set<int>> seen(ds.n_choosers);
  std::vector<double> weights(ds.n_choosers, 0.0);
  for (const auto& obs : ds.observations) {
    seen[obs.chooser].insert(obs.choice_set.begin(), obs.choice_set.end());
    weights[obs.chooser] += obs.weight;
  }
  std::vector<std::vector<int>> base(ds.n_choosers);
  for (int a = 0; a < ds.n_choosers; ++a) {
    base[a].assign(seen[a].begin(), seen[a].end());
  }

  std::vector<std::vector<int>> sets;
  try {
    sets = apply_scenario(base, scenario);
  } catch (const Error& e) {
    // Re-map the chooser index in the message to its external id.
    const std::string what = e.what();
    const auto pos = what.rfind("chooser ");
    if (e.code() != ErrorCode::Scenario || pos == std::string::npos) throw;
    const int chooser = std::stoi(what.substr(pos + 8));
    throw Error(ErrorCode::Scenario,
                "scenario empties the choice set of chooser '" +
                    ds.chooser_ids[chooser] + "'");
  }

  const Eigen::MatrixXd* features =
      spec.uses_chooser_features() ? &ds.chooser_features : nullptr;
  const EnsembleCounts counts =
      ensemble_counts(models, spec, features, sets, weights, groups);
  write_counts_csv(out_path(cfg, "counts.csv"), counts, groups, ds.item_ids);
  write_winners_csv(out_path(cfg, "winners.csv"),
                    plurality_winners(counts.mean), groups, ds.item_ids);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based discrete choice toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> workers_override;
  std::string out_override;
  app.add_option("--config", config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_override, "override config seed");
  app.add_option("--workers", workers_override, "override config workers");
  app.add_option("--out", out_override, "override output directory");

  auto* train_cmd = app.add_subcommand("train", "grid-search one method");
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "score fitted parameters");
  std::string params_path;
  evaluate_cmd->add_option("--params", params_path, "params.json")->required();
  auto* propagate_cmd =
      app.add_subcommand("propagate", "choice-fraction propagation");
  auto* synth_cmd = app.add_subcommand("synth", "sample-complexity study");
  auto* experiment_cmd =
      app.add_subcommand("experiment", "semi-supervised comparison");
  auto* counterfactual_cmd =
      app.add_subcommand("counterfactual", "scenario predictions");
  std::vector<std::string> ensemble_paths;
  std::string scenario_path, groups_path;
  counterfactual_cmd
      ->add_option("--params", ensemble_paths, "params.json files")
      ->required();
  counterfactual_cmd->add_option("--scenario", scenario_path, "scenario.json")
      ->required();
  counterfactual_cmd->add_option("--groups", groups_path, "groups.csv")
      ->required();
  auto* split_cmd = app.add_subcommand("split", "write the chooser split");

  CLI11_PARSE(app, argc, argv);

  const auto started = std::chrono::steady_clock::now();
  std::string command;
  int status = 1;
  try {
    CliConfig cfg = parse_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (workers_override) cfg.workers = *workers_override;
    if (!out_override.empty()) cfg.out = out_override;

    if (train_cmd->parsed()) {
      command = "train";
      status = cmd_train(cfg);
    } else if (evaluate_cmd->parsed()) {
      command = "evaluate";
      status = cmd_evaluate(cfg, params_path);
    } else if (propagate_cmd->parsed()) {
      command = "propagate";
      status = cmd_propagate(cfg);
    } else if (synth_cmd->parsed()) {
      command = "synth";
      status = cmd_synth(cfg);
    } else if (experiment_cmd->parsed()) {
      command = "experiment";
      status = cmd_experiment(cfg);
    } else if (counterfactual_cmd->parsed()) {
      command = "counterfactual";
      status = cmd_counterfactual(cfg, ensemble_paths, scenario_path,
                                  groups_path);
    } else if (split_cmd->parsed()) {
      command = "split";
      status = cmd_split(cfg);
    }
  } catch (const Error& e) {
    std::cerr << e.code_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - started;
  std::cerr << "[time] " << command << ": " << elapsed.count() << " s\n";
  return status;
}
