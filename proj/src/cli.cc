/*
 * Copyright 2026 The catinfluence Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "catinf/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "catinf/datta.h"
#include "catinf/errors.h"
#include "catinf/influence.h"
#include "catinf/parallel.h"
#include "catinf/report.h"
#include "catinf/simlab.h"
#include "catinf/version.h"

namespace catinf::cli {
namespace {

using Clock = std::chrono::steady_clock;

const char* command_name(Command c) {
  switch (c) {
    case Command::kInfluence:
      return "influence";
    case Command::kScan:
      return "scan";
    case Command::kDrop:
      return "drop";
    case Command::kDatta:
      return "datta";
    case Command::kSimulate:
      return "simulate";
  }
  return "?";
}

bool wants(const RunConfig& config, std::string_view format) {
  return std::find(config.formats.begin(), config.formats.end(), format) !=
         config.formats.end();
}

void add_data_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--schema", c.schema_path, "Schema JSON file")->required();
  sub->add_option("--data", c.data_path, "Data CSV file")->required();
  sub->add_option("--classifier", c.classifier, "forest or frequency")
      ->check(CLI::IsMember({"forest", "frequency"}));
  sub->add_option("--alpha", c.alpha,
                  "Laplace smoothing of the frequency classifier");
  sub->add_flag("--observed-domains", c.observed_domains,
                "Restrict each feature domain to values present in the data");
  sub->add_option("--assignment-cap", c.assignment_cap,
                  "Largest accepted feature assignment space");
}

void add_forest_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--trees", c.forest.n_trees, "Number of trees");
  sub->add_option("--max-depth", c.forest.max_depth, "0 for unlimited");
  sub->add_option("--min-leaf", c.forest.min_leaf, "Minimum rows per leaf");
  sub->add_option("--features-per-split", c.forest.features_per_split,
                  "0 for ceil(sqrt(k))");
  sub->add_option("--seed", c.seed, "Master random seed");
}

void add_output_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out", c.out_dir, "Output directory");
  sub->add_option("--format", c.formats, "Report formats: csv, json")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
}

void add_game_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--mode", c.mode, "auto, exact or sampled")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Mode>{{"auto", Mode::kAuto},
                                      {"exact", Mode::kExact},
                                      {"sampled", Mode::kSampled}}));
  sub->add_option("--exact-budget", c.exact_budget,
                  "Largest marginalization enumerated exactly");
  sub->add_option("--samples", c.samples, "Draws per sampled coalition");
  sub->add_option("--class", c.response_label, "Response class label");
}

// Label-level query resolved to codes.
struct ResolvedQuery {
  PartialAssignment fixed;
  Code response = 0;
  Coalition scope = 0;
};

std::size_t resolve_feature(const FeatureSchema& schema,
                            const std::string& name) {
  const auto j = schema.find_feature(name);
  if (!j) throw ConfigError("unknown feature '" + name + "'");
  return *j;
}

ResolvedQuery resolve(const RunConfig& config, const FeatureSchema& schema) {
  ResolvedQuery q;
  const auto cls = schema.find_class(config.response_label);
  if (!cls) {
    throw ConfigError("class '" + config.response_label +
                      "' is not in the domain of " + schema.response().name);
  }
  q.response = *cls;
  for (const auto& item : config.fix) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--fix expects NAME=LABEL, got '" + item + "'");
    }
    const std::size_t j = resolve_feature(schema, item.substr(0, eq));
    const std::string label = item.substr(eq + 1);
    const auto v = schema.find_value(j, label);
    if (!v) {
      throw ConfigError("label '" + label + "' is not in the domain of " +
                        schema.feature_name(j));
    }
    q.fixed.push_back({j, *v});
  }
  q.fixed = normalize(schema, std::move(q.fixed));
  if (config.scope == "all") {
    q.scope = full_coalition(schema.num_features());
  } else {
    std::stringstream in(config.scope);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (name.empty()) continue;
      q.scope |= Coalition{1} << resolve_feature(schema, name);
    }
    if (q.scope == 0) throw ConfigError("--scope names no features");
  }
  return q;
}

GameConfig game_config(const RunConfig& config) {
  GameConfig g;
  g.seed = config.seed;
  g.samples = config.samples;
  g.baseline_exact_cap = config.assignment_cap;
  switch (config.mode) {
    case Mode::kAuto:
      g.exact_budget = config.exact_budget;
      break;
    case Mode::kExact:
      g.exact_budget = config.assignment_cap;
      g.allow_sampling = false;
      break;
    case Mode::kSampled:
      g.exact_budget = 0;
      break;
  }
  return g;
}

std::unique_ptr<Classifier> train(const RunConfig& config, const Dataset& ds,
                                  nlohmann::json& manifest) {
  if (config.classifier == "frequency") {
    manifest["classifier"] = {{"kind", "frequency"}, {"alpha", config.alpha}};
    return std::make_unique<FrequencyTableClassifier>(ds, config.alpha);
  }
  ForestParams params = config.forest;
  params.workers = config.workers;
  auto forest = std::make_unique<RandomForest>(
      RandomForest::train(ds, params, config.seed));
  manifest["classifier"] = {{"kind", "forest"},
                            {"trees", params.n_trees},
                            {"max_depth", params.max_depth},
                            {"min_leaf", params.min_leaf},
                            {"features_per_split", params.features_per_split},
                            {"seed", config.seed},
                            {"oob_accuracy", forest->out_of_bag_accuracy(ds)}};
  return forest;
}

// Simplex check on every distinct observed vector.
void validate_classifier(const Dataset& ds, const Classifier& c) {
  for (std::size_t d = 0; d < ds.num_distinct(); ++d) {
    const auto p = c.predict_proba(ds.distinct_vector(d));
    double sum = 0.0;
    for (const double x : p) {
      if (!(x >= 0.0)) throw Error("classifier produced a negative probability");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error("classifier output does not sum to one");
    }
  }
}

void emit(const RunConfig& config, const std::string& name,
          const std::string& content, nlohmann::json& outputs) {
  report::write_file_atomic(config.out_dir / name, content);
  outputs.push_back(name);
}

void write_scan_outputs(const RunConfig& config, const FeatureSchema& schema,
                        const std::vector<ScenarioReport>& reports,
                        nlohmann::json& outputs) {
  const std::string stem = config.command == Command::kDrop ? "drop" : "scan";
  const Coalition scope = reports.empty() ? 0 : reports.front().scope;
  if (wants(config, "csv")) {
    std::ostringstream table;
    report::write_scan_csv(table, schema, reports);
    emit(config, stem + ".csv", table.str(), outputs);

    // Full per-feature breakdown of every scenario with a nonempty subsample.
    std::vector<InfluenceResult> scenarios;
    for (const auto& axis : reports) {
      for (const auto& row : axis.rows) {
        if (row.result) scenarios.push_back(*row.result);
      }
    }
    std::ostringstream breakdown;
    report::write_breakdown_csv(breakdown, schema, scope, scenarios);
    emit(config, stem + "_scenarios.csv", breakdown.str(), outputs);
  }
  if (wants(config, "json")) {
    emit(config, stem + ".json",
         report::scan_to_json(schema, reports).dump(2) + "\n", outputs);
  }
  if (config.plot) {
    for (const auto& axis : reports) {
      std::ostringstream plot;
      report::write_plot_tsv(plot, schema, axis);
      emit(config, stem + "_plot_" + schema.feature_name(axis.feature) + ".tsv",
           plot.str(), outputs);
    }
  }
}

int run_simulate(const RunConfig& config, std::ostream& out) {
  simlab::SimSpec spec{simlab::parse_kind(config.sim_kind), config.sim_n,
                       config.seed};
  simlab::ExperimentOptions options;
  options.forest = config.forest;
  options.forest.workers = config.workers;
  options.influence.workers = config.workers;
  options.influence.game = game_config(config);
  options.threshold = config.threshold;
  const auto cls = simlab::schema_for(spec.kind).find_class(config.response_label);
  if (!cls) throw ConfigError("class '" + config.response_label + "' unknown");
  options.target_class = *cls;
  const auto bundle = simlab::run_experiment(spec, options);
  simlab::write_experiment(bundle, config.out_dir);
  out << "simulate " << simlab::kind_name(spec.kind) << ": n=" << spec.n
      << " oob_accuracy=" << report::format_number(bundle.oob_accuracy)
      << " -> " << config.out_dir.string() << "\n";
  return kOk;
}

int run_on_data(const RunConfig& config, std::ostream& out) {
  const auto start = Clock::now();
  nlohmann::json manifest;
  manifest["tool"] = "catinf";
  manifest["version"] = kVersion;
  manifest["command"] = command_name(config.command);

  const FeatureSchema declared =
      load_schema(config.schema_path, config.assignment_cap);
  Dataset loaded = load_dataset(declared, config.data_path);
  const Dataset ds = config.observed_domains
                         ? restrict_to_observed_domains(loaded)
                         : std::move(loaded);
  const auto& schema = ds.schema();
  manifest["inputs"] = {{"schema", config.schema_path.string()},
                        {"data", config.data_path.string()},
                        {"rows", ds.size()},
                        {"distinct_vectors", ds.num_distinct()},
                        {"domains", config.observed_domains ? "observed"
                                                            : "declared"}};

  // Labels resolve before any training starts.
  const ResolvedQuery q = resolve(config, schema);
  std::size_t drop = 0;
  if (config.command == Command::kDrop) {
    drop = resolve_feature(schema, config.drop_feature);
  }

  const auto train_start = Clock::now();
  const auto classifier = train(config, ds, manifest);
  validate_classifier(ds, *classifier);
  const double train_seconds =
      std::chrono::duration<double>(Clock::now() - train_start).count();

  std::filesystem::create_directories(config.out_dir);
  nlohmann::json outputs = nlohmann::json::array();
  InfluenceConfig icfg;
  icfg.workers = config.workers;
  icfg.game = game_config(config);
  std::string mode = "exact";

  switch (config.command) {
    case Command::kInfluence: {
      InfluenceAnalyzer analyzer(ds, *classifier, icfg);
      const InfluenceResult result =
          analyzer.influence({q.fixed, q.response, q.scope});
      mode = result.mode == EvalMode::kExact ? "exact" : "sampled";
      if (wants(config, "csv")) {
        std::ostringstream csv_out;
        report::write_breakdown_csv(
            csv_out, schema, result.query.scope,
            std::span<const InfluenceResult>(&result, 1));
        emit(config, "influence.csv", csv_out.str(), outputs);
      }
      if (wants(config, "json")) {
        emit(config, "influence.json",
             report::result_to_json(schema, result).dump(2) + "\n", outputs);
      }
      out << describe(schema, result.query.fixed) << " | "
          << schema.response().name << "="
          << schema.response().domain[q.response]
          << " | total=" << report::format_number(result.total)
          << " n_sub=" << result.n_sub << "\n";
      for (std::size_t l = 0; l < result.players.size(); ++l) {
        out << "  " << schema.feature_name(result.players[l]) << " "
            << report::format_number(result.per_feature[l]) << "\n";
      }
      manifest["query"] = {{"fixed", describe(schema, result.query.fixed)},
                           {"class", config.response_label},
                           {"scope", report::scope_label(schema, q.scope)}};
      break;
    }
    case Command::kScan:
    case Command::kDrop: {
      InfluenceAnalyzer analyzer(ds, *classifier, icfg);
      const auto reports =
          config.command == Command::kScan
              ? analyzer.scenario_scan(q.response, q.scope, config.threshold)
              : analyzer.feature_drop_analysis(q.response, drop,
                                               config.threshold);
      report::validate_scan(reports, icfg.efficiency_tolerance);
      for (const auto& axis : reports) {
        for (const auto& row : axis.rows) {
          if (row.result && row.result->mode == EvalMode::kSampled) {
            mode = "sampled";
          }
        }
      }
      write_scan_outputs(config, schema, reports, outputs);
      std::size_t flagged = 0;
      for (const auto& axis : reports) flagged += axis.flagged.size();
      out << command_name(config.command) << ": " << reports.size()
          << " features scanned, " << flagged << " scenarios flagged at tau="
          << report::format_number(config.threshold) << "\n";
      manifest["query"] = {
          {"class", config.response_label},
          {"scope", report::scope_label(schema, reports.empty()
                                                    ? q.scope
                                                    : reports.front().scope)},
          {"threshold", config.threshold}};
      if (config.command == Command::kDrop) {
        manifest["query"]["dropped"] = config.drop_feature;
      }
      break;
    }
    case Command::kDatta: {
      const auto result = datta_influence(
          ds, *classifier,
          config.raw_datta ? DattaNormalization::kRaw
                           : DattaNormalization::kPerDistinctVector,
          config.workers);
      if (wants(config, "csv")) {
        std::ostringstream csv_out;
        report::write_datta_csv(csv_out, schema, result);
        emit(config, "datta.csv", csv_out.str(), outputs);
      }
      if (wants(config, "json")) {
        emit(config, "datta.json",
             report::datta_to_json(schema, result).dump(2) + "\n", outputs);
      }
      for (std::size_t j = 0; j < result.values.size(); ++j) {
        out << schema.feature_name(j) << " "
            << report::format_number(result.values[j]) << "\n";
      }
      break;
    }
    case Command::kSimulate:
      break;
  }

  manifest["mode"] = mode;
  manifest["workers"] = config.workers;
  manifest["game"] = {{"exact_budget", icfg.game.exact_budget},
                      {"samples", icfg.game.samples},
                      {"allow_sampling", icfg.game.allow_sampling},
                      {"seed", icfg.game.seed}};
  manifest["timings_seconds"] = {
      {"train", train_seconds},
      {"total", std::chrono::duration<double>(Clock::now() - start).count()}};
  manifest["outputs"] = outputs;
  report::write_file_atomic(config.out_dir / "manifest.json",
                            manifest.dump(2) + "\n");
  return kOk;
}

}  // namespace

RunConfig parse_arguments(const std::vector<std::string>& args,
                          std::ostream& out, bool& proceed) {
  RunConfig c;
  CLI::App app{"Shapley-value influence of categorical features on a "
               "classification response",
               "catinf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* influence = app.add_subcommand("influence", "Influence of one query");
  add_data_options(influence, c);
  add_forest_options(influence, c);
  add_game_options(influence, c);
  add_output_options(influence, c);
  influence->add_option("--fix", c.fix, "Pinned feature NAME=LABEL")
      ->allow_extra_args(false);
  influence->add_option("--scope", c.scope, "all or comma-separated features");

  auto* scan = app.add_subcommand("scan", "Influence scenario scan");
  add_data_options(scan, c);
  add_forest_options(scan, c);
  add_game_options(scan, c);
  add_output_options(scan, c);
  scan->add_option("--scope", c.scope, "all or comma-separated features");
  scan->add_option("--tau", c.threshold, "Scenario threshold on |total|");
  scan->add_flag("--plot", c.plot, "Also write per-feature plot TSV files");

  auto* drop = app.add_subcommand("drop", "Scan with one feature left out");
  add_data_options(drop, c);
  add_forest_options(drop, c);
  add_game_options(drop, c);
  add_output_options(drop, c);
  drop->add_option("--feature", c.drop_feature, "Feature to leave out")
      ->required();
  drop->add_option("--tau", c.threshold, "Scenario threshold on |total|");
  drop->add_flag("--plot", c.plot, "Also write per-feature plot TSV files");

  auto* datta = app.add_subcommand("datta", "Classification-flip influence");
  add_data_options(datta, c);
  add_forest_options(datta, c);
  add_output_options(datta, c);
  datta->add_flag("--raw", c.raw_datta, "Report raw flip counts");

  auto* simulate = app.add_subcommand("simulate", "Run a simulation study");
  simulate->add_option("--kind", c.sim_kind, "sim1, sim2 or sim3")
      ->check(CLI::IsMember({"sim1", "sim2", "sim3"}));
  simulate->add_option("--n", c.sim_n, "Sample size");
  add_forest_options(simulate, c);
  add_game_options(simulate, c);
  add_output_options(simulate, c);
  simulate->add_option("--tau", c.threshold, "Scenario threshold on |total|");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  proceed = true;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    proceed = false;
    return c;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    proceed = false;
    return c;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  if (influence->parsed()) c.command = Command::kInfluence;
  if (scan->parsed()) c.command = Command::kScan;
  if (drop->parsed()) c.command = Command::kDrop;
  if (datta->parsed()) c.command = Command::kDatta;
  if (simulate->parsed()) c.command = Command::kSimulate;

  if (c.workers == 0) c.workers = default_workers();
  if (!(c.threshold >= 0.0)) throw ConfigError("--tau must be >= 0");
  if (!(c.alpha >= 0.0)) throw ConfigError("--alpha must be >= 0");
  if (c.samples == 0) throw ConfigError("--samples must be >= 1");
  if (c.forest.n_trees == 0) throw ConfigError("--trees must be >= 1");
  if (c.forest.min_leaf == 0) throw ConfigError("--min-leaf must be >= 1");
  if (c.sim_n == 0) throw ConfigError("--n must be >= 1");
  if (c.classifier == "frequency" && c.alpha == 0.0 &&
      c.mode == Mode::kSampled) {
    throw ConfigError(
        "--mode sampled with an unsmoothed frequency classifier (--alpha 0) "
        "would query unseen assignments; use --alpha > 0 or --mode exact");
  }
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == Command::kSimulate) return run_simulate(config, out);
    return run_on_data(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EmptySubsampleError& e) {
    err << "empty subsample: " << e.what() << "\n";
    return kEmptySubsample;
  } catch (const UnseenAssignmentError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << "\n";
    return kCapacityError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  RunConfig config;
  bool proceed = false;
  try {
    config = parse_arguments(args, out, proceed);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (!proceed) return kOk;
  return run(config, out, err);
}

}  // namespace catinf::cli
