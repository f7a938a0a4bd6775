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

#include "catinf/simlab.h"

#include <chrono>
#include <sstream>

#include "catinf/errors.h"
#include "catinf/random.h"
#include "catinf/report.h"
#include "catinf/version.h"

namespace catinf::simlab {
namespace {

FeatureSpec labelled(std::string name, std::size_t values) {
  FeatureSpec spec{std::move(name), {}};
  for (std::size_t v = 0; v < values; ++v) {
    spec.domain.push_back(std::to_string(v));
  }
  return spec;
}

std::size_t ceil_div(std::size_t n, std::size_t d) { return (n + d - 1) / d; }

Dataset generate_mixture(SimKind kind, std::size_t n, std::uint64_t seed,
                         std::size_t values, std::size_t copies_x1) {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  FeatureSchema schema = schema_for(kind);
  Rng features(stream_seed(seed, Stream::kFeatures));
  std::vector<Assignment> rows(n, Assignment(4));
  std::vector<Code> responses(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : rows[i]) {
      x = static_cast<Code>(uniform_below(features, values));
    }
    responses[i] = i < copies_x1 ? rows[i][0] : rows[i][1];
  }
  return Dataset(std::move(schema), std::move(rows), std::move(responses));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

SimKind parse_kind(std::string_view name) {
  if (name == "sim1") return SimKind::kMixtureBinary;
  if (name == "sim2") return SimKind::kIndependentBinary;
  if (name == "sim3") return SimKind::kMixtureTernary;
  throw ConfigError("unknown simulation kind '" + std::string(name) +
                    "' (expected sim1, sim2 or sim3)");
}

std::string_view kind_name(SimKind kind) {
  switch (kind) {
    case SimKind::kMixtureBinary:
      return "sim1";
    case SimKind::kIndependentBinary:
      return "sim2";
    case SimKind::kMixtureTernary:
      return "sim3";
  }
  return "unknown";
}

std::uint64_t stream_seed(std::uint64_t master, Stream stream) {
  return derive_seed(master, {static_cast<std::uint64_t>(stream)});
}

FeatureSchema schema_for(SimKind kind) {
  const std::size_t values = kind == SimKind::kMixtureTernary ? 3 : 2;
  std::vector<FeatureSpec> features;
  for (int j = 1; j <= 4; ++j) {
    features.push_back(labelled("X" + std::to_string(j), values));
  }
  return FeatureSchema(std::move(features), labelled("Y", values));
}

Dataset generate_sim1(std::size_t n, std::uint64_t seed) {
  return generate_mixture(SimKind::kMixtureBinary, n, seed, 2, ceil_div(n, 2));
}

Dataset generate_sim2(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  Rng features(stream_seed(seed, Stream::kFeatures));
  Rng response(stream_seed(seed, Stream::kResponse));
  std::vector<Assignment> rows(n, Assignment(4));
  std::vector<Code> responses(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : rows[i]) x = fair_coin(features) ? 1 : 0;
    responses[i] = fair_coin(response) ? 1 : 0;
  }
  return Dataset(schema_for(SimKind::kIndependentBinary), std::move(rows),
                 std::move(responses));
}

Dataset generate_sim3(std::size_t n, std::uint64_t seed) {
  return generate_mixture(SimKind::kMixtureTernary, n, seed, 3, ceil_div(n, 3));
}

Dataset generate(const SimSpec& spec) {
  switch (spec.kind) {
    case SimKind::kMixtureBinary:
      return generate_sim1(spec.n, spec.seed);
    case SimKind::kIndependentBinary:
      return generate_sim2(spec.n, spec.seed);
    case SimKind::kMixtureTernary:
      return generate_sim3(spec.n, spec.seed);
  }
  throw ConfigError("unknown simulation kind");
}

ExperimentBundle run_experiment(const SimSpec& spec,
                                const ExperimentOptions& options) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  Dataset data = generate(spec);
  const double t_generate = seconds_since(start);

  ExperimentBundle bundle{.spec = spec, .data = std::move(data)};
  bundle.seconds_generate = t_generate;
  bundle.forest = options.forest;
  bundle.forest_seed = stream_seed(spec.seed, Stream::kForest);

  start = Clock::now();
  const RandomForest forest =
      RandomForest::train(bundle.data, options.forest, bundle.forest_seed);
  bundle.oob_accuracy = forest.out_of_bag_accuracy(bundle.data);
  bundle.seconds_train = seconds_since(start);

  start = Clock::now();
  InfluenceAnalyzer analyzer(bundle.data, forest, options.influence);
  bundle.scan = analyzer.scenario_scan(
      options.target_class, full_coalition(bundle.data.schema().num_features()),
      options.threshold);
  report::validate_scan(bundle.scan, options.influence.efficiency_tolerance);
  bundle.seconds_scan = seconds_since(start);

  start = Clock::now();
  bundle.datta =
      datta_influence(bundle.data, forest,
                      DattaNormalization::kPerDistinctVector,
                      options.influence.workers);
  bundle.seconds_datta = seconds_since(start);
  return bundle;
}

void write_experiment(const ExperimentBundle& bundle,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& schema = bundle.data.schema();

  std::ostringstream data;
  write_dataset_csv(bundle.data, data);
  report::write_file_atomic(dir / "data.csv", data.str());
  report::write_file_atomic(dir / "schema.json", schema_to_json(schema));

  std::ostringstream table;
  report::write_scan_csv(table, schema, bundle.scan);
  report::write_file_atomic(dir / "table.csv", table.str());
  report::write_file_atomic(
      dir / "table.json", report::scan_to_json(schema, bundle.scan).dump(2) + "\n");
  for (const auto& axis : bundle.scan) {
    std::ostringstream plot;
    report::write_plot_tsv(plot, schema, axis);
    report::write_file_atomic(
        dir / ("plot_" + schema.feature_name(axis.feature) + ".tsv"),
        plot.str());
  }

  std::ostringstream datta;
  report::write_datta_csv(datta, schema, bundle.datta);
  report::write_file_atomic(dir / "datta.csv", datta.str());
  report::write_file_atomic(
      dir / "datta.json",
      report::datta_to_json(schema, bundle.datta).dump(2) + "\n");

  nlohmann::json manifest;
  manifest["tool"] = "catinf";
  manifest["version"] = kVersion;
  manifest["command"] = "simulate";
  manifest["simulation"] = {
      {"kind", kind_name(bundle.spec.kind)},
      {"n", bundle.spec.n},
      {"seed", bundle.spec.seed},
      {"response_assignment",
       bundle.spec.kind == SimKind::kIndependentBinary
           ? "independent fair coin"
           : "deterministic split: leading rows copy X1, remaining rows "
             "copy X2"}};
  manifest["forest"] = {{"trees", bundle.forest.n_trees},
                        {"max_depth", bundle.forest.max_depth},
                        {"min_leaf", bundle.forest.min_leaf},
                        {"features_per_split",
                         bundle.forest.features_per_split},
                        {"leaf_alpha", bundle.forest.leaf_alpha},
                        {"seed", bundle.forest_seed},
                        {"oob_accuracy", bundle.oob_accuracy}};
  bool sampled = false;
  for (const auto& axis : bundle.scan) {
    for (const auto& row : axis.rows) {
      sampled = sampled || (row.result && row.result->mode == EvalMode::kSampled);
    }
  }
  manifest["mode"] = sampled ? "sampled" : "exact";
  manifest["timings_seconds"] = {{"generate", bundle.seconds_generate},
                                 {"train", bundle.seconds_train},
                                 {"scan", bundle.seconds_scan},
                                 {"datta", bundle.seconds_datta}};
  manifest["outputs"] = {"data.csv", "schema.json", "table.csv", "table.json",
                         "datta.csv", "datta.json"};
  report::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace catinf::simlab
