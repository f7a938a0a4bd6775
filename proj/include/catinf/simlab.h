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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "catinf/classifier.h"
#include "catinf/datta.h"
#include "catinf/influence.h"

namespace catinf::simlab {

enum class SimKind {
  // Four binary features; Y copies X1 in the first half, X2 in the rest.
  kMixtureBinary,
  // Four binary features; Y is an independent fair coin.
  kIndependentBinary,
  // Four ternary features; Y copies X1 in the first third, X2 in the rest.
  kMixtureTernary,
};

SimKind parse_kind(std::string_view name);  // "sim1" | "sim2" | "sim3"
std::string_view kind_name(SimKind kind);

struct SimSpec {
  SimKind kind = SimKind::kMixtureBinary;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

// Stream identifiers under the master seed.
enum class Stream : std::uint64_t { kFeatures = 1, kResponse = 2, kForest = 3 };
std::uint64_t stream_seed(std::uint64_t master, Stream stream);

FeatureSchema schema_for(SimKind kind);

Dataset generate_sim1(std::size_t n, std::uint64_t seed);
Dataset generate_sim2(std::size_t n, std::uint64_t seed);
Dataset generate_sim3(std::size_t n, std::uint64_t seed);
Dataset generate(const SimSpec& spec);

struct ExperimentOptions {
  ForestParams forest{};
  InfluenceConfig influence;
  Code target_class = 1;
  double threshold = 0.1;
};

struct ExperimentBundle {
  SimSpec spec;
  Dataset data;
  std::uint64_t forest_seed = 0;
  ForestParams forest{};
  double oob_accuracy = 0.0;
  std::vector<ScenarioReport> scan{};
  DattaResult datta{};
  // Wall-clock seconds per stage.
  double seconds_generate = 0.0;
  double seconds_train = 0.0;
  double seconds_scan = 0.0;
  double seconds_datta = 0.0;
};

// Generate, train the forest, scan b = target_class over T = K, and compute
// the Datta measure.
ExperimentBundle run_experiment(const SimSpec& spec,
                                const ExperimentOptions& options);

// Writes data.csv, schema.json, table.csv, table.json, datta.csv,
// datta.json, plot_<feature>.tsv and manifest.json into `dir`.
void write_experiment(const ExperimentBundle& bundle,
                      const std::filesystem::path& dir);

}  // namespace catinf::simlab
