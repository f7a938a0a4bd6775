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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "catinf/classifier.h"
#include "catinf/dataset.h"
#include "catinf/game.h"
#include "catinf/shapley.h"

namespace catinf {

struct InfluenceConfig {
  GameConfig game;
  std::size_t workers = 1;
  std::size_t max_players = kMaxShapleyPlayers;
  // Compute one game per distinct feature vector and reuse it for every
  // duplicate. Disabling it recomputes a game per row; results are identical.
  bool deduplicate = true;
  // The classifier is tabulated over A when |A| is at most this.
  std::uint64_t tabulate_cap = std::uint64_t{1} << 20;
  // Allowed gap between the direct total influence and the Shapley sum.
  double efficiency_tolerance = 1e-7;
};

// (a_R, b, T).
struct InfluenceQuery {
  PartialAssignment fixed;
  Code response = 0;
  Coalition scope = 0;
};

enum class EvalMode { kExact, kSampled };

struct InfluenceResult {
  InfluenceQuery query;
  // Members of T in ascending order, with I^Phi_l aligned to them.
  std::vector<std::size_t> players;
  std::vector<double> per_feature;
  // Direct evaluation of the total influence (mean of v(T)).
  double total = 0.0;
  std::size_t n_sub = 0;
  EvalMode mode = EvalMode::kExact;

  double at(std::size_t feature) const;
  double shapley_sum() const;
};

struct ScenarioRow {
  Code value = 0;
  // Absent when the subsample for this value is empty.
  std::optional<InfluenceResult> result;
  bool flagged = false;
};

// One feature's axis of a scan: influence of feature j and total influence
// for every value a_j.
struct ScenarioReport {
  std::size_t feature = 0;
  Code response = 0;
  Coalition scope = 0;
  double threshold = 0.0;
  std::vector<ScenarioRow> rows;
  std::vector<Code> flagged;
};

// Evaluates the influence measure for one (dataset, classifier) pair.
// Per-instance Shapley vectors are cached by (distinct vector, class, scope),
// so scans and repeated queries share work. Not thread-safe itself; it
// parallelizes internally over `config.workers`.
class InfluenceAnalyzer {
 public:
  InfluenceAnalyzer(const Dataset& ds, const Classifier& classifier,
                    InfluenceConfig config = {});

  const Dataset& dataset() const { return ds_; }
  const InfluenceConfig& config() const { return config_; }
  // Shared baseline term of every game.
  const Baseline& baseline() const { return *baseline_; }

  // I^Phi(a_R, b, T). Throws EmptySubsampleError when M^b_{a_R} is empty.
  InfluenceResult influence(const InfluenceQuery& q);
  // Total influence evaluated directly, without Shapley values.
  double total_influence(const InfluenceQuery& q);

  std::vector<ScenarioReport> scenario_scan(Code b, Coalition scope,
                                            double threshold);
  // scenario_scan over T = K \ {drop}.
  std::vector<ScenarioReport> feature_drop_analysis(Code b, std::size_t drop,
                                                    double threshold);

  // v^b_{X}|_T for an arbitrary full assignment, sharing the baseline.
  CoalitionGame make_game(std::span<const Code> instance, Code b) const;

 private:
  struct Attribution {
    std::vector<double> phi;
    double direct_total = 0.0;
    bool sampled = false;
  };
  using Key = std::tuple<std::size_t, Code, Coalition>;

  void check_query(const InfluenceQuery& q) const;
  Subsample select(const InfluenceQuery& q) const;
  Attribution attribute(std::span<const Code> instance, Code b,
                        Coalition scope) const;
  // Fills the cache for every distinct vector in `distinct` (parallel).
  void prepare(const std::vector<std::size_t>& distinct, Code b,
               Coalition scope);
  InfluenceResult assemble(const InfluenceQuery& q, const Subsample& sub);

  const Dataset& ds_;
  InfluenceConfig config_;
  std::unique_ptr<TabulatedClassifier> table_;
  const Classifier* classifier_;
  std::unique_ptr<Baseline> baseline_;
  std::map<Key, Attribution> cache_;
};

// One-shot conveniences over a temporary analyzer.
InfluenceResult influence(const Dataset& ds, const Classifier& c,
                          const InfluenceQuery& q, InfluenceConfig config = {});
double total_influence(const Dataset& ds, const Classifier& c,
                       const InfluenceQuery& q, InfluenceConfig config = {});

}  // namespace catinf
