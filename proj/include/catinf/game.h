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
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "catinf/classifier.h"
#include "catinf/dataset.h"

namespace catinf {

// Subset of players as a bitmask; bit j is feature j.
using Coalition = std::uint64_t;

inline Coalition full_coalition(std::size_t players) {
  return players >= 64 ? ~Coalition{0} : (Coalition{1} << players) - 1;
}
inline bool contains_player(Coalition s, std::size_t j) {
  return ((s >> j) & 1u) != 0;
}
inline Coalition without_player(Coalition s, std::size_t j) {
  return s & ~(Coalition{1} << j);
}
std::vector<std::size_t> players_of(Coalition s);

// A cooperative game (N, v) with N = {0, ..., n-1} and v(empty) = 0.
// value() may memoize, so a game instance belongs to one thread at a time.
class Game {
 public:
  virtual ~Game() = default;
  virtual std::size_t num_players() const = 0;
  virtual double value(Coalition s) = 0;
};

// Game given by an explicit table of 2^n values.
class TabularGame final : public Game {
 public:
  // values[s] is v(s); values.size() must be 2^n and values[0] must be 0.
  TabularGame(std::size_t players, std::vector<double> values);

  std::size_t num_players() const override { return players_; }
  double value(Coalition s) override { return values_[s]; }

 private:
  std::size_t players_;
  std::vector<double> values_;
};

// v|_T: the game seen only through coalitions inside `scope`.
struct GameRestriction {
  Game* game = nullptr;
  Coalition scope = 0;

  // Throws ConfigError if s is not a subset of scope.
  double value(Coalition s) const;
  GameRestriction narrowed(Coalition new_scope) const;
};

struct GameConfig {
  // Largest |A_{K\S}| marginalized by full enumeration.
  std::uint64_t exact_budget = std::uint64_t{1} << 16;
  // Draws per coalition once the exact budget is exceeded.
  std::uint64_t samples = std::uint64_t{1} << 14;
  // Largest |A| for which the baseline term is enumerated exactly.
  std::uint64_t baseline_exact_cap = FeatureSchema::kDefaultAssignmentCap;
  bool allow_sampling = true;
  std::uint64_t seed = 0;
};

// (1/|A|) sum_{a in A} f^M_b(a), computed at most once per class and shared
// by every instance game of the same classifier. Thread-safe.
class Baseline {
 public:
  Baseline(const Classifier& classifier, const FeatureSchema& schema,
           GameConfig config);

  // Throws CapacityError if |A| exceeds the exact cap and sampling is off.
  double value(Code b) const;
  bool sampled(Code b) const;

 private:
  void compute(Code b) const;

  const Classifier& classifier_;
  const FeatureSchema& schema_;
  GameConfig config_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<double> values_;
  mutable std::vector<char> sampled_;
};

// v^b_{X^i}(S): mean of f^M_b with S pinned to the instance and the other
// features averaged uniformly over their domains, minus the baseline.
class CoalitionGame final : public Game {
 public:
  CoalitionGame(const Classifier& classifier, const FeatureSchema& schema,
                std::span<const Code> instance, Code target_class,
                const Baseline& baseline, GameConfig config);

  std::size_t num_players() const override { return schema_.num_features(); }
  // Memoized coalition_value.
  double value(Coalition s) override;

  // Unmemoized evaluation: exact enumeration within the budget, otherwise
  // sampled with a seed derived from (config seed, instance, class, S).
  double coalition_value(Coalition s) const;
  // Monte Carlo estimate from m uniform draws of the free features.
  double coalition_value_sampled(Coalition s, std::uint64_t m,
                                 std::uint64_t seed) const;

  double baseline() const { return baseline_value_; }
  const Assignment& instance() const { return instance_; }
  Code target_class() const { return target_class_; }
  // True once any evaluation (or the baseline) had to sample.
  bool used_sampling() const { return used_sampling_; }
  void clear_cache();

 private:
  std::uint64_t free_space_size(Coalition s) const;
  double exact_mean(Coalition s) const;

  const Classifier& classifier_;
  const FeatureSchema& schema_;
  Assignment instance_;
  Code target_class_;
  GameConfig config_;
  double baseline_value_;
  std::uint64_t instance_key_;
  mutable bool used_sampling_;
  std::vector<double> dense_cache_;
  std::vector<char> dense_known_;
  std::unordered_map<Coalition, double> sparse_cache_;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace catinf
