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

#include "catinf/game.h"

#include <bit>
#include <cmath>
#include <string>

#include "catinf/errors.h"
#include "catinf/random.h"

namespace catinf {
namespace {

// Dense memo tables are used up to this many players.
constexpr std::size_t kDenseCacheMaxPlayers = 20;

// Mean of f_b over the block of assignments that agree with `pinned` on
// `fixed` and range over every combination of the other features, visited in
// row-major order (last feature fastest).
double enumerate_mean(const Classifier& c, const FeatureSchema& schema,
                      const Assignment& pinned, Coalition fixed, Code b) {
  const std::size_t k = schema.num_features();
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < k; ++j) {
    if (!contains_player(fixed, j)) free.push_back(j);
  }
  Assignment a = pinned;
  for (const auto j : free) a[j] = 0;
  CompensatedSum sum;
  std::uint64_t count = 0;
  while (true) {
    sum.add(c.probability(a, b));
    ++count;
    std::size_t pos = free.size();
    while (pos > 0) {
      const std::size_t j = free[pos - 1];
      if (static_cast<std::size_t>(++a[j]) < schema.domain_size(j)) break;
      a[j] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  return sum.value() / static_cast<double>(count);
}

double sample_mean(const Classifier& c, const FeatureSchema& schema,
                   const Assignment& pinned, Coalition fixed, Code b,
                   std::uint64_t m, std::uint64_t seed) {
  const std::size_t k = schema.num_features();
  Rng rng(seed);
  Assignment a = pinned;
  CompensatedSum sum;
  for (std::uint64_t draw = 0; draw < m; ++draw) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!contains_player(fixed, j)) {
        a[j] = static_cast<Code>(uniform_below(rng, schema.domain_size(j)));
      }
    }
    sum.add(c.probability(a, b));
  }
  return sum.value() / static_cast<double>(m);
}

}  // namespace

std::vector<std::size_t> players_of(Coalition s) {
  std::vector<std::size_t> out;
  while (s != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
    s &= s - 1;
  }
  return out;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

TabularGame::TabularGame(std::size_t players, std::vector<double> values)
    : players_(players), values_(std::move(values)) {
  if (players >= 63 || values_.size() != (std::size_t{1} << players)) {
    throw ConfigError("tabular game needs exactly 2^n values");
  }
  if (values_[0] != 0.0) throw ConfigError("tabular game needs v(empty) = 0");
}

double GameRestriction::value(Coalition s) const {
  if ((s & ~scope) != 0) {
    throw ConfigError("coalition is not inside the restriction scope");
  }
  return game->value(s);
}

GameRestriction GameRestriction::narrowed(Coalition new_scope) const {
  if ((new_scope & ~scope) != 0) {
    throw ConfigError("narrowed scope must be a subset of the current scope");
  }
  return {game, new_scope};
}

// Baseline -------------------------------------------------------------------

Baseline::Baseline(const Classifier& classifier, const FeatureSchema& schema,
                   GameConfig config)
    : classifier_(classifier),
      schema_(schema),
      config_(config),
      once_(new std::once_flag[schema.num_classes()]),
      values_(schema.num_classes(), 0.0),
      sampled_(schema.num_classes(), 0) {}

void Baseline::compute(Code b) const {
  const Assignment origin(schema_.num_features(), 0);
  if (schema_.assignment_space_size() <= config_.baseline_exact_cap) {
    values_[b] = enumerate_mean(classifier_, schema_, origin, 0, b);
    return;
  }
  if (!config_.allow_sampling) {
    throw CapacityError(
        "assignment space of " +
        std::to_string(schema_.assignment_space_size()) +
        " exceeds the exact baseline cap of " +
        std::to_string(config_.baseline_exact_cap) +
        "; enable sampling mode to estimate it");
  }
  values_[b] = sample_mean(classifier_, schema_, origin, 0, b, config_.samples,
                           derive_seed(config_.seed, {0xba5e, Coalition{0},
                                                      std::uint64_t(b)}));
  sampled_[b] = 1;
}

double Baseline::value(Code b) const {
  std::call_once(once_[b], [&] { compute(b); });
  return values_[b];
}

bool Baseline::sampled(Code b) const {
  value(b);
  return sampled_[b] != 0;
}

// CoalitionGame ----------------------------------------------------------------

CoalitionGame::CoalitionGame(const Classifier& classifier,
                             const FeatureSchema& schema,
                             std::span<const Code> instance, Code target_class,
                             const Baseline& baseline, GameConfig config)
    : classifier_(classifier),
      schema_(schema),
      instance_(instance.begin(), instance.end()),
      target_class_(target_class),
      config_(config),
      baseline_value_(baseline.value(target_class)),
      instance_key_(schema.flat_index(instance)),
      used_sampling_(baseline.sampled(target_class)) {
  if (!schema.contains(instance)) {
    throw ConfigError("game instance is not a full assignment of the schema");
  }
  const std::size_t k = schema.num_features();
  if (k <= kDenseCacheMaxPlayers) {
    dense_cache_.assign(std::size_t{1} << k, 0.0);
    dense_known_.assign(std::size_t{1} << k, 0);
  }
}

std::uint64_t CoalitionGame::free_space_size(Coalition s) const {
  std::uint64_t size = 1;
  for (std::size_t j = 0; j < schema_.num_features(); ++j) {
    if (!contains_player(s, j)) size *= schema_.domain_size(j);
  }
  return size;
}

double CoalitionGame::exact_mean(Coalition s) const {
  return enumerate_mean(classifier_, schema_, instance_, s, target_class_);
}

double CoalitionGame::coalition_value(Coalition s) const {
  const Coalition all = full_coalition(schema_.num_features());
  if ((s & ~all) != 0) throw ConfigError("coalition outside the feature set");
  // Both terms are the same uniform average over A.
  if (s == 0) return 0.0;
  if (free_space_size(s) <= config_.exact_budget) {
    return exact_mean(s) - baseline_value_;
  }
  if (!config_.allow_sampling) {
    throw CapacityError("marginalizing " + std::to_string(free_space_size(s)) +
                        " assignments exceeds the exact budget of " +
                        std::to_string(config_.exact_budget) +
                        " and sampling is disabled");
  }
  used_sampling_ = true;
  return coalition_value_sampled(
      s, config_.samples,
      derive_seed(config_.seed,
                  {instance_key_, s, std::uint64_t(target_class_)}));
}

double CoalitionGame::coalition_value_sampled(Coalition s, std::uint64_t m,
                                              std::uint64_t seed) const {
  if (m == 0) throw ConfigError("sample count must be >= 1");
  if (s == full_coalition(schema_.num_features())) {
    return classifier_.probability(instance_, target_class_) - baseline_value_;
  }
  return sample_mean(classifier_, schema_, instance_, s, target_class_, m,
                     seed) -
         baseline_value_;
}

double CoalitionGame::value(Coalition s) {
  if (!dense_cache_.empty()) {
    if (s >= dense_cache_.size()) {
      throw ConfigError("coalition outside the feature set");
    }
    if (!dense_known_[s]) {
      dense_cache_[s] = coalition_value(s);
      dense_known_[s] = 1;
    }
    return dense_cache_[s];
  }
  const auto it = sparse_cache_.find(s);
  if (it != sparse_cache_.end()) return it->second;
  const double v = coalition_value(s);
  sparse_cache_.emplace(s, v);
  return v;
}

void CoalitionGame::clear_cache() {
  std::fill(dense_known_.begin(), dense_known_.end(), 0);
  sparse_cache_.clear();
}

}  // namespace catinf
