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

#include "catinf/influence.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "catinf/errors.h"
#include "catinf/parallel.h"

namespace catinf {

double InfluenceResult::at(std::size_t feature) const {
  const auto it = std::lower_bound(players.begin(), players.end(), feature);
  if (it == players.end() || *it != feature) {
    throw ConfigError("feature " + std::to_string(feature) +
                      " is not in the query scope");
  }
  return per_feature[static_cast<std::size_t>(it - players.begin())];
}

double InfluenceResult::shapley_sum() const {
  CompensatedSum s;
  for (const double v : per_feature) s.add(v);
  return s.value();
}

InfluenceAnalyzer::InfluenceAnalyzer(const Dataset& ds,
                                     const Classifier& classifier,
                                     InfluenceConfig config)
    : ds_(ds), config_(config), classifier_(&classifier) {
  if (classifier.num_classes() != ds.schema().num_classes()) {
    throw ConfigError("classifier and dataset disagree on the class count");
  }
  if (config_.workers == 0) config_.workers = 1;
  if (ds.schema().assignment_space_size() <= config_.tabulate_cap) {
    table_ = std::make_unique<TabulatedClassifier>(classifier, ds.schema(),
                                                   config_.workers);
    classifier_ = table_.get();
  }
  baseline_ =
      std::make_unique<Baseline>(*classifier_, ds_.schema(), config_.game);
}

CoalitionGame InfluenceAnalyzer::make_game(std::span<const Code> instance,
                                           Code b) const {
  return CoalitionGame(*classifier_, ds_.schema(), instance, b, *baseline_,
                       config_.game);
}

void InfluenceAnalyzer::check_query(const InfluenceQuery& q) const {
  const auto& schema = ds_.schema();
  if (q.scope == 0) throw ConfigError("influence scope T must be nonempty");
  if ((q.scope & ~full_coalition(schema.num_features())) != 0) {
    throw ConfigError("influence scope names features outside the schema");
  }
  if (q.response < 0 ||
      static_cast<std::size_t>(q.response) >= schema.num_classes()) {
    throw ConfigError("response class out of range");
  }
}

Subsample InfluenceAnalyzer::select(const InfluenceQuery& q) const {
  check_query(q);
  const auto fixed = normalize(ds_.schema(), q.fixed);
  Subsample sub = subsample(ds_, fixed, q.response);
  if (sub.empty()) {
    const auto& schema = ds_.schema();
    throw EmptySubsampleError(
        "no training rows with " + describe(schema, fixed) + " and " +
        schema.response().name + "=" +
        schema.response().domain[q.response] +
        "; the query cannot be answered from this sample");
  }
  return sub;
}

InfluenceAnalyzer::Attribution InfluenceAnalyzer::attribute(
    std::span<const Code> instance, Code b, Coalition scope) const {
  CoalitionGame game = make_game(instance, b);
  const ShapleyVector phi =
      shapley(GameRestriction{&game, scope}, config_.max_players);
  Attribution out;
  out.phi = phi.values;
  out.direct_total = game.coalition_value(scope);
  out.sampled = game.used_sampling();
  return out;
}

void InfluenceAnalyzer::prepare(const std::vector<std::size_t>& distinct,
                                Code b, Coalition scope) {
  std::vector<std::size_t> missing;
  for (const auto d : distinct) {
    if (!cache_.contains({d, b, scope})) missing.push_back(d);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<Attribution> results(missing.size());
  parallel_for(missing.size(), config_.workers, [&](std::size_t i) {
    results[i] = attribute(ds_.distinct_vector(missing[i]), b, scope);
  });
  for (std::size_t i = 0; i < missing.size(); ++i) {
    cache_.emplace(Key{missing[i], b, scope}, std::move(results[i]));
  }
}

InfluenceResult InfluenceAnalyzer::assemble(const InfluenceQuery& q,
                                            const Subsample& sub) {
  const auto players = players_of(q.scope);
  const std::size_t n = sub.size();

  // Per-member attributions, either shared through the distinct-vector cache
  // or computed afresh for every row.
  std::vector<const Attribution*> per_member(n);
  std::vector<Attribution> fresh;
  if (config_.deduplicate) {
    std::vector<std::size_t> distinct;
    distinct.reserve(sub.weight_per_distinct.size());
    for (const auto& [d, count] : sub.weight_per_distinct) {
      distinct.push_back(d);
    }
    prepare(distinct, q.response, q.scope);
    for (std::size_t i = 0; i < n; ++i) {
      per_member[i] = &cache_.at(
          {ds_.distinct_id(sub.member_indices[i]), q.response, q.scope});
    }
  } else {
    fresh.resize(n);
    parallel_for(n, config_.workers, [&](std::size_t i) {
      fresh[i] = attribute(ds_.row(sub.member_indices[i]), q.response, q.scope);
    });
    for (std::size_t i = 0; i < n; ++i) per_member[i] = &fresh[i];
  }

  // Ordered reduction over members so the result does not depend on the
  // worker count or on deduplication.
  std::vector<CompensatedSum> acc(players.size());
  CompensatedSum total;
  bool sampled = false;
  for (const Attribution* a : per_member) {
    for (std::size_t l = 0; l < players.size(); ++l) acc[l].add(a->phi[l]);
    total.add(a->direct_total);
    sampled = sampled || a->sampled;
  }

  InfluenceResult result;
  result.query = q;
  result.query.fixed = sub.fixed;
  result.players = players;
  result.per_feature.resize(players.size());
  const double count = static_cast<double>(n);
  for (std::size_t l = 0; l < players.size(); ++l) {
    result.per_feature[l] = acc[l].value() / count;
  }
  result.total = total.value() / count;
  result.n_sub = n;
  result.mode = sampled || baseline_->sampled(q.response) ? EvalMode::kSampled
                                                          : EvalMode::kExact;

  const double gap = std::abs(result.total - result.shapley_sum());
  if (!(gap <= config_.efficiency_tolerance)) {
    throw Error("efficiency cross-check failed: total influence " +
                std::to_string(result.total) + " vs Shapley sum " +
                std::to_string(result.shapley_sum()));
  }
  return result;
}

InfluenceResult InfluenceAnalyzer::influence(const InfluenceQuery& q) {
  return assemble(q, select(q));
}

double InfluenceAnalyzer::total_influence(const InfluenceQuery& q) {
  const Subsample sub = select(q);
  std::vector<double> per_distinct(sub.weight_per_distinct.size());
  parallel_for(per_distinct.size(), config_.workers, [&](std::size_t i) {
    const CoalitionGame game =
        make_game(ds_.distinct_vector(sub.weight_per_distinct[i].first),
                  q.response);
    per_distinct[i] = game.coalition_value(q.scope);
  });
  std::vector<double> by_distinct(ds_.num_distinct(), 0.0);
  for (std::size_t i = 0; i < per_distinct.size(); ++i) {
    by_distinct[sub.weight_per_distinct[i].first] = per_distinct[i];
  }
  CompensatedSum total;
  for (const auto row : sub.member_indices) {
    total.add(by_distinct[ds_.distinct_id(row)]);
  }
  return total.value() / static_cast<double>(sub.size());
}

std::vector<ScenarioReport> InfluenceAnalyzer::scenario_scan(Code b,
                                                             Coalition scope,
                                                             double threshold) {
  if (!(threshold >= 0.0)) throw ConfigError("scenario threshold must be >= 0");
  check_query({{}, b, scope});
  const auto& schema = ds_.schema();
  const auto features = players_of(scope);

  // Select every cell first so all needed games are computed in one
  // parallel pass.
  std::vector<std::vector<Subsample>> cells(features.size());
  std::vector<std::size_t> distinct;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const std::size_t j = features[f];
    for (std::size_t v = 0; v < schema.domain_size(j); ++v) {
      cells[f].push_back(
          subsample(ds_, {{j, static_cast<Code>(v)}}, b));
      for (const auto& [d, count] : cells[f].back().weight_per_distinct) {
        distinct.push_back(d);
      }
    }
  }
  if (config_.deduplicate) prepare(distinct, b, scope);

  std::vector<ScenarioReport> reports;
  for (std::size_t f = 0; f < features.size(); ++f) {
    ScenarioReport report;
    report.feature = features[f];
    report.response = b;
    report.scope = scope;
    report.threshold = threshold;
    for (std::size_t v = 0; v < cells[f].size(); ++v) {
      ScenarioRow row;
      row.value = static_cast<Code>(v);
      const Subsample& sub = cells[f][v];
      if (!sub.empty()) {
        InfluenceQuery q{sub.fixed, b, scope};
        row.result = assemble(q, sub);
        row.flagged = std::abs(row.result->total) >= threshold;
        if (row.flagged) report.flagged.push_back(row.value);
      }
      report.rows.push_back(std::move(row));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<ScenarioReport> InfluenceAnalyzer::feature_drop_analysis(
    Code b, std::size_t drop, double threshold) {
  const std::size_t k = ds_.schema().num_features();
  if (k < 2) throw ConfigError("dropping a feature needs at least 2 features");
  if (drop >= k) throw ConfigError("dropped feature index out of range");
  return scenario_scan(b, without_player(full_coalition(k), drop), threshold);
}

InfluenceResult influence(const Dataset& ds, const Classifier& c,
                          const InfluenceQuery& q, InfluenceConfig config) {
  InfluenceAnalyzer analyzer(ds, c, config);
  return analyzer.influence(q);
}

double total_influence(const Dataset& ds, const Classifier& c,
                       const InfluenceQuery& q, InfluenceConfig config) {
  InfluenceAnalyzer analyzer(ds, c, config);
  return analyzer.total_influence(q);
}

}  // namespace catinf
