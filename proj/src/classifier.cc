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

#include "catinf/classifier.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "catinf/errors.h"
#include "catinf/parallel.h"
#include "catinf/random.h"

namespace catinf {

void Classifier::predict(std::span<const Code> a, std::span<double> out) const {
  raw_predict(a, out);
  double total = 0.0;
  for (double& p : out) {
    if (!(p > 0.0)) p = 0.0;
    total += p;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error("classifier returned no probability mass");
  }
  // Rounding-level deviations are left alone so that predict is idempotent.
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& p : out) p /= total;
  }
}

std::vector<double> Classifier::predict_proba(std::span<const Code> a) const {
  std::vector<double> out(num_classes());
  predict(a, out);
  return out;
}

double Classifier::probability(std::span<const Code> a, Code b) const {
  // Class counts are small; avoid a heap allocation per query.
  constexpr std::size_t kInline = 16;
  const std::size_t nc = num_classes();
  if (nc <= kInline) {
    double buf[kInline];
    predict(a, std::span<double>(buf, nc));
    return buf[b];
  }
  return predict_proba(a)[b];
}

Code argmax_class(std::span<const double> probs) {
  Code best = 0;
  for (std::size_t b = 1; b < probs.size(); ++b) {
    if (probs[b] > probs[best]) best = static_cast<Code>(b);
  }
  return best;
}

// Frequency table ------------------------------------------------------------

FrequencyTableClassifier::FrequencyTableClassifier(const Dataset& ds,
                                                   double alpha)
    : schema_(ds.schema()),
      num_classes_(ds.schema().num_classes()),
      alpha_(alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("smoothing alpha must be >= 0");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto& counts = counts_[schema_.flat_index(ds.row(i))];
    if (counts.empty()) counts.assign(num_classes_, 0);
    ++counts[ds.response(i)];
  }
}

void FrequencyTableClassifier::raw_predict(std::span<const Code> a,
                                           std::span<double> out) const {
  const auto it = counts_.find(schema_.flat_index(a));
  if (it == counts_.end()) {
    if (alpha_ == 0.0) {
      std::string where;
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (j > 0) where += ", ";
        where += schema_.feature_name(j) + "=" + schema_.feature(j).domain[a[j]];
      }
      throw UnseenAssignmentError(
          "assignment (" + where +
          ") never occurs in the training data and smoothing is 0");
    }
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(num_classes_));
    return;
  }
  const auto& counts = it->second;
  const double total = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  const double denom = total + alpha_ * static_cast<double>(num_classes_);
  for (std::size_t b = 0; b < num_classes_; ++b) {
    out[b] = (static_cast<double>(counts[b]) + alpha_) / denom;
  }
}

// Random forest ----------------------------------------------------------------

class RandomForest::TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const ForestParams& params, Rng& rng)
      : ds_(ds),
        schema_(ds.schema()),
        params_(params),
        rng_(rng),
        num_classes_(ds.schema().num_classes()),
        features_per_split_(params.features_per_split),
        order_(ds.schema().num_features()) {
    const std::size_t k = schema_.num_features();
    if (features_per_split_ == 0) {
      features_per_split_ = static_cast<std::size_t>(
          std::ceil(std::sqrt(static_cast<double>(k))));
    }
    features_per_split_ = std::min(features_per_split_, k);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  Tree build() {
    const std::size_t n = ds_.size();
    tree_.in_bag_counts.assign(n, 0);
    std::vector<std::uint32_t> sample(n);
    for (auto& s : sample) {
      s = static_cast<std::uint32_t>(uniform_below(rng_, n));
      ++tree_.in_bag_counts[s];
    }
    grow(sample, 0);
    return std::move(tree_);
  }

  // Constant-response training data: one unsmoothed leaf.
  static Tree degenerate(std::size_t n, std::size_t num_classes, Code label) {
    Tree tree;
    tree.nodes.push_back({-1, 0});
    tree.probs.assign(num_classes, 0.0);
    tree.probs[label] = 1.0;
    tree.in_bag_counts.assign(n, 1);
    return tree;
  }

 private:
  using Counts = std::vector<std::uint64_t>;

  Counts class_counts(const std::vector<std::uint32_t>& rows) const {
    Counts counts(num_classes_, 0);
    for (const auto r : rows) ++counts[ds_.response(r)];
    return counts;
  }

  static double gini(const Counts& counts, std::uint64_t total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (const auto c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      sum_sq += p * p;
    }
    return 1.0 - sum_sq;
  }

  std::uint32_t make_leaf(const Counts& counts, std::uint64_t total) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.push_back({-1, static_cast<std::uint32_t>(tree_.probs.size())});
    const double alpha = params_.leaf_alpha;
    const double denom =
        static_cast<double>(total) + alpha * static_cast<double>(num_classes_);
    for (std::size_t b = 0; b < num_classes_; ++b) {
      tree_.probs.push_back(
          denom > 0.0 ? (static_cast<double>(counts[b]) + alpha) / denom
                      : 1.0 / static_cast<double>(num_classes_));
    }
    return id;
  }

  // Weighted Gini impurity of the multiway split on feature j, or nullopt if
  // the split is invalid (fewer than two nonempty branches or a branch
  // smaller than min_leaf).
  std::optional<double> split_impurity(const std::vector<std::uint32_t>& rows,
                                       std::size_t j) const {
    const std::size_t values = schema_.domain_size(j);
    std::vector<Counts> branch(values, Counts(num_classes_, 0));
    std::vector<std::uint64_t> sizes(values, 0);
    for (const auto r : rows) {
      const auto v = static_cast<std::size_t>(ds_.row(r)[j]);
      ++branch[v][ds_.response(r)];
      ++sizes[v];
    }
    std::size_t nonempty = 0;
    double impurity = 0.0;
    for (std::size_t v = 0; v < values; ++v) {
      if (sizes[v] == 0) continue;
      if (sizes[v] < params_.min_leaf) return std::nullopt;
      ++nonempty;
      impurity += static_cast<double>(sizes[v]) * gini(branch[v], sizes[v]);
    }
    if (nonempty < 2) return std::nullopt;
    return impurity / static_cast<double>(rows.size());
  }

  std::uint32_t grow(const std::vector<std::uint32_t>& rows,
                     std::size_t depth) {
    const Counts counts = class_counts(rows);
    const std::uint64_t total = rows.size();
    const double parent = gini(counts, total);
    const bool depth_exhausted =
        params_.max_depth != 0 && depth >= params_.max_depth;
    if (parent <= 0.0 || depth_exhausted || total < 2 * params_.min_leaf) {
      return make_leaf(counts, total);
    }

    // Visit features in a fresh random order. The first features_per_split
    // are always evaluated; past that, keep going only until some feature
    // gives a positive gain.
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[uniform_below(rng_, i)]);
    }
    constexpr double kMinGain = 1e-12;
    std::optional<std::size_t> best_feature;
    double best_gain = 0.0;
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
      if (pos >= features_per_split_ && best_feature) break;
      const std::size_t j = order_[pos];
      const auto impurity = split_impurity(rows, j);
      if (!impurity) continue;
      const double gain = parent - *impurity;
      if (gain <= kMinGain) continue;
      if (!best_feature || gain > best_gain ||
          (gain == best_gain && j < *best_feature)) {
        best_feature = j;
        best_gain = gain;
      }
    }
    if (!best_feature) return make_leaf(counts, total);

    const std::size_t j = *best_feature;
    const std::size_t values = schema_.domain_size(j);
    std::vector<std::vector<std::uint32_t>> parts(values);
    for (const auto r : rows) parts[ds_.row(r)[j]].push_back(r);

    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    const auto child_base = static_cast<std::uint32_t>(tree_.children.size());
    tree_.nodes.push_back({static_cast<std::int32_t>(j), child_base});
    tree_.children.resize(tree_.children.size() + values);
    for (std::size_t v = 0; v < values; ++v) {
      // A value absent from this node inherits the parent's distribution.
      const std::uint32_t child = parts[v].empty()
                                      ? make_leaf(counts, total)
                                      : grow(parts[v], depth + 1);
      tree_.children[child_base + v] = child;
    }
    return id;
  }

  const Dataset& ds_;
  const FeatureSchema& schema_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t num_classes_;
  std::size_t features_per_split_;
  std::vector<std::size_t> order_;
  Tree tree_;
};

std::span<const double> RandomForest::Tree::leaf_for(
    std::span<const Code> a, std::size_t num_classes) const {
  std::uint32_t id = 0;
  while (nodes[id].feature >= 0) {
    const Node& node = nodes[id];
    id = children[node.offset + static_cast<std::uint32_t>(a[node.feature])];
  }
  return {probs.data() + nodes[id].offset, num_classes};
}

RandomForest RandomForest::train(const Dataset& ds, const ForestParams& params,
                                 std::uint64_t seed) {
  if (params.n_trees == 0) throw ConfigError("forest needs at least one tree");
  if (params.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
  if (!(params.leaf_alpha >= 0.0)) {
    throw ConfigError("leaf smoothing must be >= 0");
  }
  RandomForest forest;
  forest.num_classes_ = ds.schema().num_classes();
  bool constant = true;
  for (std::size_t i = 1; i < ds.size() && constant; ++i) {
    constant = ds.response(i) == ds.response(0);
  }
  if (constant) {
    forest.trees_.push_back(
        TreeBuilder::degenerate(ds.size(), forest.num_classes_, ds.response(0)));
    return forest;
  }
  forest.trees_.resize(params.n_trees);
  parallel_for(params.n_trees, params.workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, {t}));
    TreeBuilder builder(ds, params, rng);
    forest.trees_[t] = builder.build();
  });
  return forest;
}

std::size_t RandomForest::num_nodes() const {
  std::size_t total = 0;
  for (const auto& t : trees_) total += t.nodes.size();
  return total;
}

void RandomForest::raw_predict(std::span<const Code> a,
                               std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& tree : trees_) {
    const auto leaf = tree.leaf_for(a, num_classes_);
    for (std::size_t b = 0; b < num_classes_; ++b) out[b] += leaf[b];
  }
  const double n = static_cast<double>(trees_.size());
  for (double& p : out) p /= n;
}

double RandomForest::out_of_bag_accuracy(const Dataset& ds) const {
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::vector<double> sum(num_classes_);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    bool any = false;
    for (const auto& tree : trees_) {
      if (i >= tree.in_bag_counts.size()) {
        throw ConfigError("out-of-bag accuracy needs the training dataset");
      }
      if (tree.in_bag_counts[i] != 0) continue;
      any = true;
      const auto leaf = tree.leaf_for(ds.row(i), num_classes_);
      for (std::size_t b = 0; b < num_classes_; ++b) sum[b] += leaf[b];
    }
    if (!any) continue;
    ++evaluated;
    if (argmax_class(sum) == ds.response(i)) ++correct;
  }
  return evaluated == 0 ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(evaluated);
}

// Tabulation -------------------------------------------------------------------

TabulatedClassifier::TabulatedClassifier(const Classifier& inner,
                                         const FeatureSchema& schema,
                                         std::size_t workers)
    : schema_(schema), num_classes_(inner.num_classes()) {
  if (num_classes_ != schema.num_classes()) {
    throw ConfigError("classifier and schema disagree on the class count");
  }
  const std::uint64_t size = schema.assignment_space_size();
  table_.resize(size * num_classes_);
  // Chunked so that each task amortizes its unflatten.
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (size + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(size, begin + kChunk);
    Assignment a = schema.unflatten(begin);
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      inner.predict(a, std::span<double>(table_.data() + idx * num_classes_,
                                         num_classes_));
      // Row-major increment, last feature fastest.
      for (std::size_t j = a.size(); j-- > 0;) {
        if (static_cast<std::size_t>(++a[j]) < schema.domain_size(j)) break;
        a[j] = 0;
      }
    }
  });
}

void TabulatedClassifier::raw_predict(std::span<const Code> a,
                                      std::span<double> out) const {
  const std::uint64_t idx = schema_.flat_index(a);
  std::copy_n(table_.begin() + static_cast<std::ptrdiff_t>(idx * num_classes_),
              num_classes_, out.begin());
}

}  // namespace catinf
