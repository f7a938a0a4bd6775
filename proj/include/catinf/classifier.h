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
#include <span>
#include <unordered_map>
#include <vector>

#include "catinf/dataset.h"

namespace catinf {

// f^M: maps a full feature assignment to a distribution over the classes.
// Implementations are immutable after training and safe to query from many
// threads at once.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t num_classes() const = 0;

  // Writes f^M(a) into `out` (size num_classes()), renormalized onto the
  // probability simplex.
  void predict(std::span<const Code> a, std::span<double> out) const;
  std::vector<double> predict_proba(std::span<const Code> a) const;
  // f^M_b(a).
  double probability(std::span<const Code> a, Code b) const;

 protected:
  // Unnormalized scores; must be nonnegative with a positive sum.
  virtual void raw_predict(std::span<const Code> a,
                           std::span<double> out) const = 0;
};

// argmax over classes with ties resolved to the lowest class index.
Code argmax_class(std::span<const double> probs);

// Smoothed empirical conditional frequencies:
//   f_b(a) = (count_b(a) + alpha) / (count(a) + alpha |B|).
// With alpha == 0, querying an assignment absent from the training data
// throws UnseenAssignmentError.
class FrequencyTableClassifier final : public Classifier {
 public:
  FrequencyTableClassifier(const Dataset& ds, double alpha);

  std::size_t num_classes() const override { return num_classes_; }
  double alpha() const { return alpha_; }

 protected:
  void raw_predict(std::span<const Code> a,
                   std::span<double> out) const override;

 private:
  FeatureSchema schema_;
  std::size_t num_classes_;
  double alpha_;
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> counts_;
};

struct ForestParams {
  std::size_t n_trees = 100;
  // 0 means unlimited.
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  // Features evaluated per split; 0 means ceil(sqrt(k)).
  std::size_t features_per_split = 0;
  // Laplace smoothing of leaf class frequencies.
  double leaf_alpha = 1.0;
  std::size_t workers = 1;
};

// Breiman-style random forest over categorical features: bootstrap
// resampling, random feature subsets, multiway Gini splits, and soft voting
// over Laplace-smoothed leaf distributions.
class RandomForest final : public Classifier {
 public:
  // Deterministic in (ds, params minus workers, seed).
  static RandomForest train(const Dataset& ds, const ForestParams& params,
                            std::uint64_t seed);

  std::size_t num_classes() const override { return num_classes_; }
  std::size_t num_trees() const { return trees_.size(); }
  std::size_t num_nodes() const;

  // Accuracy of argmax predictions on rows that were out of bag for at least
  // one tree, using only those trees. Requires the training dataset.
  double out_of_bag_accuracy(const Dataset& ds) const;

 protected:
  void raw_predict(std::span<const Code> a,
                   std::span<double> out) const override;

 private:
  struct Node {
    // -1 for leaves.
    std::int32_t feature = -1;
    // Leaves: offset into `probs`. Splits: offset into `children`.
    std::uint32_t offset = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> children;
    std::vector<double> probs;
    std::vector<std::uint32_t> in_bag_counts;

    std::span<const double> leaf_for(std::span<const Code> a,
                                     std::size_t num_classes) const;
  };
  class TreeBuilder;

  RandomForest() = default;

  std::size_t num_classes_ = 0;
  std::vector<Tree> trees_;
};

// Caches f^M over the whole assignment space A so that repeated queries are a
// table lookup. Built eagerly; the table holds |A| * |B| doubles.
class TabulatedClassifier final : public Classifier {
 public:
  TabulatedClassifier(const Classifier& inner, const FeatureSchema& schema,
                      std::size_t workers = 1);

  std::size_t num_classes() const override { return num_classes_; }
  double probability_at(std::uint64_t flat_index, Code b) const {
    return table_[flat_index * num_classes_ + static_cast<std::size_t>(b)];
  }

 protected:
  void raw_predict(std::span<const Code> a,
                   std::span<double> out) const override;

 private:
  FeatureSchema schema_;
  std::size_t num_classes_;
  std::vector<double> table_;
};

}  // namespace catinf
