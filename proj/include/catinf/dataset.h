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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace catinf {

// Categorical values are carried as indices into their schema domain. Labels
// only appear at I/O boundaries.
using Code = std::int32_t;
using Assignment = std::vector<Code>;

struct FeatureSpec {
  std::string name;
  std::vector<std::string> domain;
};

// Names and finite domains of the k features and of the response. Domain
// order is the file order and acts as the tie-break order everywhere.
class FeatureSchema {
 public:
  static constexpr std::uint64_t kDefaultAssignmentCap = std::uint64_t{1} << 24;

  // Throws DataError on invalid domains, CapacityError if the assignment
  // space exceeds `assignment_cap`.
  FeatureSchema(std::vector<FeatureSpec> features, FeatureSpec response,
                std::uint64_t assignment_cap = kDefaultAssignmentCap);

  std::size_t num_features() const { return features_.size(); }
  const FeatureSpec& feature(std::size_t j) const { return features_[j]; }
  const std::string& feature_name(std::size_t j) const {
    return features_[j].name;
  }
  std::size_t domain_size(std::size_t j) const {
    return features_[j].domain.size();
  }
  const FeatureSpec& response() const { return response_; }
  std::size_t num_classes() const { return response_.domain.size(); }

  // |A| = prod_j |A_j|.
  std::uint64_t assignment_space_size() const { return space_size_; }
  std::uint64_t assignment_cap() const { return cap_; }

  std::optional<std::size_t> find_feature(std::string_view name) const;
  std::optional<Code> find_value(std::size_t j, std::string_view label) const;
  std::optional<Code> find_class(std::string_view label) const;

  // Row-major position of a full assignment, last feature varying fastest.
  std::uint64_t flat_index(std::span<const Code> a) const;
  Assignment unflatten(std::uint64_t index) const;
  bool contains(std::span<const Code> a) const;

  bool operator==(const FeatureSchema& other) const;

 private:
  std::vector<FeatureSpec> features_;
  FeatureSpec response_;
  std::uint64_t cap_;
  std::uint64_t space_size_ = 1;
  std::vector<std::uint64_t> strides_;
};

FeatureSchema parse_schema(std::string_view json_text,
                           std::uint64_t assignment_cap =
                               FeatureSchema::kDefaultAssignmentCap);
FeatureSchema load_schema(const std::filesystem::path& path,
                          std::uint64_t assignment_cap =
                              FeatureSchema::kDefaultAssignmentCap);
std::string schema_to_json(const FeatureSchema& schema);

// Training sample M = {(X^i, Y^i)}. Immutable once constructed.
class Dataset {
 public:
  // Throws DataError if any value is out of its domain or the sample is empty.
  Dataset(FeatureSchema schema, std::vector<Assignment> rows,
          std::vector<Code> responses);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return responses_.size(); }
  std::span<const Code> row(std::size_t i) const {
    return {cells_.data() + i * k_, k_};
  }
  Code response(std::size_t i) const { return responses_[i]; }

  // Distinct feature vectors in first-appearance order.
  std::size_t num_distinct() const { return distinct_rows_.size(); }
  std::span<const Code> distinct_vector(std::size_t d) const {
    return row(distinct_rows_[d]);
  }
  std::size_t distinct_id(std::size_t i) const { return distinct_of_row_[i]; }
  std::optional<std::size_t> find_distinct(std::span<const Code> a) const;

 private:
  FeatureSchema schema_;
  std::size_t k_;
  std::vector<Code> cells_;
  std::vector<Code> responses_;
  std::vector<std::size_t> distinct_rows_;
  std::vector<std::size_t> distinct_of_row_;
  std::vector<std::pair<std::uint64_t, std::size_t>> distinct_lookup_;
};

Dataset parse_dataset(const FeatureSchema& schema, std::istream& in,
                      std::string_view source = "<stream>");
Dataset load_dataset(const FeatureSchema& schema,
                     const std::filesystem::path& path);
void write_dataset_csv(const Dataset& ds, std::ostream& out);

// Re-encodes `ds` so that every feature domain is the set of values that
// actually occur, in declared order. Throws DataError if some feature takes a
// single value.
Dataset restrict_to_observed_domains(const Dataset& ds);

// a_R: values pinned on the features of R, sorted by feature index.
struct FixedValue {
  std::size_t feature;
  Code value;
  bool operator==(const FixedValue&) const = default;
};
using PartialAssignment = std::vector<FixedValue>;

// Sorts by feature and validates against the schema. Throws ConfigError on
// out-of-range or repeated features.
PartialAssignment normalize(const FeatureSchema& schema, PartialAssignment a);
bool matches(std::span<const Code> row, const PartialAssignment& a);

// M^b_{a_R}: rows with X_R = a_R and Y = b.
struct Subsample {
  const Dataset* parent = nullptr;
  PartialAssignment fixed;
  Code response = 0;
  std::vector<std::size_t> member_indices;
  // (distinct id, multiplicity) in first-appearance order among members.
  std::vector<std::pair<std::size_t, std::size_t>> weight_per_distinct;

  std::size_t size() const { return member_indices.size(); }
  bool empty() const { return member_indices.empty(); }
};

Subsample subsample(const Dataset& ds, const PartialAssignment& fixed,
                    Code response);

// "X1=1, X3=0" style rendering of a partial assignment.
std::string describe(const FeatureSchema& schema, const PartialAssignment& a);

}  // namespace catinf
