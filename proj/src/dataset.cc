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

#include "catinf/dataset.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "catinf/csv.h"
#include "catinf/errors.h"

namespace catinf {
namespace {

void validate_domain(const FeatureSpec& spec, std::string_view what) {
  if (spec.name.empty()) {
    throw DataError(std::string(what) + " with empty name");
  }
  if (spec.domain.size() < 2) {
    throw DataError(std::string(what) + " '" + spec.name +
                    "': domain needs at least 2 labels, got " +
                    std::to_string(spec.domain.size()));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& label : spec.domain) {
    if (!seen.insert(label).second) {
      throw DataError(std::string(what) + " '" + spec.name +
                      "': duplicate label '" + label + "'");
    }
  }
}

std::optional<Code> find_label(const std::vector<std::string>& domain,
                               std::string_view label) {
  const auto it = std::find(domain.begin(), domain.end(), label);
  if (it == domain.end()) return std::nullopt;
  return static_cast<Code>(it - domain.begin());
}

FeatureSpec spec_from_json(const nlohmann::json& node, std::string_view what) {
  if (!node.is_object() || !node.contains("name") ||
      !node.contains("domain")) {
    throw DataError(std::string(what) + ": expected {name, domain}");
  }
  if (!node["name"].is_string() || !node["domain"].is_array()) {
    throw DataError(std::string(what) +
                    ": 'name' must be a string and 'domain' an array");
  }
  FeatureSpec spec;
  spec.name = node["name"].get<std::string>();
  for (const auto& label : node["domain"]) {
    if (!label.is_string()) {
      throw DataError(std::string(what) + " '" + spec.name +
                      "': domain labels must be strings");
    }
    spec.domain.push_back(label.get<std::string>());
  }
  return spec;
}

nlohmann::json spec_to_json(const FeatureSpec& spec) {
  return nlohmann::json{{"name", spec.name}, {"domain", spec.domain}};
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features,
                             FeatureSpec response, std::uint64_t assignment_cap)
    : features_(std::move(features)),
      response_(std::move(response)),
      cap_(assignment_cap) {
  if (features_.empty()) throw DataError("schema declares no features");
  if (features_.size() > 64) {
    throw CapacityError("schema declares " + std::to_string(features_.size()) +
                        " features; at most 64 are supported");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& f : features_) {
    validate_domain(f, "feature");
    if (!names.insert(f.name).second) {
      throw DataError("duplicate feature name '" + f.name + "'");
    }
  }
  validate_domain(response_, "response");
  if (names.contains(response_.name)) {
    throw DataError("response name '" + response_.name +
                    "' collides with a feature name");
  }

  strides_.assign(features_.size(), 1);
  for (std::size_t j = features_.size(); j-- > 0;) {
    strides_[j] = space_size_;
    const std::uint64_t size = features_[j].domain.size();
    if (space_size_ > cap_ / size) {
      throw CapacityError("feature assignment space exceeds the cap of " +
                          std::to_string(cap_) + " (at feature '" +
                          features_[j].name + "')");
    }
    space_size_ *= size;
  }
}

std::optional<std::size_t> FeatureSchema::find_feature(
    std::string_view name) const {
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].name == name) return j;
  }
  return std::nullopt;
}

std::optional<Code> FeatureSchema::find_value(std::size_t j,
                                              std::string_view label) const {
  return find_label(features_[j].domain, label);
}

std::optional<Code> FeatureSchema::find_class(std::string_view label) const {
  return find_label(response_.domain, label);
}

std::uint64_t FeatureSchema::flat_index(std::span<const Code> a) const {
  std::uint64_t index = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    index += strides_[j] * static_cast<std::uint64_t>(a[j]);
  }
  return index;
}

Assignment FeatureSchema::unflatten(std::uint64_t index) const {
  Assignment a(features_.size());
  for (std::size_t j = 0; j < features_.size(); ++j) {
    a[j] = static_cast<Code>(index / strides_[j]);
    index %= strides_[j];
  }
  return a;
}

bool FeatureSchema::contains(std::span<const Code> a) const {
  if (a.size() != features_.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] < 0 || static_cast<std::size_t>(a[j]) >= domain_size(j)) {
      return false;
    }
  }
  return true;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
  auto same = [](const FeatureSpec& x, const FeatureSpec& y) {
    return x.name == y.name && x.domain == y.domain;
  };
  return std::equal(features_.begin(), features_.end(),
                    other.features_.begin(), other.features_.end(), same) &&
         same(response_, other.response_);
}

FeatureSchema parse_schema(std::string_view json_text,
                           std::uint64_t assignment_cap) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("schema parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw DataError("schema: missing 'features' array");
  }
  if (!doc.contains("response")) throw DataError("schema: missing 'response'");
  std::vector<FeatureSpec> features;
  for (std::size_t j = 0; j < doc["features"].size(); ++j) {
    features.push_back(spec_from_json(doc["features"][j],
                                      "features[" + std::to_string(j) + "]"));
  }
  return FeatureSchema(std::move(features),
                       spec_from_json(doc["response"], "response"),
                       assignment_cap);
}

FeatureSchema load_schema(const std::filesystem::path& path,
                          std::uint64_t assignment_cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open schema file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_schema(buffer.str(), assignment_cap);
  } catch (const CapacityError& e) {
    throw CapacityError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string schema_to_json(const FeatureSchema& schema) {
  nlohmann::json doc;
  doc["features"] = nlohmann::json::array();
  for (std::size_t j = 0; j < schema.num_features(); ++j) {
    doc["features"].push_back(spec_to_json(schema.feature(j)));
  }
  doc["response"] = spec_to_json(schema.response());
  return doc.dump(2) + "\n";
}

Dataset::Dataset(FeatureSchema schema, std::vector<Assignment> rows,
                 std::vector<Code> responses)
    : schema_(std::move(schema)),
      k_(schema_.num_features()),
      responses_(std::move(responses)) {
  if (rows.size() != responses_.size()) {
    throw DataError("row and response counts differ");
  }
  if (rows.empty()) throw DataError("dataset has no rows");
  cells_.reserve(rows.size() * k_);
  std::unordered_map<std::uint64_t, std::size_t> seen;
  distinct_of_row_.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!schema_.contains(rows[i])) {
      throw DataError("row " + std::to_string(i) +
                      ": feature value outside its domain");
    }
    if (responses_[i] < 0 ||
        static_cast<std::size_t>(responses_[i]) >= schema_.num_classes()) {
      throw DataError("row " + std::to_string(i) +
                      ": response outside its domain");
    }
    cells_.insert(cells_.end(), rows[i].begin(), rows[i].end());
    const auto [it, inserted] =
        seen.try_emplace(schema_.flat_index(rows[i]), distinct_rows_.size());
    if (inserted) distinct_rows_.push_back(i);
    distinct_of_row_.push_back(it->second);
  }
  distinct_lookup_.assign(seen.begin(), seen.end());
  std::sort(distinct_lookup_.begin(), distinct_lookup_.end());
}

std::optional<std::size_t> Dataset::find_distinct(
    std::span<const Code> a) const {
  if (!schema_.contains(a)) return std::nullopt;
  const std::uint64_t key = schema_.flat_index(a);
  const auto it = std::lower_bound(
      distinct_lookup_.begin(), distinct_lookup_.end(), key,
      [](const auto& entry, std::uint64_t k) { return entry.first < k; });
  if (it == distinct_lookup_.end() || it->first != key) return std::nullopt;
  return it->second;
}

Dataset parse_dataset(const FeatureSchema& schema, std::istream& in,
                      std::string_view source) {
  const std::string where(source);
  std::vector<csv::Record> records;
  try {
    records = csv::read_records(in);
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
  if (records.empty()) throw DataError(where + ": empty file (no header)");

  const auto& header = records.front();
  const std::size_t k = schema.num_features();
  // column_of[j] for features, column_of[k] for the response.
  std::vector<std::size_t> column_of(k + 1, header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::optional<std::size_t> slot;
    if (header[c] == schema.response().name) {
      slot = k;
    } else {
      slot = schema.find_feature(header[c]);
    }
    if (!slot) {
      throw DataError(where + ": column '" + header[c] +
                      "' is not declared in the schema");
    }
    if (column_of[*slot] != header.size()) {
      throw DataError(where + ": column '" + header[c] + "' appears twice");
    }
    column_of[*slot] = c;
  }
  for (std::size_t j = 0; j <= k; ++j) {
    if (column_of[j] == header.size()) {
      throw DataError(where + ": missing column '" +
                      (j < k ? schema.feature_name(j) : schema.response().name) +
                      "'");
    }
  }
  if (records.size() == 1) throw DataError(where + ": empty file (header only)");

  std::vector<Assignment> rows;
  std::vector<Code> responses;
  rows.reserve(records.size() - 1);
  responses.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    // Data rows are reported 1-based with the header as line 1.
    const std::string line = std::to_string(r + 1);
    if (rec.size() != header.size()) {
      throw DataError(where + ": line " + line + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(rec.size()));
    }
    Assignment a(k);
    for (std::size_t j = 0; j < k; ++j) {
      const auto code = schema.find_value(j, rec[column_of[j]]);
      if (!code) {
        throw DataError(where + ": line " + line + ", column '" +
                        schema.feature_name(j) + "': unknown label '" +
                        rec[column_of[j]] + "'");
      }
      a[j] = *code;
    }
    const auto cls = schema.find_class(rec[column_of[k]]);
    if (!cls) {
      throw DataError(where + ": line " + line + ", column '" +
                      schema.response().name + "': unknown label '" +
                      rec[column_of[k]] + "'");
    }
    rows.push_back(std::move(a));
    responses.push_back(*cls);
  }
  return Dataset(schema, std::move(rows), std::move(responses));
}

Dataset load_dataset(const FeatureSchema& schema,
                     const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file " + path.string());
  return parse_dataset(schema, in, path.string());
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  const auto& schema = ds.schema();
  std::vector<std::string> fields;
  for (std::size_t j = 0; j < schema.num_features(); ++j) {
    fields.push_back(schema.feature_name(j));
  }
  fields.push_back(schema.response().name);
  csv::write_record(out, fields);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      fields[j] = schema.feature(j).domain[row[j]];
    }
    fields.back() = schema.response().domain[ds.response(i)];
    csv::write_record(out, fields);
  }
}

Dataset restrict_to_observed_domains(const Dataset& ds) {
  const auto& schema = ds.schema();
  const std::size_t k = schema.num_features();
  std::vector<std::vector<bool>> present(k);
  for (std::size_t j = 0; j < k; ++j) {
    present[j].assign(schema.domain_size(j), false);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.row(i);
    for (std::size_t j = 0; j < k; ++j) present[j][row[j]] = true;
  }
  std::vector<FeatureSpec> features;
  std::vector<std::vector<Code>> recode(k);
  for (std::size_t j = 0; j < k; ++j) {
    FeatureSpec spec{schema.feature_name(j), {}};
    recode[j].assign(schema.domain_size(j), -1);
    for (std::size_t v = 0; v < schema.domain_size(j); ++v) {
      if (!present[j][v]) continue;
      recode[j][v] = static_cast<Code>(spec.domain.size());
      spec.domain.push_back(schema.feature(j).domain[v]);
    }
    if (spec.domain.size() < 2) {
      throw DataError("feature '" + spec.name +
                      "' takes a single observed value; observed-domain mode "
                      "needs at least 2");
    }
    features.push_back(std::move(spec));
  }
  FeatureSchema reduced(std::move(features), schema.response(),
                        schema.assignment_cap());
  std::vector<Assignment> rows;
  std::vector<Code> responses;
  rows.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.row(i);
    Assignment a(k);
    for (std::size_t j = 0; j < k; ++j) a[j] = recode[j][row[j]];
    rows.push_back(std::move(a));
    responses.push_back(ds.response(i));
  }
  return Dataset(std::move(reduced), std::move(rows), std::move(responses));
}

PartialAssignment normalize(const FeatureSchema& schema, PartialAssignment a) {
  std::sort(a.begin(), a.end(), [](const FixedValue& x, const FixedValue& y) {
    return x.feature < y.feature;
  });
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].feature >= schema.num_features()) {
      throw ConfigError("fixed feature index " + std::to_string(a[i].feature) +
                        " out of range");
    }
    if (i > 0 && a[i].feature == a[i - 1].feature) {
      throw ConfigError("feature '" + schema.feature_name(a[i].feature) +
                        "' fixed twice");
    }
    if (a[i].value < 0 ||
        static_cast<std::size_t>(a[i].value) >=
            schema.domain_size(a[i].feature)) {
      throw ConfigError("value code out of domain for feature '" +
                        schema.feature_name(a[i].feature) + "'");
    }
  }
  return a;
}

bool matches(std::span<const Code> row, const PartialAssignment& a) {
  return std::all_of(a.begin(), a.end(), [&](const FixedValue& fv) {
    return row[fv.feature] == fv.value;
  });
}

Subsample subsample(const Dataset& ds, const PartialAssignment& fixed,
                    Code response) {
  Subsample sub;
  sub.parent = &ds;
  sub.fixed = fixed;
  sub.response = response;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.response(i) != response || !matches(ds.row(i), fixed)) continue;
    sub.member_indices.push_back(i);
    const std::size_t d = ds.distinct_id(i);
    const auto [it, inserted] =
        slot.try_emplace(d, sub.weight_per_distinct.size());
    if (inserted) sub.weight_per_distinct.emplace_back(d, 0);
    ++sub.weight_per_distinct[it->second].second;
  }
  return sub;
}

std::string describe(const FeatureSchema& schema, const PartialAssignment& a) {
  if (a.empty()) return "(all)";
  std::string out;
  for (const auto& fv : a) {
    if (!out.empty()) out += ", ";
    out += schema.feature_name(fv.feature) + "=" +
           schema.feature(fv.feature).domain[fv.value];
  }
  return out;
}

}  // namespace catinf
