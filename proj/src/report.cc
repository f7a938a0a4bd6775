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

#include "catinf/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "catinf/csv.h"
#include "catinf/errors.h"

namespace catinf::report {
namespace {

const char* mode_name(EvalMode mode) {
  return mode == EvalMode::kExact ? "exact" : "sampled";
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", x);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
    s.erase(0, 1);
  }
  return s;
}

std::string scope_label(const FeatureSchema& schema, Coalition scope) {
  if (scope == full_coalition(schema.num_features())) return "all";
  std::string out;
  for (const auto j : players_of(scope)) {
    if (!out.empty()) out += ";";
    out += schema.feature_name(j);
  }
  return out;
}

void write_scan_csv(std::ostream& out, const FeatureSchema& schema,
                    std::span<const ScenarioReport> reports) {
  const std::vector<std::string> header = {"feature", "value", "influence",
                                           "total",   "n_sub", "flagged"};
  csv::write_record(out, header);
  for (const auto& report : reports) {
    const auto& spec = schema.feature(report.feature);
    for (const auto& row : report.rows) {
      std::vector<std::string> fields = {spec.name, spec.domain[row.value]};
      if (row.result) {
        fields.push_back(format_number(row.result->at(report.feature)));
        fields.push_back(format_number(row.result->total));
        fields.push_back(std::to_string(row.result->n_sub));
      } else {
        fields.insert(fields.end(), {"NA", "NA", "0"});
      }
      fields.push_back(row.flagged ? "true" : "false");
      csv::write_record(out, fields);
    }
  }
}

nlohmann::json result_to_json(const FeatureSchema& schema,
                              const InfluenceResult& result) {
  nlohmann::json j;
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& fv : result.query.fixed) {
    fixed[schema.feature_name(fv.feature)] =
        schema.feature(fv.feature).domain[fv.value];
  }
  j["fixed"] = fixed;
  j["class"] = schema.response().domain[result.query.response];
  j["scope"] = scope_label(schema, result.query.scope);
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t l = 0; l < result.players.size(); ++l) {
    per[schema.feature_name(result.players[l])] = result.per_feature[l];
  }
  j["influence"] = per;
  j["total"] = result.total;
  j["n_sub"] = result.n_sub;
  j["mode"] = mode_name(result.mode);
  return j;
}

nlohmann::json scan_to_json(const FeatureSchema& schema,
                            std::span<const ScenarioReport> reports) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& report : reports) {
    const auto& spec = schema.feature(report.feature);
    nlohmann::json axis;
    axis["feature"] = spec.name;
    axis["class"] = schema.response().domain[report.response];
    axis["scope"] = scope_label(schema, report.scope);
    axis["threshold"] = report.threshold;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
      nlohmann::json r;
      r["value"] = spec.domain[row.value];
      if (row.result) {
        r["influence"] = row.result->at(report.feature);
        r["total"] = row.result->total;
        r["n_sub"] = row.result->n_sub;
        r["mode"] = mode_name(row.result->mode);
        nlohmann::json per = nlohmann::json::object();
        for (std::size_t l = 0; l < row.result->players.size(); ++l) {
          per[schema.feature_name(row.result->players[l])] =
              row.result->per_feature[l];
        }
        r["breakdown"] = per;
      } else {
        r["influence"] = nullptr;
        r["total"] = nullptr;
        r["n_sub"] = 0;
      }
      r["flagged"] = row.flagged;
      rows.push_back(r);
    }
    axis["rows"] = rows;
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto v : report.flagged) flagged.push_back(spec.domain[v]);
    axis["flagged"] = flagged;
    axes.push_back(axis);
  }
  return nlohmann::json{{"axes", axes}};
}

void write_breakdown_csv(std::ostream& out, const FeatureSchema& schema,
                         Coalition scope,
                         std::span<const InfluenceResult> results) {
  const auto players = players_of(scope);
  std::vector<std::string> header = {"scenario"};
  for (const auto j : players) header.push_back(schema.feature_name(j));
  header.insert(header.end(), {"total", "n_sub"});
  csv::write_record(out, header);
  for (const auto& r : results) {
    if (r.players != players) {
      throw ConfigError("breakdown rows must share one feature scope");
    }
    std::vector<std::string> fields = {describe(schema, r.query.fixed)};
    for (const double v : r.per_feature) fields.push_back(format_number(v));
    fields.push_back(format_number(r.total));
    fields.push_back(std::to_string(r.n_sub));
    csv::write_record(out, fields);
  }
}

void write_plot_tsv(std::ostream& out, const FeatureSchema& schema,
                    const ScenarioReport& report) {
  const auto& spec = schema.feature(report.feature);
  out << spec.name << "\tinfluence\ttotal\n";
  for (const auto& row : report.rows) {
    out << spec.domain[row.value] << '\t';
    if (row.result) {
      out << format_number(row.result->at(report.feature)) << '\t'
          << format_number(row.result->total) << '\n';
    } else {
      out << "NA\tNA\n";
    }
  }
}

void write_datta_csv(std::ostream& out, const FeatureSchema& schema,
                     const DattaResult& result) {
  csv::write_record(out, std::vector<std::string>{"feature", "raw_count",
                                                  "value", "divisor"});
  for (std::size_t j = 0; j < result.values.size(); ++j) {
    csv::write_record(out, std::vector<std::string>{
                               schema.feature_name(j),
                               std::to_string(result.raw_counts[j]),
                               format_number(result.values[j]),
                               format_number(result.divisor)});
  }
}

nlohmann::json datta_to_json(const FeatureSchema& schema,
                             const DattaResult& result) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < result.values.size(); ++j) {
    features.push_back({{"feature", schema.feature_name(j)},
                        {"raw_count", result.raw_counts[j]},
                        {"value", result.values[j]}});
  }
  return {{"features", features},
          {"divisor", result.divisor},
          {"observed_set_size", result.observed_set_size}};
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move report into place at " + path.string());
  }
}

void validate_scan(std::span<const ScenarioReport> reports, double tolerance) {
  for (const auto& report : reports) {
    std::size_t flagged = 0;
    for (const auto& row : report.rows) {
      if (!row.result) {
        if (row.flagged) throw Error("absent scan row is flagged");
        continue;
      }
      if (row.result->n_sub == 0) throw Error("scan row with empty subsample");
      const double gap =
          std::abs(row.result->total - row.result->shapley_sum());
      if (!(gap <= tolerance)) {
        throw Error("scan row violates efficiency by " + std::to_string(gap));
      }
      if (row.flagged != (std::abs(row.result->total) >= report.threshold)) {
        throw Error("scan flag disagrees with its threshold");
      }
      if (row.flagged) ++flagged;
    }
    if (flagged != report.flagged.size()) {
      throw Error("scan flagged list disagrees with its rows");
    }
  }
}

}  // namespace catinf::report
