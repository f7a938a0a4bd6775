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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "catinf/datta.h"
#include "catinf/influence.h"

namespace catinf::report {

// Fixed 9-decimal rendering used by every text report; negative zero is
// printed as zero.
std::string format_number(double x);

// Table-1 layout: feature, value, influence, total, n_sub, flagged. Values
// with an empty subsample keep their row with NA in the numeric columns.
void write_scan_csv(std::ostream& out, const FeatureSchema& schema,
                    std::span<const ScenarioReport> reports);
nlohmann::json scan_to_json(const FeatureSchema& schema,
                            std::span<const ScenarioReport> reports);

// One row per scenario (the fixed a_R), one column per feature of T, then the
// total influence and subsample size. Every result must have scope `scope`.
void write_breakdown_csv(std::ostream& out, const FeatureSchema& schema,
                         Coalition scope,
                         std::span<const InfluenceResult> results);
nlohmann::json result_to_json(const FeatureSchema& schema,
                              const InfluenceResult& result);

// Plot data for one scan axis: value, influence, total (tab separated).
void write_plot_tsv(std::ostream& out, const FeatureSchema& schema,
                    const ScenarioReport& report);

void write_datta_csv(std::ostream& out, const FeatureSchema& schema,
                     const DattaResult& result);
nlohmann::json datta_to_json(const FeatureSchema& schema,
                             const DattaResult& result);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string scope_label(const FeatureSchema& schema, Coalition scope);

// Structural self-checks on a finished scan: efficiency on every row and
// flag consistency. Throws Error on the first violation.
void validate_scan(std::span<const ScenarioReport> reports, double tolerance);

}  // namespace catinf::report
