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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "catinf/classifier.h"
#include "catinf/game.h"

namespace catinf::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDataError = 3,
  kCapacityError = 4,
  kEmptySubsample = 5,
};

enum class Command { kInfluence, kScan, kDrop, kDatta, kSimulate };

enum class Mode { kAuto, kExact, kSampled };

struct RunConfig {
  Command command = Command::kScan;

  std::filesystem::path schema_path;
  std::filesystem::path data_path;
  std::filesystem::path out_dir = ".";
  std::vector<std::string> formats = {"csv", "json"};
  bool plot = false;

  std::string classifier = "forest";
  double alpha = 1.0;
  ForestParams forest;
  std::uint64_t seed = 0;

  // Query fields as label strings, resolved against the schema.
  std::vector<std::string> fix;
  std::string response_label = "1";
  std::string scope = "all";
  std::string drop_feature;
  double threshold = 0.1;
  bool raw_datta = false;

  std::uint64_t assignment_cap = FeatureSchema::kDefaultAssignmentCap;
  bool observed_domains = false;
  Mode mode = Mode::kAuto;
  std::uint64_t exact_budget = std::uint64_t{1} << 16;
  std::uint64_t samples = std::uint64_t{1} << 14;
  std::size_t workers = 1;

  std::string sim_kind = "sim1";
  std::size_t sim_n = 1000;
};

// Parses argv-style arguments (without the program name). Throws ConfigError
// on invalid or contradictory flags. Returns false in `proceed` when help was
// printed instead.
RunConfig parse_arguments(const std::vector<std::string>& args,
                          std::ostream& out, bool& proceed);

// Executes a parsed configuration and returns the process exit status.
// Errors are reported on `err`; a short summary goes to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_arguments + run with error-to-exit-code mapping.
int main_entry(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

}  // namespace catinf::cli
