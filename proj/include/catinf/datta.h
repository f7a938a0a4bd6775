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
#include <vector>

#include "catinf/classifier.h"
#include "catinf/dataset.h"

namespace catinf {

enum class DattaNormalization {
  // Divide the flip count by the number of distinct observed vectors.
  kPerDistinctVector,
  // Report raw flip counts (divisor 1).
  kRaw,
};

// Classification-flip influence: for every distinct observed vector a' and
// every substitute value a_j such that (a'_{-j}, a_j) is also observed,
// count a flip when the argmax class changes.
struct DattaResult {
  std::vector<std::uint64_t> raw_counts;
  std::vector<double> values;
  double divisor = 1.0;
  std::size_t observed_set_size = 0;
};

DattaResult datta_influence(
    const Dataset& ds, const Classifier& classifier,
    DattaNormalization normalization = DattaNormalization::kPerDistinctVector,
    std::size_t workers = 1);

}  // namespace catinf
