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

#include "catinf/datta.h"

#include "catinf/errors.h"
#include "catinf/parallel.h"

namespace catinf {

DattaResult datta_influence(const Dataset& ds, const Classifier& classifier,
                            DattaNormalization normalization,
                            std::size_t workers) {
  const auto& schema = ds.schema();
  if (classifier.num_classes() != schema.num_classes()) {
    throw ConfigError("classifier and dataset disagree on the class count");
  }
  const std::size_t k = schema.num_features();
  const std::size_t distinct = ds.num_distinct();

  std::vector<Code> label(distinct);
  parallel_for(distinct, workers, [&](std::size_t d) {
    label[d] = argmax_class(classifier.predict_proba(ds.distinct_vector(d)));
  });

  DattaResult result;
  result.raw_counts.assign(k, 0);
  result.observed_set_size = distinct;
  parallel_for(k, workers, [&](std::size_t j) {
    std::uint64_t flips = 0;
    for (std::size_t d = 0; d < distinct; ++d) {
      const auto base = ds.distinct_vector(d);
      Assignment neighbour(base.begin(), base.end());
      for (std::size_t v = 0; v < schema.domain_size(j); ++v) {
        if (static_cast<Code>(v) == base[j]) continue;
        neighbour[j] = static_cast<Code>(v);
        const auto other = ds.find_distinct(neighbour);
        if (other && label[*other] != label[d]) ++flips;
      }
    }
    result.raw_counts[j] = flips;
  });

  result.divisor = normalization == DattaNormalization::kPerDistinctVector
                       ? static_cast<double>(distinct)
                       : 1.0;
  result.values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    result.values[j] = static_cast<double>(result.raw_counts[j]) / result.divisor;
  }
  return result;
}

}  // namespace catinf
