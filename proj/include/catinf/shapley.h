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
#include <vector>

#include "catinf/game.h"

namespace catinf {

inline constexpr std::size_t kMaxShapleyPlayers = 20;
inline constexpr std::size_t kMaxOraclePlayers = 8;

// Phi(v|_T): one value per player of the scope, players in ascending order.
struct ShapleyVector {
  Coalition scope = 0;
  std::vector<std::size_t> players;
  std::vector<double> values;

  // Throws ConfigError if `player` is not in scope.
  double at(std::size_t player) const;
  double sum() const;
};

// Coefficients |S|! (t - |S| - 1)! / t! indexed by |S|, for t players. Each is
// 1 / (t * C(t-1, |S|)) with the integer denominator formed exactly.
std::vector<double> shapley_weights(std::size_t players);

// Subset-sum Shapley value. Reads each of the 2^|T| coalition values once.
// Throws CapacityError if |T| exceeds max_players.
ShapleyVector shapley(const GameRestriction& g,
                      std::size_t max_players = kMaxShapleyPlayers);

// Average marginal contribution over all |T|! player orderings. Independent
// of the subset-sum route; |T| <= 8.
ShapleyVector shapley_oracle(const GameRestriction& g);

// [Phi_l(v|_T) - Phi_l(v|_{T\m})] - [Phi_m(v|_T) - Phi_m(v|_{T\l})], which is
// zero for the Shapley value.
double balanced_contribution_gap(const GameRestriction& g, std::size_t l,
                                 std::size_t m);

}  // namespace catinf
