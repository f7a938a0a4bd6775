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

#include "catinf/shapley.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "catinf/errors.h"

namespace catinf {

double ShapleyVector::at(std::size_t player) const {
  const auto it = std::lower_bound(players.begin(), players.end(), player);
  if (it == players.end() || *it != player) {
    throw ConfigError("player " + std::to_string(player) +
                      " is not in the Shapley scope");
  }
  return values[static_cast<std::size_t>(it - players.begin())];
}

double ShapleyVector::sum() const {
  CompensatedSum s;
  for (const double v : values) s.add(v);
  return s.value();
}

std::vector<double> shapley_weights(std::size_t players) {
  if (players == 0 || players > kMaxShapleyPlayers) {
    throw CapacityError("Shapley weights are tabulated for 1.." +
                        std::to_string(kMaxShapleyPlayers) + " players");
  }
  std::vector<double> w(players);
  // binom = C(players-1, s), exact in 64 bits for players <= 20.
  std::uint64_t binom = 1;
  for (std::size_t s = 0; s < players; ++s) {
    w[s] = 1.0 / static_cast<double>(players * binom);
    binom = binom * (players - 1 - s) / (s + 1);
  }
  return w;
}

ShapleyVector shapley(const GameRestriction& g, std::size_t max_players) {
  const auto players = players_of(g.scope);
  const std::size_t t = players.size();
  if (t == 0) throw ConfigError("Shapley scope must be nonempty");
  if (t > max_players) {
    throw CapacityError("Shapley scope has " + std::to_string(t) +
                        " players; the limit is " +
                        std::to_string(max_players));
  }
  const auto weights = shapley_weights(t);

  // Coalition values indexed by compact masks over the scope's members.
  const std::size_t subsets = std::size_t{1} << t;
  std::vector<double> v(subsets);
  for (std::size_t c = 0; c < subsets; ++c) {
    Coalition full = 0;
    for (std::size_t i = 0; i < t; ++i) {
      if ((c >> i) & 1u) full |= Coalition{1} << players[i];
    }
    v[c] = g.game->value(full);
  }

  ShapleyVector out{g.scope, players, std::vector<double>(t, 0.0)};
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    CompensatedSum phi;
    for (std::size_t c = 0; c < subsets; ++c) {
      if (c & bit) continue;
      phi.add(weights[static_cast<std::size_t>(std::popcount(c))] *
              (v[c | bit] - v[c]));
    }
    out.values[i] = phi.value();
  }
  return out;
}

ShapleyVector shapley_oracle(const GameRestriction& g) {
  auto order = players_of(g.scope);
  const std::size_t t = order.size();
  if (t == 0) throw ConfigError("Shapley scope must be nonempty");
  if (t > kMaxOraclePlayers) {
    throw CapacityError("permutation oracle supports at most " +
                        std::to_string(kMaxOraclePlayers) + " players");
  }
  ShapleyVector out{g.scope, order, std::vector<double>(t, 0.0)};
  std::vector<CompensatedSum> acc(t);
  std::uint64_t orderings = 0;
  do {
    Coalition s = 0;
    double before = 0.0;
    for (const std::size_t player : order) {
      s |= Coalition{1} << player;
      const double after = g.game->value(s);
      const auto slot = static_cast<std::size_t>(
          std::lower_bound(out.players.begin(), out.players.end(), player) -
          out.players.begin());
      acc[slot].add(after - before);
      before = after;
    }
    ++orderings;
  } while (std::next_permutation(order.begin(), order.end()));
  for (std::size_t i = 0; i < t; ++i) {
    out.values[i] = acc[i].value() / static_cast<double>(orderings);
  }
  return out;
}

double balanced_contribution_gap(const GameRestriction& g, std::size_t l,
                                 std::size_t m) {
  if (l == m || !contains_player(g.scope, l) ||
      !contains_player(g.scope, m)) {
    throw ConfigError("balanced contributions needs two distinct players in "
                      "scope");
  }
  const ShapleyVector full = shapley(g);
  const ShapleyVector without_m = shapley(g.narrowed(without_player(g.scope, m)));
  const ShapleyVector without_l = shapley(g.narrowed(without_player(g.scope, l)));
  return (full.at(l) - without_m.at(l)) - (full.at(m) - without_l.at(m));
}

}  // namespace catinf
