/*
 * Copyright 2026 The sgretrieve Authors.
 *
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

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/relevance.hpp"

namespace sgr::eval {

/// How a (clipped) relevance becomes a gain. Linear is the default reading;
/// Exponential is the common 2^rel - 1 alternative.
enum class Gain { Linear, Exponential };

inline Gain parse_gain(std::string_view name) {
  if (name == "linear") return Gain::Linear;
  if (name == "exponential") return Gain::Exponential;
  fail(ErrorKind::Config, "unknown gain '" + std::string(name) + "'");
}

inline double gain_of(double relevance, Gain gain) {
  const double clipped = std::max(0.0, relevance);
  return gain == Gain::Linear ? clipped : std::exp2(clipped) - 1.0;
}

inline double discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

/// DCG of the first `cutoff` items (rank r discounted by log2(r + 1)) over
/// the DCG of the best possible ordering of `ideal_pool`. Zero when the pool
/// has no positive gain.
inline double ndcg(std::span<const double> ranked_relevances, std::span<const double> ideal_pool, std::size_t cutoff,
                   Gain gain = Gain::Linear) {
  require(cutoff > 0, ErrorKind::NonPositiveCutoff, "nDCG cutoff must be positive");
  double dcg = 0.0;
  const std::size_t depth = std::min(cutoff, ranked_relevances.size());
  for (std::size_t r = 0; r < depth; ++r) dcg += gain_of(ranked_relevances[r], gain) * discount(r + 1);

  std::vector<double> ideal(ideal_pool.size());
  std::transform(ideal_pool.begin(), ideal_pool.end(), ideal.begin(), [&](double x) { return gain_of(x, gain); });
  const std::size_t ideal_depth = std::min(cutoff, ideal.size());
  std::partial_sort(ideal.begin(), ideal.begin() + static_cast<std::ptrdiff_t>(ideal_depth), ideal.end(),
                    std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal_depth; ++r) idcg += ideal[r] * discount(r + 1);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

inline const std::vector<std::size_t>& default_cutoffs() {
  static const std::vector<std::size_t> cutoffs{5, 10, 20, 30, 40, 50};
  return cutoffs;
}

/// query id -> ranked candidate ids.
using Rankings = std::map<std::string, std::vector<std::string>>;

/// Mean nDCG per cutoff over all queries, with gains given by surrogate
/// relevance to the query. The ideal ordering is taken over `pool` (the
/// whole candidate corpus) minus the query.
inline std::vector<double> evaluate_retrieval(const Rankings& rankings, const RelevanceOracle& oracle,
                                              const std::vector<std::string>& pool,
                                              const std::vector<std::size_t>& cutoffs = default_cutoffs(),
                                              Gain gain = Gain::Linear) {
  require(!rankings.empty(), ErrorKind::EmptySet, "no rankings to evaluate");
  auto index = [&](const std::string& id) {
    if (!oracle.contains(id)) fail(ErrorKind::UnknownId, "image '" + id + "' has no caption relevance");
    return oracle.index_of(id);
  };
  std::vector<std::size_t> pool_index;
  pool_index.reserve(pool.size());
  for (const auto& id : pool) pool_index.push_back(index(id));

  std::vector<double> sums(cutoffs.size(), 0.0);
  std::vector<double> ranked;
  std::vector<double> ideal;
  for (const auto& [query, ranking] : rankings) {
    const std::size_t q = index(query);
    ranked.clear();
    for (const auto& id : ranking) {
      const std::size_t c = index(id);
      require(c != q, ErrorKind::MalformedRecord, "ranking for '" + query + "' contains the query");
      ranked.push_back(oracle.relevance(q, c));
    }
    ideal.clear();
    for (std::size_t c : pool_index) {
      if (c != q) ideal.push_back(oracle.relevance(q, c));
    }
    for (std::size_t k = 0; k < cutoffs.size(); ++k) sums[k] += ndcg(ranked, ideal, cutoffs[k], gain);
  }
  for (double& s : sums) s /= static_cast<double>(rankings.size());
  return sums;
}

}  // namespace sgr::eval
