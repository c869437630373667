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
#include <span>
#include <string>
#include <vector>

namespace sgr {

struct ScoredIndex {
  std::size_t index = 0;
  double score = 0.0;
};

/// Higher score first; equal scores by ascending id.
struct ScoreThenIdOrder {
  std::span<const std::string> ids;

  bool operator()(const ScoredIndex& a, const ScoredIndex& b) const {
    if (a.score != b.score) return a.score > b.score;
    return ids[a.index] < ids[b.index];
  }
};

/// The k best of `candidates` under ScoreThenIdOrder, best first. k larger
/// than the candidate count returns all of them.
inline std::vector<ScoredIndex> select_top(std::vector<ScoredIndex> candidates, std::size_t k,
                                           std::span<const std::string> ids) {
  const ScoreThenIdOrder order{ids};
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                    order);
  candidates.resize(k);
  return candidates;
}

}  // namespace sgr
