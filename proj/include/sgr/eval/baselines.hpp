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

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sgr/eval/agreement.hpp"
#include "sgr/rng.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/word_vectors.hpp"

namespace sgr::eval {

/// Object label -> number of occurrences. Labels are lowercased and
/// whitespace-normalized the same way word lookup does.
using ObjectCounts = std::map<std::string, double>;

inline ObjectCounts object_counts(const SceneGraph& sg) {
  ObjectCounts counts;
  for (const auto& o : sg.objects) {
    std::string key;
    for (const auto& t : label_tokens(o.label)) {
      if (!key.empty()) key += ' ';
      key += t;
    }
    counts[key] += 1.0;
  }
  return counts;
}

/// Cosine similarity of object count vectors; 0 if either is empty.
inline double object_count_similarity(const ObjectCounts& a, const ObjectCounts& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [label, c] : a) {
    na += c * c;
    if (auto it = b.find(label); it != b.end()) dot += c * it->second;
  }
  for (const auto& [label, c] : b) nb += c * c;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

inline double object_count_similarity(const SceneGraph& a, const SceneGraph& b) {
  return object_count_similarity(object_counts(a), object_counts(b));
}

/// Uniform cand1/cand2 choice per triplet.
inline std::vector<std::optional<Decision>> random_decisions(Rng& rng, std::size_t n) {
  std::vector<std::optional<Decision>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(rng.bernoulli(0.5) ? Decision::Cand1 : Decision::Cand2);
  return out;
}

/// Uniformly random permutation of the candidates.
inline std::vector<std::string> random_ranking(Rng& rng, std::vector<std::string> candidates) {
  rng.shuffle(candidates);
  return candidates;
}

}  // namespace sgr::eval
