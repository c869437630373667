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

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/eval/baselines.hpp"
#include "sgr/eval/ndcg.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/io/vector_file.hpp"
#include "sgr/ranking.hpp"
#include "sgr/relevance.hpp"
#include "sgr/retrieval.hpp"
#include "sgr/rng.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/word_vectors.hpp"

namespace sgr {

/// Scene graphs keyed by image id.
class SceneGraphSet {
 public:
  explicit SceneGraphSet(std::vector<SceneGraph> graphs) : graphs_(std::move(graphs)) {
    for (std::size_t i = 0; i < graphs_.size(); ++i) {
      if (!index_.try_emplace(graphs_[i].image_id, i).second) {
        fail(ErrorKind::DuplicateId, "scene graph '" + graphs_[i].image_id + "' appears twice");
      }
    }
  }

  const SceneGraph& at(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::UnknownId, "no scene graph for image '" + id + "'");
    return graphs_[it->second];
  }

  const std::vector<SceneGraph>& all() const { return graphs_; }

 private:
  std::vector<SceneGraph> graphs_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::vector<FeatureGraph> feature_graphs(const SceneGraphSet& graphs, const std::vector<std::string>& ids,
                                                const WordVectorTable& table, GraphVariant variant) {
  std::vector<FeatureGraph> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(to_feature_graph(graphs.at(id), table, variant));
  return out;
}

/// query id -> candidate ids, in no particular order.
using CandidateLists = std::map<std::string, std::vector<std::string>>;

/// The features of `pool`, in pool order, as a pre-ranking store.
inline VisualFeatureStore pool_store(const io::LabeledRows& features, const std::vector<std::string>& pool) {
  const auto index = detail::unique_index(features.ids, "visual feature file");
  Matrix rows(static_cast<Eigen::Index>(pool.size()), features.rows.cols());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto it = index.find(pool[i]);
    if (it == index.end()) fail(ErrorKind::UnknownId, "image '" + pool[i] + "' has no visual feature");
    rows.row(static_cast<Eigen::Index>(i)) = features.rows.row(static_cast<Eigen::Index>(it->second));
  }
  return {pool, std::move(rows)};
}

/// Candidates per query: every other pool image in full mode, the top-K
/// visual neighbors in two-stage mode.
inline CandidateLists candidate_lists(const std::vector<std::string>& queries, const std::vector<std::string>& pool,
                                      RetrievalMode mode, const VisualFeatureStore* features = nullptr) {
  CandidateLists out;
  for (const auto& q : queries) {
    auto& c = out[q];
    if (mode.kind == RetrievalMode::Kind::Full) {
      c.reserve(pool.size());
      for (const auto& id : pool) {
        if (id != q) c.push_back(id);
      }
    } else {
      if (features == nullptr) fail(ErrorKind::MissingStore, "two-stage retrieval needs visual features");
      c = prerank(features->feature(q), *features, mode.k, q);
    }
  }
  return out;
}

/// Orders each candidate list by a pairwise score, ties by ascending id.
template <typename ScoreFn>
eval::Rankings rank_by_score(const CandidateLists& candidates, ScoreFn&& score) {
  eval::Rankings out;
  for (const auto& [q, cands] : candidates) {
    std::vector<ScoredIndex> scored;
    scored.reserve(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) scored.push_back({c, score(q, cands[c])});
    auto& ranking = out[q];
    for (const auto& s : select_top(std::move(scored), cands.size(), cands)) ranking.push_back(cands[s.index]);
  }
  return out;
}

inline eval::Rankings retrieval_rankings(const std::vector<std::string>& queries, RetrievalMode mode,
                                         const EmbeddingIndex& index, const VisualFeatureStore* features = nullptr) {
  eval::Rankings out;
  for (const auto& q : queries) {
    auto& ranking = out[q];
    for (const auto& item : retrieve(q, mode, index, features)) ranking.push_back(item.id);
  }
  return out;
}

inline eval::Rankings object_count_rankings(const CandidateLists& candidates, const SceneGraphSet& graphs) {
  std::unordered_map<std::string, eval::ObjectCounts> counts;
  auto counts_of = [&](const std::string& id) -> const eval::ObjectCounts& {
    auto it = counts.find(id);
    if (it == counts.end()) it = counts.emplace(id, eval::object_counts(graphs.at(id))).first;
    return it->second;
  };
  return rank_by_score(candidates, [&](const std::string& q, const std::string& c) {
    return eval::object_count_similarity(counts_of(q), counts_of(c));
  });
}

/// Ranks by the surrogate relevance itself (the upper bound).
inline eval::Rankings relevance_rankings(const CandidateLists& candidates, const RelevanceOracle& oracle) {
  return rank_by_score(candidates,
                       [&](const std::string& q, const std::string& c) { return oracle.relevance(q, c); });
}

inline eval::Rankings random_rankings(const CandidateLists& candidates, Rng& rng) {
  eval::Rankings out;
  for (const auto& [q, cands] : candidates) out[q] = eval::random_ranking(rng, cands);
  return out;
}

/// One decision per triplet from a pairwise score; nullopt where `score`
/// has no value for either candidate.
template <typename ScoreFn>
std::vector<std::optional<eval::Decision>> score_decisions(const std::vector<eval::TripletAnnotation>& triplets,
                                                           ScoreFn&& score) {
  std::vector<std::optional<eval::Decision>> out;
  out.reserve(triplets.size());
  for (const auto& t : triplets) {
    const std::optional<double> a = score(t.query, t.cand1);
    const std::optional<double> b = score(t.query, t.cand2);
    if (a && b) {
      out.push_back(eval::decide(*a, *b));
    } else if (a || b) {
      out.push_back(a ? eval::Decision::Cand1 : eval::Decision::Cand2);
    } else {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

/// Decisions implied by retrieval results: the candidate with the higher
/// result score wins; a candidate missing from the results loses.
inline std::vector<std::optional<eval::Decision>> result_decisions(
    const std::vector<eval::TripletAnnotation>& triplets,
    const std::map<std::string, std::vector<RankedItem>>& results) {
  std::map<std::string, std::unordered_map<std::string, double>> scores;
  for (const auto& [q, items] : results) {
    auto& m = scores[q];
    for (const auto& item : items) m.emplace(item.id, item.score);
  }
  return score_decisions(triplets, [&](const std::string& q, const std::string& c) -> std::optional<double> {
    auto qi = scores.find(q);
    if (qi == scores.end()) return std::nullopt;
    auto ci = qi->second.find(c);
    if (ci == qi->second.end()) return std::nullopt;
    return ci->second;
  });
}

}  // namespace sgr
