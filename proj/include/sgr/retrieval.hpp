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
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/model.hpp"
#include "sgr/io/vector_file.hpp"
#include "sgr/linalg.hpp"
#include "sgr/ranking.hpp"

namespace sgr {

inline constexpr double kUnitRowTolerance = 1e-6;

namespace detail {

inline std::unordered_map<std::string, std::size_t> unique_index(const std::vector<std::string>& ids,
                                                                 const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.try_emplace(ids[i], i).second) {
      fail(ErrorKind::DuplicateId, std::string(what) + " contains image '" + ids[i] + "' twice");
    }
  }
  return index;
}

}  // namespace detail

/// Pre-computed graph embeddings, one unit (or zero) row per image.
class EmbeddingIndex {
 public:
  EmbeddingIndex(std::vector<std::string> ids, Matrix rows) : ids_(std::move(ids)), rows_(std::move(rows)) {
    require(ids_.size() == static_cast<std::size_t>(rows_.rows()), ErrorKind::ShapeMismatch,
            "index id count differs from row count");
    index_ = detail::unique_index(ids_, "embedding index");
    for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
      const double norm = rows_.row(r).norm();
      require(norm == 0.0 || std::abs(norm - 1.0) <= kUnitRowTolerance, ErrorKind::MalformedRecord,
              "index row for '" + ids_[static_cast<std::size_t>(r)] + "' is neither unit nor zero");
    }
  }

  static EmbeddingIndex from_rows(io::LabeledRows data) { return {std::move(data.ids), std::move(data.rows)}; }

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(rows_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& rows() const { return rows_; }
  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::UnknownId, "image '" + id + "' is not in the embedding index");
    return it->second;
  }

  Vector embedding(const std::string& id) const { return rows_.row(static_cast<Eigen::Index>(index_of(id))).transpose(); }

  io::LabeledRows to_rows() const { return {ids_, rows_}; }

 private:
  std::vector<std::string> ids_;
  Matrix rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Embeds every graph with the given model.
inline EmbeddingIndex build_index(const std::vector<FeatureGraph>& graphs, const gnn::Params& params) {
  require(!graphs.empty(), ErrorKind::EmptySet, "cannot build an index from zero graphs");
  std::vector<std::string> ids;
  ids.reserve(graphs.size());
  for (const auto& g : graphs) ids.push_back(g.image_id);
  detail::unique_index(ids, "graph list");
  Matrix rows(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(gnn::output_dim(params)));
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = gnn::embed(graphs[i], params).vector.transpose();
  }
  return {std::move(ids), std::move(rows)};
}

/// External visual descriptors (e.g. CNN activations) used for pre-ranking.
class VisualFeatureStore {
 public:
  VisualFeatureStore(std::vector<std::string> ids, Matrix rows) : ids_(std::move(ids)), rows_(std::move(rows)) {
    require(ids_.size() == static_cast<std::size_t>(rows_.rows()), ErrorKind::ShapeMismatch,
            "feature id count differs from row count");
    index_ = detail::unique_index(ids_, "visual feature store");
    norms_.resize(ids_.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
      norms_[r] = rows_.row(static_cast<Eigen::Index>(r)).norm();
      require(std::isfinite(norms_[r]) && norms_[r] > 0.0, ErrorKind::MalformedRecord,
              "visual feature for '" + ids_[r] + "' is zero or non-finite");
    }
  }

  static VisualFeatureStore from_rows(io::LabeledRows data) { return {std::move(data.ids), std::move(data.rows)}; }

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(rows_.cols()); }
  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::UnknownId, "image '" + id + "' has no visual feature");
    return it->second;
  }

  Vector feature(const std::string& id) const { return rows_.row(static_cast<Eigen::Index>(index_of(id))).transpose(); }

  double cosine(const Vector& query, double query_norm, std::size_t r) const {
    return rows_.row(static_cast<Eigen::Index>(r)).dot(query) / (query_norm * norms_[r]);
  }

 private:
  std::vector<std::string> ids_;
  Matrix rows_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The K stored images closest to `query` in cosine similarity, best first,
/// ties by ascending id. `exclude` (the query itself) is dropped before
/// truncation.
inline std::vector<std::string> prerank(const Vector& query, const VisualFeatureStore& store, std::size_t k,
                                        const std::optional<std::string>& exclude = std::nullopt) {
  require(static_cast<std::size_t>(query.size()) == store.dimension(), ErrorKind::ShapeMismatch,
          "query feature has " + std::to_string(query.size()) + " components, store has " +
              std::to_string(store.dimension()));
  const double qn = query.norm();
  require(qn > 0.0, ErrorKind::ShapeMismatch, "query feature is zero");
  std::vector<ScoredIndex> scored;
  scored.reserve(store.size());
  for (std::size_t r = 0; r < store.size(); ++r) {
    if (exclude && store.ids()[r] == *exclude) continue;
    scored.push_back({r, store.cosine(query, qn, r)});
  }
  std::vector<std::string> out;
  for (const auto& s : select_top(std::move(scored), k, store.ids())) out.push_back(store.ids()[s.index]);
  return out;
}

struct RankedItem {
  std::string id;
  double score = 0.0;
};

/// Orders candidates by scene graph similarity to the query, best first,
/// ties by ascending id.
inline std::vector<RankedItem> rerank(const Vector& query_embedding, const std::vector<std::string>& candidates,
                                      const EmbeddingIndex& index) {
  require(static_cast<std::size_t>(query_embedding.size()) == index.dimension(), ErrorKind::ShapeMismatch,
          "query embedding dimension differs from index");
  std::vector<ScoredIndex> scored;
  scored.reserve(candidates.size());
  for (const auto& id : candidates) {
    const std::size_t r = index.index_of(id);
    scored.push_back({r, index.rows().row(static_cast<Eigen::Index>(r)).dot(query_embedding)});
  }
  std::vector<RankedItem> out;
  out.reserve(scored.size());
  for (const auto& s : select_top(std::move(scored), scored.size(), index.ids())) {
    out.push_back({index.ids()[s.index], s.score});
  }
  return out;
}

inline std::vector<RankedItem> rerank(const gnn::GraphEmbedding& query, const std::vector<std::string>& candidates,
                                      const EmbeddingIndex& index) {
  return rerank(query.vector, candidates, index);
}

struct RetrievalMode {
  enum class Kind { TwoStage, Full };
  Kind kind = Kind::Full;
  std::size_t k = 100;  // pre-rank depth for TwoStage

  static RetrievalMode full() { return {}; }
  static RetrievalMode two_stage(std::size_t k) { return {Kind::TwoStage, k}; }
};

/// Ranks the corpus for one query. Full mode re-ranks every other indexed
/// image; two-stage re-ranks the top-K visual neighbors. The query never
/// appears in the result.
inline std::vector<RankedItem> retrieve(const std::string& query_id, RetrievalMode mode, const EmbeddingIndex& index,
                                        const VisualFeatureStore* features = nullptr) {
  const Vector query = index.embedding(query_id);
  std::vector<std::string> candidates;
  if (mode.kind == RetrievalMode::Kind::Full) {
    candidates.reserve(index.size());
    for (const auto& id : index.ids()) {
      if (id != query_id) candidates.push_back(id);
    }
  } else {
    if (features == nullptr) fail(ErrorKind::MissingStore, "two-stage retrieval needs visual features");
    candidates = prerank(features->feature(query_id), *features, mode.k, query_id);
  }
  return rerank(query, candidates, index);
}

/// One "query_id<TAB>rank<TAB>candidate_id<TAB>score" line per result, rank
/// starting at 1, score with 9 decimals.
inline void write_results(std::ostream& out, const std::string& query_id, const std::vector<RankedItem>& ranked) {
  char score[64];
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    std::snprintf(score, sizeof score, "%.9f", ranked[r].score);
    out << query_id << '\t' << (r + 1) << '\t' << ranked[r].id << '\t' << score << '\n';
  }
}

/// Parses result lines back into per-query rankings (ordered by rank).
inline std::map<std::string, std::vector<RankedItem>> read_results(std::istream& in) {
  std::map<std::string, std::vector<std::pair<std::size_t, RankedItem>>> staged;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      cols.push_back(line.substr(start, tab - start));
    }
    cols.push_back(line.substr(start));
    if (cols.size() != 4) fail(ErrorKind::MalformedRecord, "results line " + std::to_string(line_no) + ": expected 4 columns");
    try {
      staged[cols[0]].push_back({std::stoul(cols[1]), RankedItem{cols[2], std::stod(cols[3])}});
    } catch (const std::exception&) {
      fail(ErrorKind::MalformedRecord, "results line " + std::to_string(line_no) + ": bad rank or score");
    }
  }
  std::map<std::string, std::vector<RankedItem>> out;
  for (auto& [query, items] : staged) {
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& ranked = out[query];
    for (auto& [rank, item] : items) ranked.push_back(std::move(item));
  }
  return out;
}

}  // namespace sgr
