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
#include <string>
#include <unordered_map>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/io/vector_file.hpp"
#include "sgr/linalg.hpp"
#include "sgr/ranking.hpp"

namespace sgr {

inline constexpr double kCaptionUnitTolerance = 1e-4;

/// Caption embeddings of one image, each on the unit sphere.
struct CaptionEmbeddingSet {
  std::string image_id;
  std::vector<Vector> vectors;
};

inline void validate(const CaptionEmbeddingSet& set) {
  require(!set.vectors.empty(), ErrorKind::EmptySet, "image '" + set.image_id + "' has no caption vectors");
  for (const auto& v : set.vectors) {
    require(v.size() == set.vectors.front().size(), ErrorKind::ShapeMismatch,
            "image '" + set.image_id + "' has caption vectors of different sizes");
    require(std::abs(v.norm() - 1.0) <= kCaptionUnitTolerance, ErrorKind::MalformedRecord,
            "image '" + set.image_id + "' has a caption vector that is not unit norm");
  }
}

inline Vector mean_vector(const CaptionEmbeddingSet& set) {
  require(!set.vectors.empty(), ErrorKind::EmptySet, "image '" + set.image_id + "' has no caption vectors");
  Vector mean = Vector::Zero(set.vectors.front().size());
  for (const auto& v : set.vectors) {
    require(v.size() == mean.size(), ErrorKind::ShapeMismatch, "caption vectors of different sizes");
    mean += v;
  }
  return mean / static_cast<double>(set.vectors.size());
}

/// Mean inner product over all caption pairs. Evaluated as the inner product
/// of the two mean vectors, which is the same quantity and makes the result
/// exactly symmetric in its arguments.
inline double surrogate_relevance(const CaptionEmbeddingSet& a, const CaptionEmbeddingSet& b) {
  const Vector ma = mean_vector(a);
  const Vector mb = mean_vector(b);
  require(ma.size() == mb.size(), ErrorKind::ShapeMismatch, "caption dimensions differ");
  return ma.dot(mb);
}

/// Pairwise surrogate relevance over a split of images.
class RelevanceOracle {
 public:
  static constexpr std::size_t kDefaultMaterializeLimit = 4096;

  explicit RelevanceOracle(const std::vector<CaptionEmbeddingSet>& sets,
                           std::size_t materialize_limit = kDefaultMaterializeLimit) {
    require(!sets.empty(), ErrorKind::EmptySet, "relevance oracle needs at least one image");
    ids_.reserve(sets.size());
    for (const auto& s : sets) {
      validate(s);
      if (!index_.try_emplace(s.image_id, ids_.size()).second) {
        fail(ErrorKind::DuplicateId, "image '" + s.image_id + "' appears twice in caption data");
      }
      ids_.push_back(s.image_id);
    }
    const auto dim = sets.front().vectors.front().size();
    means_.resize(static_cast<Eigen::Index>(sets.size()), dim);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const Vector m = mean_vector(sets[i]);
      require(m.size() == dim, ErrorKind::ShapeMismatch, "caption dimensions differ across images");
      means_.row(static_cast<Eigen::Index>(i)) = m.transpose();
    }
    if (size() <= materialize_limit) materialize();
  }

  /// Restricts `full` to the listed ids (e.g. one split).
  static RelevanceOracle subset(const std::vector<CaptionEmbeddingSet>& all, const std::vector<std::string>& ids,
                                std::size_t materialize_limit = kDefaultMaterializeLimit) {
    std::unordered_map<std::string, const CaptionEmbeddingSet*> by_id;
    for (const auto& s : all) by_id.emplace(s.image_id, &s);
    std::vector<CaptionEmbeddingSet> picked;
    picked.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(ErrorKind::UnknownImage, "no caption vectors for image '" + id + "'");
      picked.push_back(*it->second);
    }
    return RelevanceOracle(picked, materialize_limit);
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  bool materialized() const { return !matrix_.empty(); }
  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::UnknownImage, "image '" + id + "' is not in the relevance split");
    return it->second;
  }

  double relevance(std::size_t i, std::size_t j) const {
    if (materialized()) return matrix_[i * size() + j];
    return compute(i, j);
  }

  double relevance(const std::string& a, const std::string& b) const { return relevance(index_of(a), index_of(b)); }

  std::vector<double> row(std::size_t i) const {
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[j] = relevance(i, j);
    return out;
  }

  /// Indices of the k most relevant other images to i, best first, ties by
  /// ascending id.
  std::vector<std::size_t> top_relevant(std::size_t i, std::size_t k) const {
    std::vector<ScoredIndex> candidates;
    candidates.reserve(size());
    for (std::size_t j = 0; j < size(); ++j) {
      if (j != i) candidates.push_back({j, relevance(i, j)});
    }
    std::vector<std::size_t> out;
    for (const auto& c : select_top(std::move(candidates), k, ids_)) out.push_back(c.index);
    return out;
  }

  std::vector<std::string> top_relevant(const std::string& id, std::size_t k) const {
    std::vector<std::string> out;
    for (std::size_t j : top_relevant(index_of(id), k)) out.push_back(ids_[j]);
    return out;
  }

 private:
  double compute(std::size_t i, std::size_t j) const {
    return means_.row(static_cast<Eigen::Index>(i)).dot(means_.row(static_cast<Eigen::Index>(j)));
  }

  void materialize() {
    const std::size_t n = size();
    matrix_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double s = compute(i, j);
        matrix_[i * n + j] = s;
        matrix_[j * n + i] = s;
      }
    }
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix means_;
  std::vector<double> matrix_;
};

/// Reads caption embeddings (JSON lines or SGVEC1 binary) into one set per
/// image.
inline std::vector<CaptionEmbeddingSet> read_caption_sets(const std::string& path) {
  std::vector<CaptionEmbeddingSet> sets;
  for (auto& [id, vectors] : io::group_by_id(io::read_vectors(path))) {
    CaptionEmbeddingSet s{id, std::move(vectors)};
    validate(s);
    sets.push_back(std::move(s));
  }
  return sets;
}

}  // namespace sgr
