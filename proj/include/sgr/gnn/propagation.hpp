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
#include <vector>

#include "sgr/error.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/linalg.hpp"

namespace sgr::gnn {

/// A symmetric N x N operator stored as a diagonal plus a CSR neighbor list.
/// Because it is symmetric, applying it also applies its transpose, which is
/// what the backward passes rely on.
class GraphOperator {
 public:
  GraphOperator() = default;

  std::size_t size() const { return diagonal_.size(); }

  /// out = Op * H (row v of out mixes the rows of v and its neighbors).
  Matrix apply(const Matrix& h) const {
    require(static_cast<std::size_t>(h.rows()) == size(), ErrorKind::ShapeMismatch,
            "operator/matrix row mismatch");
    Matrix out(h.rows(), h.cols());
    for (std::size_t v = 0; v < size(); ++v) {
      const auto row = static_cast<Eigen::Index>(v);
      out.row(row) = diagonal_[v] * h.row(row);
      for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
        out.row(row) += weights_[k] * h.row(static_cast<Eigen::Index>(columns_[k]));
      }
    }
    return out;
  }

  Matrix to_dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Matrix dense = Matrix::Zero(n, n);
    for (std::size_t v = 0; v < size(); ++v) {
      dense(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) = diagonal_[v];
      for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
        dense(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(columns_[k])) = weights_[k];
      }
    }
    return dense;
  }

  /// D^{-1/2}(A+I)D^{-1/2} with D the degree matrix of A+I.
  static GraphOperator normalized_with_self_loops(const FeatureGraph& g) {
    GraphOperator op = adjacency_list(g);
    std::vector<double> inv_sqrt(op.size());
    for (std::size_t v = 0; v < op.size(); ++v) {
      const double degree = 1.0 + static_cast<double>(op.offsets_[v + 1] - op.offsets_[v]);
      inv_sqrt[v] = 1.0 / std::sqrt(degree);
      op.diagonal_[v] = 1.0 / degree;
    }
    for (std::size_t v = 0; v < op.size(); ++v) {
      for (std::size_t k = op.offsets_[v]; k < op.offsets_[v + 1]; ++k) {
        op.weights_[k] = inv_sqrt[v] * inv_sqrt[op.columns_[k]];
      }
    }
    return op;
  }

  /// (1 + epsilon) I + A, the GIN aggregation.
  static GraphOperator self_plus_neighbors(const FeatureGraph& g, double epsilon) {
    GraphOperator op = adjacency_list(g);
    std::fill(op.diagonal_.begin(), op.diagonal_.end(), 1.0 + epsilon);
    return op;
  }

 private:
  static GraphOperator adjacency_list(const FeatureGraph& g) {
    const std::size_t n = g.node_count();
    GraphOperator op;
    op.diagonal_.assign(n, 0.0);
    op.offsets_.assign(n + 1, 0);
    for (const auto& [a, b] : g.edges) {
      require(a < n && b < n && a != b, ErrorKind::ShapeMismatch, "invalid edge in feature graph");
      ++op.offsets_[a + 1];
      ++op.offsets_[b + 1];
    }
    for (std::size_t v = 0; v < n; ++v) op.offsets_[v + 1] += op.offsets_[v];
    op.columns_.resize(op.offsets_[n]);
    op.weights_.assign(op.offsets_[n], 1.0);
    std::vector<std::size_t> cursor(op.offsets_.begin(), op.offsets_.end() - 1);
    for (const auto& [a, b] : g.edges) {
      op.columns_[cursor[a]++] = b;
      op.columns_[cursor[b]++] = a;
    }
    return op;
  }

  std::vector<double> diagonal_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> columns_;
  std::vector<double> weights_;
};

/// Dense symmetric-normalized adjacency with self loops.
inline Matrix normalize_adjacency(const FeatureGraph& g) {
  return GraphOperator::normalized_with_self_loops(g).to_dense();
}

}  // namespace sgr::gnn
