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

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "sgr/error.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/params.hpp"
#include "sgr/gnn/propagation.hpp"
#include "sgr/linalg.hpp"

namespace sgr::gnn {

/// Pooled norms at or below this map to the zero embedding.
inline constexpr double kDegenerateNorm = 1e-12;

/// phi(S): a unit vector, or exactly zero for a degenerate graph.
struct GraphEmbedding {
  std::string image_id;
  Vector vector;

  bool is_zero() const { return vector.isZero(0.0); }
};

inline double similarity(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), ErrorKind::ShapeMismatch,
          "embedding sizes differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  return a.dot(b);
}

/// Scene graph similarity: the inner product of two embeddings.
inline double similarity(const GraphEmbedding& a, const GraphEmbedding& b) {
  return similarity(a.vector, b.vector);
}

/// Everything the backward pass needs from a forward evaluation.
struct ForwardCache {
  ModelKind kind = ModelKind::Gcn;
  std::size_t node_count = 0;
  std::size_t input_dim = 0;
  std::array<GraphOperator, kLayers> ops;  // one per layer (GIN epsilon may differ)
  // GCN: aggregated[l] = Ahat * H_{l-1}, pre[l] = aggregated[l] * W_l.
  // GIN: aggregated[l] = ((1+eps) I + A) * H_{l-1}, pre[l] = MLP hidden
  //      pre-activation, hidden[l] = relu(pre[l]).
  std::array<Matrix, kLayers> aggregated;
  std::array<Matrix, kLayers> pre;
  std::array<Matrix, kLayers> hidden;
  Vector pooled;
  double pooled_norm = 0.0;
};

namespace detail {

inline Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

inline Matrix relu_mask(const Matrix& pre, const Matrix& grad) {
  return (pre.array() > 0.0).select(grad, 0.0);
}

inline GraphEmbedding pool_and_normalize(const FeatureGraph& g, const Matrix& nodes, ForwardCache& cache) {
  cache.pooled = nodes.colwise().mean().transpose();
  cache.pooled_norm = cache.pooled.norm();
  GraphEmbedding e{g.image_id, Vector::Zero(cache.pooled.size())};
  if (cache.pooled_norm > kDegenerateNorm) e.vector = cache.pooled / cache.pooled_norm;
  return e;
}

inline void check_input(const FeatureGraph& g, std::size_t expected_dim) {
  require(g.node_count() >= 1, ErrorKind::ShapeMismatch, "graph '" + g.image_id + "' has no nodes");
  require(g.feature_dim() == expected_dim, ErrorKind::ShapeMismatch,
          "graph '" + g.image_id + "' has feature width " + std::to_string(g.feature_dim()) +
              ", model expects " + std::to_string(expected_dim));
}

/// Gradient w.r.t. the node matrix fed into mean pooling, given the gradient
/// w.r.t. the normalized embedding. Zero in the degenerate branch.
inline Matrix pooled_node_gradient(const ForwardCache& cache, const Vector& upstream) {
  const auto n = static_cast<Eigen::Index>(cache.node_count);
  Matrix grad = Matrix::Zero(n, cache.pooled.size());
  if (cache.pooled_norm <= kDegenerateNorm) return grad;
  const Vector unit = cache.pooled / cache.pooled_norm;
  const Vector dm = (upstream - unit * unit.dot(upstream)) / cache.pooled_norm;
  grad.rowwise() = dm.transpose() / static_cast<double>(n);
  return grad;
}

inline void check_cache(const FeatureGraph& g, const Params& p, const ForwardCache& cache,
                        const Vector& upstream) {
  require(cache.kind == kind_of(p), ErrorKind::CacheMismatch, "cache was produced by a different model kind");
  require(cache.node_count == g.node_count() && cache.input_dim == g.feature_dim(), ErrorKind::CacheMismatch,
          "cache does not match graph '" + g.image_id + "'");
  require(cache.input_dim == input_dim(p), ErrorKind::CacheMismatch, "cache does not match parameters");
  require(static_cast<std::size_t>(upstream.size()) == output_dim(p), ErrorKind::ShapeMismatch,
          "upstream gradient has wrong size");
}

}  // namespace detail

/// H_l = act(Ahat H_{l-1} W_l), ReLU after layers 1 and 2, then mean pooling
/// and unit normalization.
inline std::pair<GraphEmbedding, ForwardCache> gcn_forward(const FeatureGraph& g, const GcnParams& p) {
  detail::check_input(g, static_cast<std::size_t>(p.weights[0].rows()));
  ForwardCache cache;
  cache.kind = ModelKind::Gcn;
  cache.node_count = g.node_count();
  cache.input_dim = g.feature_dim();
  cache.ops[0] = GraphOperator::normalized_with_self_loops(g);
  const GraphOperator& op = cache.ops[0];

  Matrix h = g.node_features;
  for (std::size_t l = 0; l < kLayers; ++l) {
    cache.aggregated[l] = op.apply(h);
    cache.pre[l].noalias() = cache.aggregated[l] * p.weights[l];
    h = (l + 1 < kLayers) ? detail::relu(cache.pre[l]) : cache.pre[l];
  }
  auto embedding = detail::pool_and_normalize(g, h, cache);
  return {std::move(embedding), std::move(cache)};
}

/// h_v <- mlp_l((1 + eps_l) h_v + sum of neighbor states), three times, then
/// mean pooling and unit normalization.
inline std::pair<GraphEmbedding, ForwardCache> gin_forward(const FeatureGraph& g, const GinParams& p) {
  detail::check_input(g, static_cast<std::size_t>(p.layers[0].w1.rows()));
  ForwardCache cache;
  cache.kind = ModelKind::Gin;
  cache.node_count = g.node_count();
  cache.input_dim = g.feature_dim();

  Matrix h = g.node_features;
  for (std::size_t l = 0; l < kLayers; ++l) {
    const GinLayer& layer = p.layers[l];
    cache.ops[l] = GraphOperator::self_plus_neighbors(g, layer.epsilon);
    cache.aggregated[l] = cache.ops[l].apply(h);
    cache.pre[l].noalias() = cache.aggregated[l] * layer.w1;
    cache.pre[l].rowwise() += layer.b1.row(0);
    cache.hidden[l] = detail::relu(cache.pre[l]);
    h.noalias() = cache.hidden[l] * layer.w2;
    h.rowwise() += layer.b2.row(0);
  }
  auto embedding = detail::pool_and_normalize(g, h, cache);
  return {std::move(embedding), std::move(cache)};
}

inline std::pair<GraphEmbedding, ForwardCache> forward(const FeatureGraph& g, const Params& p) {
  return std::visit(
      [&](const auto& params) {
        if constexpr (std::is_same_v<std::decay_t<decltype(params)>, GcnParams>) {
          return gcn_forward(g, params);
        } else {
          return gin_forward(g, params);
        }
      },
      p);
}

inline GraphEmbedding embed(const FeatureGraph& g, const Params& p) { return forward(g, p).first; }

/// Adds d(upstream . embedding)/d(params) into `grads`.
inline void backward_accumulate(const FeatureGraph& g, const Params& p, const ForwardCache& cache,
                                const Vector& upstream, Params& grads) {
  detail::check_cache(g, p, cache, upstream);
  require(kind_of(grads) == kind_of(p), ErrorKind::ShapeMismatch, "gradient holder has wrong model kind");
  Matrix grad = detail::pooled_node_gradient(cache, upstream);
  if (cache.pooled_norm <= kDegenerateNorm) return;

  if (const auto* gcn = std::get_if<GcnParams>(&p)) {
    auto& out = std::get<GcnParams>(grads);
    for (std::size_t l = kLayers; l-- > 0;) {
      if (l + 1 < kLayers) grad = detail::relu_mask(cache.pre[l], grad);
      out.weights[l].noalias() += cache.aggregated[l].transpose() * grad;
      if (l > 0) {
        Matrix through_weights = grad * gcn->weights[l].transpose();
        grad = cache.ops[0].apply(through_weights);
      }
    }
    return;
  }

  const auto& gin = std::get<GinParams>(p);
  auto& out = std::get<GinParams>(grads);
  for (std::size_t l = kLayers; l-- > 0;) {
    const GinLayer& layer = gin.layers[l];
    GinLayer& g_layer = out.layers[l];
    g_layer.b2.row(0) += grad.colwise().sum();
    g_layer.w2.noalias() += cache.hidden[l].transpose() * grad;
    Matrix hidden_grad = detail::relu_mask(cache.pre[l], grad * layer.w2.transpose());
    g_layer.b1.row(0) += hidden_grad.colwise().sum();
    g_layer.w1.noalias() += cache.aggregated[l].transpose() * hidden_grad;
    if (l > 0) {
      Matrix through_weights = hidden_grad * layer.w1.transpose();
      grad = cache.ops[l].apply(through_weights);
    }
  }
}

/// Exact gradient of upstream . phi(S) with respect to every parameter.
inline Params backward(const FeatureGraph& g, const Params& p, const ForwardCache& cache,
                       const Vector& upstream) {
  Params grads = zeros_like(p);
  backward_accumulate(g, p, cache, upstream, grads);
  return grads;
}

}  // namespace sgr::gnn
