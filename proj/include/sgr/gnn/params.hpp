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
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "sgr/error.hpp"
#include "sgr/linalg.hpp"
#include "sgr/rng.hpp"

namespace sgr::gnn {

inline constexpr std::size_t kLayers = 3;

enum class ModelKind : std::uint8_t { Gcn, Gin };

constexpr std::string_view to_string(ModelKind kind) { return kind == ModelKind::Gcn ? "gcn" : "gin"; }

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "gcn") return ModelKind::Gcn;
  if (name == "gin") return ModelKind::Gin;
  fail(ErrorKind::Config, "unknown model kind '" + std::string(name) + "'");
}

/// Layer widths. `hidden` is also the embedding dimension.
struct ModelDims {
  std::size_t input = 300;
  std::size_t hidden = 300;
  std::size_t mlp_hidden = 512;  // GIN only

  bool operator==(const ModelDims&) const = default;
};

/// Three bias-free graph convolutions.
struct GcnParams {
  std::array<Matrix, kLayers> weights;

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    for (auto& w : self.weights) f(w);
  }
};

/// One GIN layer: a one-hidden-layer ReLU perceptron applied to the
/// aggregated node states. Biases are stored as 1 x n matrices.
struct GinLayer {
  double epsilon = 0.0;  // fixed, not trained
  Matrix w1, b1, w2, b2;
};

struct GinParams {
  std::array<GinLayer, kLayers> layers;

  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    for (auto& layer : self.layers) {
      f(layer.w1);
      f(layer.b1);
      f(layer.w2);
      f(layer.b2);
    }
  }
};

using Params = std::variant<GcnParams, GinParams>;

/// Calls f(Matrix&) on every trainable tensor in a fixed order. Checkpoints,
/// the optimizer and gradient checks all rely on this order.
template <typename F>
void for_each_tensor(Params& p, F&& f) {
  std::visit([&](auto& params) { std::decay_t<decltype(params)>::visit(params, f); }, p);
}

template <typename F>
void for_each_tensor(const Params& p, F&& f) {
  std::visit([&](const auto& params) { std::decay_t<decltype(params)>::visit(params, f); }, p);
}

inline ModelKind kind_of(const Params& p) {
  return std::holds_alternative<GcnParams>(p) ? ModelKind::Gcn : ModelKind::Gin;
}

inline std::size_t parameter_count(const Params& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

inline Params zeros_like(const Params& p) {
  Params z = p;
  for_each_tensor(z, [](Matrix& m) { m.setZero(); });
  return z;
}

namespace detail {

inline Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
  return m;
}

}  // namespace detail

/// Weights ~ U(-a, a), a = sqrt(6 / (fan_in + fan_out)); biases zero.
inline Params init_params(ModelKind kind, const ModelDims& dims, Rng& rng, double gin_epsilon = 0.0) {
  if (kind == ModelKind::Gcn) {
    GcnParams p;
    std::size_t in = dims.input;
    for (auto& w : p.weights) {
      w = detail::glorot(in, dims.hidden, rng);
      in = dims.hidden;
    }
    return p;
  }
  GinParams p;
  std::size_t in = dims.input;
  for (auto& layer : p.layers) {
    layer.epsilon = gin_epsilon;
    layer.w1 = detail::glorot(in, dims.mlp_hidden, rng);
    layer.b1 = Matrix::Zero(1, static_cast<Eigen::Index>(dims.mlp_hidden));
    layer.w2 = detail::glorot(dims.mlp_hidden, dims.hidden, rng);
    layer.b2 = Matrix::Zero(1, static_cast<Eigen::Index>(dims.hidden));
    in = dims.hidden;
  }
  return p;
}

inline std::size_t input_dim(const Params& p) {
  if (const auto* gcn = std::get_if<GcnParams>(&p)) return static_cast<std::size_t>(gcn->weights[0].rows());
  return static_cast<std::size_t>(std::get<GinParams>(p).layers[0].w1.rows());
}

inline std::size_t output_dim(const Params& p) {
  if (const auto* gcn = std::get_if<GcnParams>(&p)) return static_cast<std::size_t>(gcn->weights[2].cols());
  return static_cast<std::size_t>(std::get<GinParams>(p).layers[2].w2.cols());
}

}  // namespace sgr::gnn
