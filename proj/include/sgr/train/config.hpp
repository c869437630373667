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
#include <cstdint>
#include <string>

#include "sgr/error.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/params.hpp"

namespace sgr::train {

/// Defaults reproduce the published schedule: Adam at 1e-4, decayed by 0.9
/// per epoch, batches of 32 pairs, 25 epochs, second pair element drawn from
/// the 100 most relevant images half of the time.
struct TrainConfig {
  double learning_rate = 1e-4;
  double lr_decay_per_epoch = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 25;
  double oversample_probability = 0.5;
  std::size_t oversample_pool = 100;
  std::uint64_t seed = 0;
  gnn::ModelKind model_kind = gnn::ModelKind::Gcn;
  GraphVariant::Kind graph_variant = GraphVariant::Kind::Full;
  gnn::ModelDims dims;
  double gin_epsilon = 0.0;

  void validate() const {
    require(learning_rate > 0.0, ErrorKind::Config, "learning_rate must be positive");
    require(lr_decay_per_epoch > 0.0, ErrorKind::Config, "lr_decay_per_epoch must be positive");
    require(batch_size > 0, ErrorKind::Config, "batch_size must be positive");
    require(oversample_probability >= 0.0 && oversample_probability <= 1.0, ErrorKind::Config,
            "oversample_probability must lie in [0, 1]");
    require(oversample_pool > 0, ErrorKind::Config, "oversample_pool must be positive");
    require(dims.input > 0 && dims.hidden > 0 && dims.mlp_hidden > 0, ErrorKind::Config,
            "model dimensions must be positive");
  }

  /// Learning rate used throughout epoch `epoch` (0-based).
  double learning_rate_at(std::size_t epoch) const {
    return learning_rate * std::pow(lr_decay_per_epoch, static_cast<double>(epoch));
  }

  /// Seed for the random_relations ablation's rewiring.
  std::uint64_t variant_seed() const { return derive_seed(seed, "variant"); }

  GraphVariant variant() const { return {graph_variant, variant_seed()}; }

  bool operator==(const TrainConfig&) const = default;
};

}  // namespace sgr::train
