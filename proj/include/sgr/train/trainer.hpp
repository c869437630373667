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

#include <functional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/model.hpp"
#include "sgr/relevance.hpp"
#include "sgr/rng.hpp"
#include "sgr/train/adam.hpp"
#include "sgr/train/checkpoint.hpp"
#include "sgr/train/config.hpp"
#include "sgr/train/sampler.hpp"

namespace sgr::train {

struct EpochStats {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> epochs;
};

/// Mean squared error of one batch and its gradient.
struct BatchEvaluation {
  double loss = 0.0;
  gnn::Params grads;
};

/// Forward/backward for a batch of pairs. Each distinct graph is evaluated
/// once; upstream gradients of all pairs it takes part in are summed before
/// its single backward pass (the embedding gradient is linear in upstream).
/// Graphs are processed in order of first appearance, so the reduction order
/// is fixed.
inline BatchEvaluation evaluate_batch(const std::vector<FeatureGraph>& graphs, const RelevanceOracle& oracle,
                                      const gnn::Params& params, const std::vector<IndexPair>& batch,
                                      bool with_gradient = true) {
  require(!batch.empty(), ErrorKind::Config, "empty batch");
  std::vector<std::size_t> order;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (const auto& [i, j] : batch) {
    for (std::size_t g : {i, j}) {
      if (slot.try_emplace(g, order.size()).second) order.push_back(g);
    }
  }
  std::vector<gnn::GraphEmbedding> emb(order.size());
  std::vector<gnn::ForwardCache> caches(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto [e, c] = gnn::forward(graphs[order[k]], params);
    emb[k] = std::move(e);
    caches[k] = std::move(c);
  }

  BatchEvaluation out;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const auto dim = static_cast<Eigen::Index>(gnn::output_dim(params));
  std::vector<Vector> upstream(order.size(), Vector::Zero(dim));
  for (const auto& [i, j] : batch) {
    const std::size_t a = slot[i];
    const std::size_t b = slot[j];
    const double f = gnn::similarity(emb[a], emb[b]);
    const PairLoss pl = pair_loss(f, oracle.relevance(i, j));
    out.loss += pl.loss * scale;
    upstream[a] += (pl.dloss_df * scale) * emb[b].vector;
    upstream[b] += (pl.dloss_df * scale) * emb[a].vector;
  }
  if (with_gradient) {
    out.grads = gnn::zeros_like(params);
    for (std::size_t k = 0; k < order.size(); ++k) {
      gnn::backward_accumulate(graphs[order[k]], params, caches[k], upstream[k], out.grads);
    }
  }
  return out;
}

/// Steps per epoch: floor(|train| / batch_size), at least one.
inline std::size_t steps_per_epoch(std::size_t train_size, std::size_t batch_size) {
  return std::max<std::size_t>(1, train_size / batch_size);
}

/// Regresses embedding similarity onto surrogate relevance. `graphs[i]` must
/// belong to `oracle.ids()[i]`. Deterministic given cfg.seed.
inline TrainResult train(const std::vector<FeatureGraph>& graphs, const RelevanceOracle& oracle,
                         const TrainConfig& cfg,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  cfg.validate();
  require(graphs.size() == oracle.size(), ErrorKind::ShapeMismatch, "graph count differs from relevance split");
  require(graphs.size() >= 2, ErrorKind::Config, "training needs at least two graphs");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    require(graphs[i].image_id == oracle.ids()[i], ErrorKind::ShapeMismatch,
            "graph order differs from relevance split at '" + graphs[i].image_id + "'");
  }

  Rng init_rng(cfg.seed, "init");
  Rng sampler_rng(cfg.seed, "sampler");
  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  ck.config = cfg;
  ck.params = gnn::init_params(cfg.model_kind, cfg.dims, init_rng, cfg.gin_epsilon);

  const PairSampler sampler(oracle, cfg);
  AdamState adam(ck.params);
  const std::size_t steps = steps_per_epoch(graphs.size(), cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto batch = sampler.sample_batch(sampler_rng);
      BatchEvaluation be = evaluate_batch(graphs, oracle, ck.params, batch);
      loss_sum += be.loss;
      adam_step(ck.params, be.grads, adam, lr);
    }
    EpochStats stats{epoch, lr, loss_sum / static_cast<double>(steps)};
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
    ck.epoch = epoch + 1;
  }
  ck.rng_state = sampler_rng.save_state();
  return result;
}

/// Tab-separated "epoch lr mean_loss" lines.
inline void write_metrics_log(std::ostream& out, const std::vector<EpochStats>& epochs) {
  out.precision(10);
  for (const auto& e : epochs) out << e.epoch << '\t' << e.learning_rate << '\t' << e.mean_loss << '\n';
}

}  // namespace sgr::train
