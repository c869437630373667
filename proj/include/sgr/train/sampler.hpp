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

#include <utility>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/relevance.hpp"
#include "sgr/rng.hpp"
#include "sgr/train/config.hpp"

namespace sgr::train {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Draws training pairs over the images of a relevance split. The first
/// element is uniform; the second comes from the first's most relevant
/// neighbors with probability `oversample_probability`, otherwise uniformly
/// from the other images.
class PairSampler {
 public:
  PairSampler(const RelevanceOracle& oracle, const TrainConfig& cfg)
      : size_(oracle.size()), probability_(cfg.oversample_probability), batch_size_(cfg.batch_size) {
    require(size_ >= 2, ErrorKind::Config, "pair sampling needs at least two training images");
    if (probability_ > 0.0) {
      pools_.reserve(size_);
      for (std::size_t i = 0; i < size_; ++i) pools_.push_back(oracle.top_relevant(i, cfg.oversample_pool));
    }
  }

  const std::vector<std::size_t>& pool(std::size_t i) const { return pools_.at(i); }

  IndexPair sample_pair(Rng& rng) const {
    const std::size_t i = rng.uniform_index(size_);
    // The bernoulli draw is always consumed so the stream layout does not
    // depend on the probability.
    if (rng.bernoulli(probability_)) {
      const auto& candidates = pools_[i];
      return {i, candidates[rng.uniform_index(candidates.size())]};
    }
    std::size_t j = rng.uniform_index(size_);
    while (j == i) j = rng.uniform_index(size_);
    return {i, j};
  }

  std::vector<IndexPair> sample_batch(Rng& rng) const {
    std::vector<IndexPair> batch;
    batch.reserve(batch_size_);
    for (std::size_t b = 0; b < batch_size_; ++b) batch.push_back(sample_pair(rng));
    return batch;
  }

 private:
  std::size_t size_;
  double probability_;
  std::size_t batch_size_;
  std::vector<std::vector<std::size_t>> pools_;
};

/// Free-function form of PairSampler::sample_batch.
inline std::vector<IndexPair> sample_pair_batch(Rng& rng, const RelevanceOracle& oracle, const TrainConfig& cfg) {
  return PairSampler(oracle, cfg).sample_batch(rng);
}

/// Squared error between predicted similarity f and target relevance s, and
/// its derivative with respect to f.
struct PairLoss {
  double loss;
  double dloss_df;
};

inline PairLoss pair_loss(double f, double s) {
  const double diff = f - s;
  return {diff * diff, 2.0 * diff};
}

}  // namespace sgr::train
