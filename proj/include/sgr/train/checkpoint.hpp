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

#include <string>
#include <string_view>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/gnn/params.hpp"
#include "sgr/io/binary.hpp"
#include "sgr/train/config.hpp"

namespace sgr::train {

inline constexpr std::string_view kCheckpointMagic = "SGCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  gnn::Params params;
  TrainConfig config;
  std::size_t epoch = 0;        // completed epochs
  std::string rng_state;        // sampler stream after `epoch` epochs
};

/// Layout (all little-endian):
///   "SGCK" | u32 version | u64 payload bytes | payload
/// payload:
///   u32 model kind | u32 graph variant | u64 dims x3 | f64 lr | f64 decay |
///   u64 batch | u64 epochs | f64 oversample p | u64 pool | u64 seed |
///   f64 gin epsilon | u64 epoch | str rng state | u32 epsilon count |
///   f64 epsilons | u32 tensor count | (u64 rows, u64 cols, f64 data)...
inline std::vector<char> encode_checkpoint(const Checkpoint& c) {
  io::ByteWriter p;
  const TrainConfig& cfg = c.config;
  p.u32(static_cast<std::uint32_t>(gnn::kind_of(c.params)));
  p.u32(static_cast<std::uint32_t>(cfg.graph_variant));
  p.u64(cfg.dims.input);
  p.u64(cfg.dims.hidden);
  p.u64(cfg.dims.mlp_hidden);
  p.f64(cfg.learning_rate);
  p.f64(cfg.lr_decay_per_epoch);
  p.u64(cfg.batch_size);
  p.u64(cfg.epochs);
  p.f64(cfg.oversample_probability);
  p.u64(cfg.oversample_pool);
  p.u64(cfg.seed);
  p.f64(cfg.gin_epsilon);
  p.u64(c.epoch);
  p.str(c.rng_state);

  std::vector<double> epsilons;
  if (const auto* gin = std::get_if<gnn::GinParams>(&c.params)) {
    for (const auto& layer : gin->layers) epsilons.push_back(layer.epsilon);
  }
  p.u32(static_cast<std::uint32_t>(epsilons.size()));
  for (double e : epsilons) p.f64(e);

  std::uint32_t tensors = 0;
  gnn::for_each_tensor(c.params, [&](const Matrix&) { ++tensors; });
  p.u32(tensors);
  gnn::for_each_tensor(c.params, [&](const Matrix& m) {
    p.u64(static_cast<std::uint64_t>(m.rows()));
    p.u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) p.f64(m.data()[i]);
  });

  io::ByteWriter out;
  out.bytes(kCheckpointMagic);
  out.u32(kCheckpointVersion);
  out.u64(p.buffer().size());
  std::vector<char> bytes = out.buffer();
  bytes.insert(bytes.end(), p.buffer().begin(), p.buffer().end());
  return bytes;
}

inline Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& source = "checkpoint") {
  io::ByteReader r(std::move(bytes), source);
  if (r.remaining() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    fail(ErrorKind::CorruptFile, source + ": bad magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::VersionMismatch, source + ": version " + std::to_string(version) + ", expected " +
                                         std::to_string(kCheckpointVersion));
  }
  if (r.u64() != r.remaining()) fail(ErrorKind::CorruptFile, source + ": payload length mismatch");

  Checkpoint c;
  TrainConfig& cfg = c.config;
  const std::uint32_t kind = r.u32();
  const std::uint32_t variant = r.u32();
  if (kind > 1 || variant > 2) fail(ErrorKind::CorruptFile, source + ": bad model kind or variant");
  cfg.model_kind = static_cast<gnn::ModelKind>(kind);
  cfg.graph_variant = static_cast<GraphVariant::Kind>(variant);
  cfg.dims.input = r.u64();
  cfg.dims.hidden = r.u64();
  cfg.dims.mlp_hidden = r.u64();
  cfg.learning_rate = r.f64();
  cfg.lr_decay_per_epoch = r.f64();
  cfg.batch_size = r.u64();
  cfg.epochs = r.u64();
  cfg.oversample_probability = r.f64();
  cfg.oversample_pool = r.u64();
  cfg.seed = r.u64();
  cfg.gin_epsilon = r.f64();
  c.epoch = r.u64();
  c.rng_state = r.str();

  std::vector<double> epsilons(r.u32());
  for (double& e : epsilons) e = r.f64();

  // Shapes are rebuilt from the dims, then checked against the file. Reject
  // dims the remaining bytes cannot possibly hold before allocating.
  const auto& d = cfg.dims;
  constexpr std::uint64_t kMaxDim = 1u << 20;
  if (d.input == 0 || d.hidden == 0 || d.mlp_hidden == 0 || d.input > kMaxDim || d.hidden > kMaxDim ||
      d.mlp_hidden > kMaxDim) {
    fail(ErrorKind::CorruptFile, source + ": implausible model dimensions");
  }
  const std::uint64_t values = cfg.model_kind == gnn::ModelKind::Gcn
                                   ? d.input * d.hidden + 2 * d.hidden * d.hidden
                                   : (d.input + 2 * d.hidden) * d.mlp_hidden + 3 * (d.mlp_hidden * d.hidden +
                                                                                    d.mlp_hidden + d.hidden);
  if (values * 8 > r.remaining()) fail(ErrorKind::CorruptFile, source + ": file too short for its dimensions");
  Rng unused(0);
  c.params = gnn::init_params(cfg.model_kind, cfg.dims, unused);
  if (auto* gin = std::get_if<gnn::GinParams>(&c.params)) {
    if (epsilons.size() != gnn::kLayers) fail(ErrorKind::CorruptFile, source + ": missing GIN epsilons");
    for (std::size_t l = 0; l < gnn::kLayers; ++l) gin->layers[l].epsilon = epsilons[l];
  }
  std::uint32_t expected = 0;
  gnn::for_each_tensor(c.params, [&](const Matrix&) { ++expected; });
  if (r.u32() != expected) fail(ErrorKind::CorruptFile, source + ": wrong tensor count");
  gnn::for_each_tensor(c.params, [&](Matrix& m) {
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols())) {
      fail(ErrorKind::CorruptFile, source + ": tensor shape does not match header dims");
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
  });
  if (r.remaining() != 0) fail(ErrorKind::CorruptFile, source + ": trailing bytes");
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  io::write_file(path, encode_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(io::read_file(path), path); }

}  // namespace sgr::train
