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

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgr/error.hpp"
#include "sgr/eval/ndcg.hpp"
#include "sgr/feature_graph.hpp"
#include "sgr/gnn/params.hpp"
#include "sgr/retrieval.hpp"
#include "sgr/train/config.hpp"

namespace sgr::cli {

namespace fs = std::filesystem;

/// Everything one run needs. Relative paths in the JSON document are
/// resolved against the directory holding it.
struct RunConfig {
  fs::path scene_graphs;
  fs::path word_vectors;
  std::size_t word_dim = 300;
  fs::path captions;
  std::optional<fs::path> visual_features;
  fs::path train_ids;
  fs::path test_ids;
  fs::path query_ids;
  std::optional<fs::path> annotations;
  fs::path output_dir = "out";
  std::uint64_t seed = 0;
  train::TrainConfig train;
  std::vector<std::size_t> cutoffs = eval::default_cutoffs();
  eval::Gain gain = eval::Gain::Linear;
  RetrievalMode mode = RetrievalMode::two_stage(100);
  std::map<std::string, fs::path> ablation_checkpoints;

  fs::path checkpoint_path(GraphVariant::Kind v) const {
    if (auto it = ablation_checkpoints.find(std::string(to_string(v))); it != ablation_checkpoints.end()) {
      return it->second;
    }
    return output_dir / ("model_" + std::string(to_string(v)) + ".sgck");
  }
  fs::path index_path(GraphVariant::Kind v) const {
    return output_dir / ("index_" + std::string(to_string(v)) + ".sgvec");
  }
  fs::path log_path(GraphVariant::Kind v) const {
    return output_dir / ("train_" + std::string(to_string(v)) + ".log");
  }
  std::string mode_name() const { return mode.kind == RetrievalMode::Kind::Full ? "full" : "two_stage"; }
  fs::path results_path(GraphVariant::Kind v) const {
    return output_dir / ("results_" + std::string(to_string(v)) + "_" + mode_name() + ".tsv");
  }
};

inline RetrievalMode::Kind parse_mode(const std::string& name) {
  if (name == "full") return RetrievalMode::Kind::Full;
  if (name == "two_stage") return RetrievalMode::Kind::TwoStage;
  fail(ErrorKind::Config, "unknown retrieval mode '" + name + "' (expected two_stage or full)");
}

inline std::vector<std::size_t> parse_cutoffs(const std::string& csv) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', start), csv.size());
    const std::string item = csv.substr(start, comma - start);
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      if (v <= 0) fail(ErrorKind::NonPositiveCutoff, "cutoff " + item + " is not positive");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::Config, "bad cutoff '" + item + "'");
    }
    start = comma + 1;
  }
  return out;
}

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::Config, std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Parses and validates the run configuration. Every referenced input file
/// must exist; train and test splits must be disjoint.
inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Config, path.string() + ": config must be a JSON object");

  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  auto required_path = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) fail(ErrorKind::Config, std::string("config needs a '") + key + "' path");
    return resolve(it->get<std::string>());
  };
  auto optional_path = [&](const char* key) -> std::optional<fs::path> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(ErrorKind::Config, std::string("config field '") + key + "' must be a path");
    return resolve(it->get<std::string>());
  };

  RunConfig rc;
  rc.scene_graphs = required_path("scene_graphs");
  rc.word_vectors = required_path("word_vectors");
  rc.word_dim = detail::get_or<std::size_t>(j, "word_dim", 300);
  rc.captions = required_path("captions");
  rc.visual_features = optional_path("visual_features");
  rc.train_ids = required_path("train_ids");
  rc.test_ids = required_path("test_ids");
  rc.query_ids = required_path("query_ids");
  rc.annotations = optional_path("annotations");
  rc.output_dir = resolve(detail::get_or<std::string>(j, "output_dir", "out"));
  rc.seed = detail::get_or<std::uint64_t>(j, "seed", 0);

  const nlohmann::json t = j.value("train", nlohmann::json::object());
  auto& tc = rc.train;
  tc.learning_rate = detail::get_or(t, "learning_rate", tc.learning_rate);
  tc.lr_decay_per_epoch = detail::get_or(t, "lr_decay_per_epoch", tc.lr_decay_per_epoch);
  tc.batch_size = detail::get_or(t, "batch_size", tc.batch_size);
  tc.epochs = detail::get_or(t, "epochs", tc.epochs);
  tc.oversample_probability = detail::get_or(t, "oversample_probability", tc.oversample_probability);
  tc.oversample_pool = detail::get_or(t, "oversample_pool", tc.oversample_pool);
  tc.model_kind = gnn::parse_model_kind(detail::get_or<std::string>(t, "model_kind", "gcn"));
  tc.graph_variant = parse_variant_kind(detail::get_or<std::string>(t, "graph_variant", "full"));
  tc.dims.input = rc.word_dim;
  tc.dims.hidden = detail::get_or(t, "hidden_dim", tc.dims.hidden);
  tc.dims.mlp_hidden = detail::get_or(t, "mlp_hidden_dim", tc.dims.mlp_hidden);
  tc.gin_epsilon = detail::get_or(t, "gin_epsilon", tc.gin_epsilon);

  if (auto it = j.find("cutoffs"); it != j.end()) {
    rc.cutoffs.clear();
    if (!it->is_array() || it->empty()) fail(ErrorKind::Config, "'cutoffs' must be a non-empty array");
    for (const auto& c : *it) {
      if (!c.is_number_integer() || c.get<long long>() <= 0) {
        fail(ErrorKind::NonPositiveCutoff, "cutoffs must be positive integers");
      }
      rc.cutoffs.push_back(c.get<std::size_t>());
    }
  }
  rc.gain = eval::parse_gain(detail::get_or<std::string>(j, "gain", "linear"));
  rc.mode.kind = parse_mode(detail::get_or<std::string>(j, "mode", "two_stage"));
  rc.mode.k = detail::get_or<std::size_t>(j, "k", 100);
  if (auto it = j.find("ablation"); it != j.end()) {
    if (!it->is_object()) fail(ErrorKind::Config, "'ablation' must map variant names to checkpoint paths");
    for (const auto& [name, p] : it->items()) {
      parse_variant_kind(name);
      if (!p.is_string()) fail(ErrorKind::Config, "ablation checkpoint for '" + name + "' must be a path");
      rc.ablation_checkpoints[name] = resolve(p.get<std::string>());
    }
  }
  return rc;
}

/// Checks that input files exist before any work starts.
inline void check_inputs(const RunConfig& rc) {
  std::vector<fs::path> inputs{rc.scene_graphs, rc.word_vectors, rc.captions, rc.train_ids, rc.test_ids, rc.query_ids};
  if (rc.visual_features) inputs.push_back(*rc.visual_features);
  if (rc.annotations) inputs.push_back(*rc.annotations);
  for (const auto& p : inputs) {
    if (!fs::is_regular_file(p)) fail(ErrorKind::IoError, "input file '" + p.string() + "' does not exist");
  }
}

}  // namespace sgr::cli
