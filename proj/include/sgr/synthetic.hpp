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
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgr/error.hpp"
#include "sgr/eval/agreement.hpp"
#include "sgr/linalg.hpp"
#include "sgr/relevance.hpp"
#include "sgr/rng.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/word_vectors.hpp"

namespace sgr::synthetic {

/// A planted corpus with a known latent topic per image.
///
/// Topics come in scenes. All topics of a scene share the same object
/// vocabulary, so object counts alone only identify the scene. Within a
/// scene, an attribute word separates topics into two halves, and which
/// object pairs are linked by relations identifies the exact topic.
/// Predicates are shared by all topics, so relation labels carry no signal
/// on their own. Captions are noisy copies of a one-hot topic direction.
struct CorpusConfig {
  std::size_t images = 600;
  std::size_t train_images = 400;
  std::size_t query_images = 100;
  std::size_t scenes = 5;
  std::size_t word_dim = 300;
  std::size_t caption_dim = 32;
  std::size_t captions_per_image = 5;
  double caption_noise = 0.08;       // per-component std of caption noise
  std::size_t visual_dim = 64;
  double visual_noise = 0.6;
  double object_keep = 0.85;         // chance each scene object is present
  double attribute_rate = 0.3;       // chance an object carries an attribute
  double attribute_fidelity = 0.8;   // chance that attribute is the topic's own
  double relation_keep = 0.9;        // chance each signature pair is linked
  std::size_t max_relations_per_pair = 3;  // linked pairs get 1..max relations
  std::uint64_t seed = 1;
};

inline constexpr std::size_t kTopicsPerScene = 4;
inline constexpr std::size_t kObjectsPerScene = 5;
inline constexpr std::size_t kDistractorObjects = 13;

// Each topic links two disjoint pairs of its scene's five objects; all eight
// pairs are distinct.
inline constexpr std::size_t kSignaturePairs[kTopicsPerScene][2][2] = {
    {{0, 1}, {2, 3}}, {{0, 2}, {1, 4}}, {{0, 3}, {2, 4}}, {{0, 4}, {1, 3}}};

inline const std::vector<std::string>& predicates() {
  static const std::vector<std::string> words{"on", "near"};
  return words;
}

inline std::string object_word(std::size_t scene, std::size_t k) {
  return "obj" + std::to_string(scene) + "x" + std::to_string(k);
}
inline std::string attribute_word(std::size_t scene, std::size_t half) {
  return "attr" + std::to_string(scene) + "x" + std::to_string(half);
}
inline std::string distractor_word(std::size_t k) { return "misc" + std::to_string(k); }

struct Corpus {
  CorpusConfig config;
  std::vector<SceneGraph> graphs;
  std::vector<std::size_t> topics;  // per image
  std::vector<CaptionEmbeddingSet> captions;
  std::vector<std::string> visual_ids;
  Matrix visual_features;
  WordVectorTable words{1};
  std::vector<std::string> train_ids, test_ids, query_ids;

  std::size_t topic_count() const { return config.scenes * kTopicsPerScene; }
};

inline std::vector<std::string> vocabulary(const CorpusConfig& cfg) {
  std::vector<std::string> v;
  for (std::size_t s = 0; s < cfg.scenes; ++s) {
    for (std::size_t k = 0; k < kObjectsPerScene; ++k) v.push_back(object_word(s, k));
    for (std::size_t h = 0; h < 2; ++h) v.push_back(attribute_word(s, h));
  }
  for (std::size_t k = 0; k < kDistractorObjects; ++k) v.push_back(distractor_word(k));
  for (const auto& p : predicates()) v.push_back(p);
  return v;
}

inline SceneGraph make_graph(const std::string& id, std::size_t topic, const CorpusConfig& cfg, Rng& rng) {
  const std::size_t scene = topic / kTopicsPerScene;
  const std::size_t local = topic % kTopicsPerScene;
  const std::size_t half = local / 2;
  SceneGraph sg;
  sg.image_id = id;

  std::vector<long> slot(kObjectsPerScene, -1);
  std::vector<std::size_t> order(kObjectsPerScene);
  for (std::size_t k = 0; k < kObjectsPerScene; ++k) order[k] = k;
  rng.shuffle(order);
  for (std::size_t k : order) {
    if (!rng.bernoulli(cfg.object_keep)) continue;
    slot[k] = static_cast<long>(sg.objects.size());
    SceneObject o{object_word(scene, k), {}};
    if (rng.bernoulli(cfg.attribute_rate)) {
      o.attributes.push_back(attribute_word(scene, rng.bernoulli(cfg.attribute_fidelity) ? half : 1 - half));
    }
    sg.objects.push_back(std::move(o));
  }
  const std::size_t distractors = rng.uniform_index(3);
  for (std::size_t d = 0; d < distractors; ++d) {
    sg.objects.push_back({distractor_word(rng.uniform_index(kDistractorObjects)), {}});
  }
  if (sg.objects.empty()) sg.objects.push_back({object_word(scene, 0), {}});

  const auto& preds = predicates();
  for (const auto& pair : kSignaturePairs[local]) {
    const long a = slot[pair[0]];
    const long b = slot[pair[1]];
    if (a < 0 || b < 0 || !rng.bernoulli(cfg.relation_keep)) continue;
    const std::size_t copies = 1 + rng.uniform_index(cfg.max_relations_per_pair);
    for (std::size_t k = 0; k < copies; ++k) {
      const bool flip = rng.bernoulli(0.5);
      sg.relations.push_back({static_cast<std::size_t>(flip ? b : a), preds[rng.uniform_index(preds.size())],
                              static_cast<std::size_t>(flip ? a : b)});
    }
  }
  return sg;
}

inline Corpus generate(const CorpusConfig& cfg) {
  require(cfg.train_images + cfg.query_images <= cfg.images, ErrorKind::Config,
          "train and query images exceed corpus size");
  require(cfg.caption_dim >= cfg.scenes * kTopicsPerScene, ErrorKind::Config,
          "caption_dim must hold one axis per topic");
  Corpus c;
  c.config = cfg;
  Rng word_rng(cfg.seed, "synthetic-words");
  Rng graph_rng(cfg.seed, "synthetic-graphs");
  Rng caption_rng(cfg.seed, "synthetic-captions");
  Rng visual_rng(cfg.seed, "synthetic-visual");
  Rng split_rng(cfg.seed, "synthetic-split");

  c.words = WordVectorTable(cfg.word_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.word_dim));
  for (const auto& w : vocabulary(cfg)) {
    std::vector<double> v(cfg.word_dim);
    for (double& x : v) x = scale * word_rng.normal();
    c.words.set(w, v);
  }

  const std::size_t topics = c.topic_count();
  c.visual_features.resize(static_cast<Eigen::Index>(cfg.images), static_cast<Eigen::Index>(cfg.visual_dim));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < cfg.images; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img%05zu", i);
    ids.emplace_back(id);
    const std::size_t topic = graph_rng.uniform_index(topics);
    c.topics.push_back(topic);
    c.graphs.push_back(make_graph(id, topic, cfg, graph_rng));

    CaptionEmbeddingSet set{id, {}};
    for (std::size_t k = 0; k < cfg.captions_per_image; ++k) {
      Vector v(static_cast<Eigen::Index>(cfg.caption_dim));
      for (Eigen::Index d = 0; d < v.size(); ++d) v[d] = cfg.caption_noise * caption_rng.normal();
      v[static_cast<Eigen::Index>(topic)] += 1.0;
      set.vectors.push_back(v / v.norm());
    }
    c.captions.push_back(std::move(set));

    // Visual features only know the scene, blurred by noise.
    const std::size_t scene = topic / kTopicsPerScene;
    for (std::size_t d = 0; d < cfg.visual_dim; ++d) {
      const double signal = (d % cfg.scenes == scene) ? 1.0 : 0.0;
      c.visual_features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          signal + cfg.visual_noise * visual_rng.normal();
    }
    c.visual_ids.push_back(id);
  }

  std::vector<std::string> shuffled = ids;
  split_rng.shuffle(shuffled);
  c.train_ids.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(cfg.train_images));
  c.test_ids.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(cfg.train_images), shuffled.end());
  std::sort(c.train_ids.begin(), c.train_ids.end());
  std::sort(c.test_ids.begin(), c.test_ids.end());
  std::vector<std::string> queries = c.test_ids;
  split_rng.shuffle(queries);
  queries.resize(std::min(cfg.query_images, queries.size()));
  std::sort(queries.begin(), queries.end());
  c.query_ids = std::move(queries);
  return c;
}

/// Simulated raw annotator answers on random (query, cand1, cand2) triplets
/// drawn from the query and test splits. An annotator answers "both" when the
/// candidates' relevance to the query is within `tie_margin`, otherwise picks
/// the more relevant one with probability `accuracy`, and sometimes answers
/// "neither".
struct AnnotationConfig {
  std::size_t triplets = 200;
  std::size_t annotators = 5;
  double accuracy = 0.8;
  double tie_margin = 0.05;
  double neither_rate = 0.05;
};

inline std::vector<eval::RawAnswer> simulate_annotations(const Corpus& c, const AnnotationConfig& ac) {
  require(!c.query_ids.empty() && c.test_ids.size() >= 3, ErrorKind::Config, "corpus too small for triplets");
  const RelevanceOracle oracle(c.captions);
  Rng rng(c.config.seed, "synthetic-annotations");
  std::vector<eval::RawAnswer> out;
  for (std::size_t t = 0; t < ac.triplets; ++t) {
    const std::string& q = c.query_ids[rng.uniform_index(c.query_ids.size())];
    std::string a, b;
    do a = c.test_ids[rng.uniform_index(c.test_ids.size())]; while (a == q);
    do b = c.test_ids[rng.uniform_index(c.test_ids.size())]; while (b == q || b == a);
    const double ra = oracle.relevance(q, a);
    const double rb = oracle.relevance(q, b);
    for (std::size_t k = 0; k < ac.annotators; ++k) {
      eval::Decision d;
      if (rng.bernoulli(ac.neither_rate)) {
        d = eval::Decision::Neither;
      } else if (std::abs(ra - rb) < ac.tie_margin) {
        d = eval::Decision::Both;
      } else {
        const bool right = rng.bernoulli(ac.accuracy);
        d = (ra > rb) == right ? eval::Decision::Cand1 : eval::Decision::Cand2;
      }
      out.push_back({"annotator" + std::to_string(k), q, a, b, d});
    }
  }
  return out;
}

inline std::string_view decision_name(eval::Decision d) {
  switch (d) {
    case eval::Decision::Cand1: return "cand1";
    case eval::Decision::Cand2: return "cand2";
    case eval::Decision::Both: return "both";
    case eval::Decision::Neither: return "neither";
  }
  return "neither";
}

/// Writes the corpus plus a ready-to-use run configuration into `dir`.
inline void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) fail(ErrorKind::IoError, "cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("scene_graphs.jsonl");
    for (const auto& g : c.graphs) out << to_json(g).dump() << '\n';
  }
  {
    auto out = open("word_vectors.txt");
    out.precision(17);
    for (const auto& w : vocabulary(c.config)) {
      out << w;
      const double* v = c.words.find(w);
      for (std::size_t d = 0; d < c.words.dimension(); ++d) out << ' ' << v[d];
      out << '\n';
    }
  }
  {
    auto out = open("captions.jsonl");
    out.precision(17);
    for (const auto& s : c.captions) io::write_vector_jsonl(out, s.image_id, s.vectors);
  }
  {
    auto out = open("visual_features.jsonl");
    for (std::size_t i = 0; i < c.visual_ids.size(); ++i) {
      io::write_vector_jsonl(out, c.visual_ids[i], {c.visual_features.row(static_cast<Eigen::Index>(i)).transpose()});
    }
  }
  auto write_ids = [&](const char* name, const std::vector<std::string>& ids) {
    auto out = open(name);
    for (const auto& id : ids) out << id << '\n';
  };
  write_ids("train_ids.txt", c.train_ids);
  write_ids("test_ids.txt", c.test_ids);
  write_ids("query_ids.txt", c.query_ids);
  {
    auto out = open("annotations.jsonl");
    for (const auto& a : simulate_annotations(c, {})) {
      out << nlohmann::json{{"annotator", a.annotator}, {"query", a.query}, {"cand1", a.cand1},
                            {"cand2", a.cand2}, {"answer", decision_name(a.answer)}}
                 .dump()
          << '\n';
    }
  }

  nlohmann::json cfg = {
      {"scene_graphs", "scene_graphs.jsonl"},
      {"word_vectors", "word_vectors.txt"},
      {"word_dim", c.config.word_dim},
      {"captions", "captions.jsonl"},
      {"visual_features", "visual_features.jsonl"},
      {"train_ids", "train_ids.txt"},
      {"test_ids", "test_ids.txt"},
      {"query_ids", "query_ids.txt"},
      {"annotations", "annotations.jsonl"},
      {"output_dir", "out"},
      {"seed", c.config.seed},
  };
  auto out = open("config.json");
  out << cfg.dump(2) << '\n';
}

}  // namespace sgr::synthetic
