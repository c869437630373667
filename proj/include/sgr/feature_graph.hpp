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

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/linalg.hpp"
#include "sgr/rng.hpp"
#include "sgr/scene_graph.hpp"
#include "sgr/word_vectors.hpp"

namespace sgr {

enum class NodeKind : std::uint8_t { Object, Attribute, Relation };

/// Which parts of the scene graph survive conversion (ablations).
struct GraphVariant {
  enum class Kind : std::uint8_t { Full, NoAttributes, RandomRelations };

  Kind kind = Kind::Full;
  std::uint64_t seed = 0;  // only read by RandomRelations

  static GraphVariant full() { return {}; }
  static GraphVariant no_attributes() { return {Kind::NoAttributes, 0}; }
  static GraphVariant random_relations(std::uint64_t seed) { return {Kind::RandomRelations, seed}; }

  bool operator==(const GraphVariant&) const = default;
};

constexpr std::string_view to_string(GraphVariant::Kind kind) {
  switch (kind) {
    case GraphVariant::Kind::Full: return "full";
    case GraphVariant::Kind::NoAttributes: return "no_attributes";
    case GraphVariant::Kind::RandomRelations: return "random_relations";
  }
  return "?";
}

inline GraphVariant::Kind parse_variant_kind(std::string_view name) {
  if (name == "full") return GraphVariant::Kind::Full;
  if (name == "no_attributes") return GraphVariant::Kind::NoAttributes;
  if (name == "random_relations") return GraphVariant::Kind::RandomRelations;
  fail(ErrorKind::Config, "unknown graph variant '" + std::string(name) + "'");
}

using Edge = std::pair<std::size_t, std::size_t>;

/// GNN input: objects, attributes and relations all become nodes, linked by
/// undirected edges. Edges are stored once with first < second.
struct FeatureGraph {
  std::string image_id;
  Matrix node_features;
  std::vector<Edge> edges;
  std::vector<NodeKind> node_kinds;

  std::size_t node_count() const { return node_kinds.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(node_features.cols()); }
};

/// Throws ShapeMismatch if any structural invariant of `g` is broken.
inline void check_invariants(const FeatureGraph& g) {
  const std::size_t n = g.node_count();
  require(n >= 1, ErrorKind::ShapeMismatch, "feature graph has no nodes");
  require(static_cast<std::size_t>(g.node_features.rows()) == n, ErrorKind::ShapeMismatch,
          "feature rows differ from node count");
  require(g.node_features.allFinite(), ErrorKind::ShapeMismatch, "non-finite node feature");
  std::vector<std::size_t> degree(n, 0);
  std::vector<Edge> sorted = g.edges;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::ShapeMismatch,
          "duplicate edge");
  for (const auto& [u, v] : g.edges) {
    require(u < v && v < n, ErrorKind::ShapeMismatch, "edge is a self loop, unordered or out of range");
    ++degree[u];
    ++degree[v];
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (g.node_kinds[v] == NodeKind::Attribute) {
      require(degree[v] == 1, ErrorKind::ShapeMismatch, "attribute node degree != 1");
    } else if (g.node_kinds[v] == NodeKind::Relation) {
      require(degree[v] == 1 || degree[v] == 2, ErrorKind::ShapeMismatch, "relation node degree not in {1,2}");
    }
  }
}

/// Node layout: objects in input order, then each object's attributes
/// (object-major), then relations in input order.
inline FeatureGraph to_feature_graph(const SceneGraph& sg, const WordVectorTable& table,
                                     GraphVariant variant = GraphVariant::full()) {
  validate(sg);
  const bool keep_attributes = variant.kind != GraphVariant::Kind::NoAttributes;
  const std::size_t n_obj = sg.objects.size();
  const std::size_t n_attr = keep_attributes ? sg.attribute_count() : 0;
  const std::size_t n = n_obj + n_attr + sg.relations.size();

  FeatureGraph g;
  g.image_id = sg.image_id;
  g.node_features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(table.dimension()));
  g.node_kinds.reserve(n);
  g.edges.reserve(n_attr + 2 * sg.relations.size());

  auto add_node = [&](std::string_view label, NodeKind kind) {
    const auto row = static_cast<Eigen::Index>(g.node_kinds.size());
    g.node_features.row(row) = embed_label(label, table).transpose();
    g.node_kinds.push_back(kind);
    return static_cast<std::size_t>(row);
  };
  auto add_edge = [&](std::size_t a, std::size_t b) { g.edges.emplace_back(std::min(a, b), std::max(a, b)); };

  for (const auto& o : sg.objects) add_node(o.label, NodeKind::Object);
  if (keep_attributes) {
    for (std::size_t i = 0; i < n_obj; ++i) {
      for (const auto& a : sg.objects[i].attributes) add_edge(i, add_node(a, NodeKind::Attribute));
    }
  }

  Rng rng(variant.seed, sg.image_id);
  for (const auto& rel : sg.relations) {
    std::size_t subject = rel.subject;
    std::size_t object = rel.object;
    if (variant.kind == GraphVariant::Kind::RandomRelations) {
      // Self relations stay self relations (and distinct endpoints stay
      // distinct) so the edge count is preserved.
      subject = rng.uniform_index(n_obj);
      if (rel.is_self()) {
        object = subject;
      } else {
        object = rng.uniform_index(n_obj - 1);
        if (object >= subject) ++object;
      }
    }
    const std::size_t node = add_node(rel.predicate, NodeKind::Relation);
    add_edge(subject, node);
    if (object != subject) add_edge(node, object);
  }
  return g;
}

}  // namespace sgr
