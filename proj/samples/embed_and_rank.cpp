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

// Builds a tiny corpus in memory, embeds it with an untrained GCN and ranks
// the other images for each query.

#include <cstdio>
#include <iostream>

#include "sgr/sgr.hpp"

int main() {
  using namespace sgr;

  WordVectorTable words(4);
  words.set("man", {1, 0, 0, 0});
  words.set("horse", {0, 1, 0, 0});
  words.set("dog", {0, 0, 1, 0});
  words.set("riding", {0, 0, 0, 1});
  words.set("brown", {0.5, 0.5, 0, 0});

  const char* lines[] = {
      R"({"image_id": "a", "objects": [{"label": "man"}, {"label": "horse", "attributes": ["brown"]}],
          "relations": [{"subject": 0, "predicate": "riding", "object": 1}]})",
      R"({"image_id": "b", "objects": [{"label": "man"}, {"label": "horse"}],
          "relations": [{"subject": 0, "predicate": "riding", "object": 1}]})",
      R"({"image_id": "c", "objects": [{"label": "dog"}, {"label": "man"}]})",
      R"({"image_id": "d", "objects": [{"label": "dog", "attributes": ["brown"]}]})",
  };
  std::vector<FeatureGraph> graphs;
  for (const char* line : lines) graphs.push_back(to_feature_graph(parse_scene_graph(line), words));

  gnn::ModelDims dims;
  dims.input = words.dimension();
  dims.hidden = 8;
  Rng rng(7, "init");
  const gnn::Params params = gnn::init_params(gnn::ModelKind::Gcn, dims, rng);
  const EmbeddingIndex index = build_index(graphs, params);

  for (const auto& query : index.ids()) {
    std::cout << query << ':';
    for (const auto& item : retrieve(query, RetrievalMode::full(), index)) {
      std::printf(" %s(%.3f)", item.id.c_str(), item.score);
    }
    std::cout << '\n';
  }
}
