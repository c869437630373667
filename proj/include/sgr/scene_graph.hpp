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
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgr/error.hpp"

namespace sgr {

struct SceneObject {
  std::string label;
  std::vector<std::string> attributes;

  bool operator==(const SceneObject&) const = default;
};

struct SceneRelation {
  std::size_t subject = 0;
  std::string predicate;
  std::size_t object = 0;

  bool is_self() const { return subject == object; }
  bool operator==(const SceneRelation&) const = default;
};

/// Symbolic image content: labeled objects with attributes and
/// subject-predicate-object relations between them.
struct SceneGraph {
  std::string image_id;
  std::vector<SceneObject> objects;
  std::vector<SceneRelation> relations;

  std::size_t attribute_count() const {
    std::size_t n = 0;
    for (const auto& o : objects) n += o.attributes.size();
    return n;
  }

  bool operator==(const SceneGraph&) const = default;
};

/// Throws unless every relation endpoint is a valid object index and the
/// object list is non-empty.
inline void validate(const SceneGraph& sg) {
  require(!sg.objects.empty(), ErrorKind::EmptyGraph,
          "scene graph '" + sg.image_id + "' has no objects");
  for (std::size_t r = 0; r < sg.relations.size(); ++r) {
    const auto& rel = sg.relations[r];
    if (rel.subject >= sg.objects.size() || rel.object >= sg.objects.size()) {
      fail(ErrorKind::IndexOutOfRange,
           "scene graph '" + sg.image_id + "' relation " + std::to_string(r) +
               " references object " +
               std::to_string(std::max(rel.subject, rel.object)) + " of " +
               std::to_string(sg.objects.size()));
    }
  }
}

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::MalformedRecord, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string word_field(const nlohmann::json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    fail(ErrorKind::MalformedRecord, std::string("field '") + key + "' must be a non-empty string");
  }
  return v.get<std::string>();
}

inline std::size_t index_field(const nlohmann::json& j, const char* key) {
  const auto& v = member(j, key);
  if (!v.is_number_integer()) {
    fail(ErrorKind::MalformedRecord, std::string("field '") + key + "' must be an integer");
  }
  if (v.get<long long>() < 0) {
    fail(ErrorKind::IndexOutOfRange, std::string("field '") + key + "' is negative");
  }
  return v.get<std::size_t>();
}

}  // namespace detail

/// Builds a SceneGraph from one decoded record. "attributes" and "relations"
/// may be omitted and then default to empty.
inline SceneGraph parse_scene_graph_json(const nlohmann::json& record) {
  if (!record.is_object()) fail(ErrorKind::MalformedRecord, "record is not an object");
  SceneGraph sg;
  const auto& id = detail::member(record, "image_id");
  if (!id.is_string()) fail(ErrorKind::MalformedRecord, "field 'image_id' must be a string");
  sg.image_id = id.get<std::string>();

  const auto& objects = detail::member(record, "objects");
  if (!objects.is_array()) fail(ErrorKind::MalformedRecord, "field 'objects' must be an array");
  for (const auto& o : objects) {
    if (!o.is_object()) fail(ErrorKind::MalformedRecord, "object entry is not an object");
    SceneObject obj;
    obj.label = detail::word_field(o, "label");
    if (auto it = o.find("attributes"); it != o.end()) {
      if (!it->is_array()) fail(ErrorKind::MalformedRecord, "field 'attributes' must be an array");
      for (const auto& a : *it) {
        if (!a.is_string() || a.get_ref<const std::string&>().empty()) {
          fail(ErrorKind::MalformedRecord, "attributes must be non-empty strings");
        }
        obj.attributes.push_back(a.get<std::string>());
      }
    }
    sg.objects.push_back(std::move(obj));
  }

  if (auto it = record.find("relations"); it != record.end()) {
    if (!it->is_array()) fail(ErrorKind::MalformedRecord, "field 'relations' must be an array");
    for (const auto& r : *it) {
      if (!r.is_object()) fail(ErrorKind::MalformedRecord, "relation entry is not an object");
      SceneRelation rel;
      rel.subject = detail::index_field(r, "subject");
      rel.predicate = detail::word_field(r, "predicate");
      rel.object = detail::index_field(r, "object");
      sg.relations.push_back(std::move(rel));
    }
  }
  validate(sg);
  return sg;
}

inline SceneGraph parse_scene_graph(std::string_view line) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::MalformedRecord, e.what());
  }
  return parse_scene_graph_json(record);
}

inline nlohmann::json to_json(const SceneGraph& sg) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : sg.objects) {
    objects.push_back({{"label", o.label}, {"attributes", o.attributes}});
  }
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& r : sg.relations) {
    relations.push_back({{"subject", r.subject}, {"predicate", r.predicate}, {"object", r.object}});
  }
  return {{"image_id", sg.image_id}, {"objects", objects}, {"relations", relations}};
}

/// Reads a JSON-lines scene-graph file. Blank lines are skipped; errors are
/// re-raised with the 1-based line number.
inline std::vector<SceneGraph> read_scene_graphs(std::istream& in) {
  std::vector<SceneGraph> graphs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      graphs.push_back(parse_scene_graph(line));
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return graphs;
}

}  // namespace sgr
