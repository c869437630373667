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
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sgr/error.hpp"
#include "sgr/io/binary.hpp"
#include "sgr/linalg.hpp"

namespace sgr::io {

inline constexpr std::string_view kVectorMagic = "SGVEC1";

/// Rows of vectors, each tagged with an image id. Several rows may share an
/// id (e.g. one row per caption).
struct LabeledRows {
  std::vector<std::string> ids;
  Matrix rows;
};

/// Groups rows by id, in order of first appearance.
inline std::vector<std::pair<std::string, std::vector<Vector>>> group_by_id(const LabeledRows& data) {
  std::vector<std::pair<std::string, std::vector<Vector>>> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < data.ids.size(); ++r) {
    auto [it, inserted] = slot.try_emplace(data.ids[r], groups.size());
    if (inserted) groups.emplace_back(data.ids[r], std::vector<Vector>{});
    groups[it->second].second.push_back(data.rows.row(static_cast<Eigen::Index>(r)).transpose());
  }
  return groups;
}

/// "SGVEC1", u32 rows, u32 dim, then rows*dim little-endian f32 row-major.
/// The ids go to `<path>.ids`, one per line.
inline void write_sgvec(const std::string& path, const LabeledRows& data) {
  require(data.ids.size() == static_cast<std::size_t>(data.rows.rows()), ErrorKind::ShapeMismatch,
          "id count differs from row count");
  ByteWriter w;
  w.bytes(kVectorMagic);
  w.u32(static_cast<std::uint32_t>(data.rows.rows()));
  w.u32(static_cast<std::uint32_t>(data.rows.cols()));
  for (Eigen::Index i = 0; i < data.rows.size(); ++i) w.f32(static_cast<float>(data.rows.data()[i]));
  write_file(path, w.buffer());

  std::string ids;
  for (const auto& id : data.ids) {
    require(id.find('\n') == std::string::npos, ErrorKind::MalformedRecord, "image id contains a newline");
    ids += id;
    ids += '\n';
  }
  write_file(path + ".ids", std::vector<char>(ids.begin(), ids.end()));
}

inline LabeledRows read_sgvec(const std::string& path) {
  ByteReader r(read_file(path), path);
  if (r.remaining() < kVectorMagic.size() || r.bytes(kVectorMagic.size()) != kVectorMagic) {
    fail(ErrorKind::CorruptFile, path + ": bad magic");
  }
  const std::uint32_t rows = r.u32();
  const std::uint32_t dim = r.u32();
  if (r.remaining() != static_cast<std::size_t>(rows) * dim * 4) {
    fail(ErrorKind::CorruptFile, path + ": payload length does not match header");
  }
  LabeledRows out;
  out.rows.resize(rows, dim);
  for (Eigen::Index i = 0; i < out.rows.size(); ++i) out.rows.data()[i] = static_cast<double>(r.f32());

  auto in = open_text(path + ".ids");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.ids.push_back(line);
  }
  if (out.ids.size() != rows) {
    fail(ErrorKind::CorruptFile, path + ".ids: expected " + std::to_string(rows) + " ids, found " +
                                     std::to_string(out.ids.size()));
  }
  return out;
}

/// JSON-lines records {"image_id": str, "vectors": [[float, ...], ...]}. A
/// single "vector": [float, ...] is accepted as shorthand.
inline LabeledRows read_vector_jsonl(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  auto bad = [&](const std::string& why) {
    fail(ErrorKind::MalformedRecord, "line " + std::to_string(line_no) + ": " + why);
  };
  auto take_row = [&](const std::string& id, const nlohmann::json& v) {
    if (!v.is_array() || v.empty()) bad("vector must be a non-empty array");
    std::vector<double> row;
    row.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) bad("vector component is not a number");
      row.push_back(x.get<double>());
      if (!std::isfinite(row.back())) bad("non-finite vector component");
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      fail(ErrorKind::DimensionMismatch, "line " + std::to_string(line_no) + ": vector has " +
                                             std::to_string(row.size()) + " components, expected " +
                                             std::to_string(dim));
    }
    ids.push_back(id);
    rows.push_back(std::move(row));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      bad(e.what());
    }
    if (!rec.is_object() || !rec.contains("image_id") || !rec["image_id"].is_string()) {
      bad("record needs a string 'image_id'");
    }
    const std::string id = rec["image_id"].get<std::string>();
    if (auto it = rec.find("vectors"); it != rec.end()) {
      if (!it->is_array() || it->empty()) bad("'vectors' must be a non-empty array");
      for (const auto& v : *it) take_row(id, v);
    } else if (auto single = rec.find("vector"); single != rec.end()) {
      take_row(id, *single);
    } else {
      bad("record has no 'vectors'");
    }
  }
  LabeledRows out;
  out.ids = std::move(ids);
  out.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) out.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return out;
}

/// Dispatches on content: files starting with the SGVEC1 magic are binary,
/// anything else is read as JSON lines.
inline LabeledRows read_vectors(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(ErrorKind::IoError, "cannot open '" + path + "'");
    std::string head(kVectorMagic.size(), '\0');
    probe.read(head.data(), static_cast<std::streamsize>(head.size()));
    if (probe.gcount() == static_cast<std::streamsize>(head.size()) && head == kVectorMagic) return read_sgvec(path);
  }
  auto in = open_text(path);
  try {
    return read_vector_jsonl(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

inline void write_vector_jsonl(std::ostream& out, const std::string& id, const std::vector<Vector>& vectors) {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : vectors) vs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  out << nlohmann::json{{"image_id", id}, {"vectors", vs}}.dump() << '\n';
}

inline std::vector<std::string> read_id_list(const std::string& path) {
  auto in = open_text(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

}  // namespace sgr::io
