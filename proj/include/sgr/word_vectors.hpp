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

#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sgr/error.hpp"
#include "sgr/linalg.hpp"

namespace sgr {

/// Token -> fixed-length vector lookup (GloVe text format).
class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dimension) : dimension_(dimension) {
    require(dimension > 0, ErrorKind::DimensionMismatch, "word vector dimension must be positive");
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }

  /// Inserts or replaces the vector for `token`.
  void set(const std::string& token, const std::vector<double>& values) {
    require(values.size() == dimension_, ErrorKind::DimensionMismatch,
            "token '" + token + "' has " + std::to_string(values.size()) + " values, expected " +
                std::to_string(dimension_));
    for (double v : values) {
      require(std::isfinite(v), ErrorKind::ParseError, "token '" + token + "' has a non-finite component");
    }
    auto [it, inserted] = index_.try_emplace(token, rows_.size() / dimension_);
    if (inserted) {
      rows_.insert(rows_.end(), values.begin(), values.end());
    } else {
      std::copy(values.begin(), values.end(), rows_.begin() + it->second * dimension_);
    }
  }

  /// Pointer to `dimension()` values, or nullptr when the token is unknown.
  const double* find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? nullptr : rows_.data() + it->second * dimension_;
  }

  bool contains(std::string_view token) const { return find(token) != nullptr; }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> rows_;
};

/// Parses `token v_1 ... v_d` lines. A repeated token keeps its last vector.
inline WordVectorTable load_word_vectors(std::istream& in, std::size_t dimension) {
  WordVectorTable table(dimension);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    auto next_field = [&rest]() -> std::string_view {
      std::size_t b = 0;
      while (b < rest.size() && std::isspace(static_cast<unsigned char>(rest[b]))) ++b;
      std::size_t e = b;
      while (e < rest.size() && !std::isspace(static_cast<unsigned char>(rest[e]))) ++e;
      std::string_view field = rest.substr(b, e - b);
      rest.remove_prefix(e);
      return field;
    };
    std::string_view token = next_field();
    if (token.empty()) continue;
    values.clear();
    for (std::string_view f = next_field(); !f.empty(); f = next_field()) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad component '" +
                                        std::string(f) + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dimension) {
      fail(ErrorKind::DimensionMismatch, "line " + std::to_string(line_no) + ": token '" +
                                             std::string(token) + "' has " +
                                             std::to_string(values.size()) + " values, expected " +
                                             std::to_string(dimension));
    }
    table.set(std::string(token), values);
  }
  return table;
}

/// Lowercases and splits on whitespace.
inline std::vector<std::string> label_tokens(std::string_view label) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Mean of the token vectors of `label`; unknown tokens count as zero vectors.
inline Vector embed_label(std::string_view label, const WordVectorTable& table) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(table.dimension()));
  const auto tokens = label_tokens(label);
  if (tokens.empty()) return out;
  for (const auto& t : tokens) {
    if (const double* v = table.find(t)) {
      out += Eigen::Map<const Vector>(v, out.size());
    }
  }
  out /= static_cast<double>(tokens.size());
  return out;
}

}  // namespace sgr
