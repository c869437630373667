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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "sgr/error.hpp"

namespace sgr::eval {

enum class Decision { Cand1, Cand2, Both, Neither };

inline Decision parse_decision(std::string_view s) {
  if (s == "cand1") return Decision::Cand1;
  if (s == "cand2") return Decision::Cand2;
  if (s == "both") return Decision::Both;
  if (s == "neither") return Decision::Neither;
  fail(ErrorKind::MalformedRecord, "unknown answer '" + std::string(s) + "'");
}

/// Annotator counts for one (query, cand1, cand2) triplet: s1 and s2 chose a
/// candidate, s3 said all three are identical, s4 said neither is relevant.
struct TripletCounts {
  int s1 = 0, s2 = 0, s3 = 0, s4 = 0;

  int total() const { return s1 + s2 + s3 + s4; }
  /// Only triplets with at least two decisive annotators enter the average.
  bool counted() const { return s1 + s2 >= 2; }
  void add(Decision d) {
    switch (d) {
      case Decision::Cand1: ++s1; break;
      case Decision::Cand2: ++s2; break;
      case Decision::Both: ++s3; break;
      case Decision::Neither: ++s4; break;
    }
  }
  void remove(Decision d) {
    switch (d) {
      case Decision::Cand1: --s1; break;
      case Decision::Cand2: --s2; break;
      case Decision::Both: --s3; break;
      case Decision::Neither: --s4; break;
    }
  }
  bool operator==(const TripletCounts&) const = default;
};

struct TripletAnnotation {
  std::string query, cand1, cand2;
  TripletCounts counts;
};

/// Agreement of one decision with the annotators of a triplet; nullopt for
/// "neither", which is not scored.
inline std::optional<double> triplet_score(const TripletCounts& c, Decision d) {
  const double total = c.total();
  require(total >= 1, ErrorKind::MalformedRecord, "triplet has no annotations");
  switch (d) {
    case Decision::Cand1: return (c.s1 + 0.5 * c.s3) / total;
    case Decision::Cand2: return (c.s2 + 0.5 * c.s3) / total;
    case Decision::Both: return (0.5 * c.s1 + 0.5 * c.s2 + c.s3) / total;
    case Decision::Neither: return std::nullopt;
  }
  return std::nullopt;
}

/// Mean agreement of an algorithm's decisions over the counted triplets.
/// decisions[t] belongs to triplets[t]; algorithms only answer cand1/cand2.
inline double human_agreement(const std::vector<std::optional<Decision>>& decisions,
                              const std::vector<TripletAnnotation>& triplets) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const auto& tri = triplets[t];
    if (!tri.counts.counted()) continue;
    if (t >= decisions.size() || !decisions[t]) {
      fail(ErrorKind::MissingDecision, "no decision for triplet (" + tri.query + ", " + tri.cand1 + ", " +
                                           tri.cand2 + ")");
    }
    const Decision d = *decisions[t];
    require(d == Decision::Cand1 || d == Decision::Cand2, ErrorKind::Config,
            "algorithm decisions must pick a candidate");
    sum += *triplet_score(tri.counts, d);
    ++n;
  }
  require(n > 0, ErrorKind::EmptySet, "no triplet has two or more decisive annotators");
  return sum / static_cast<double>(n);
}

/// Picks the candidate with the higher similarity; ties go to cand1.
inline Decision decide(double score1, double score2) {
  return score2 > score1 ? Decision::Cand2 : Decision::Cand1;
}

/// Closed-form expectation of human_agreement under uniform random choice.
inline double expected_random_agreement(const std::vector<TripletAnnotation>& triplets) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : triplets) {
    if (!t.counts.counted()) continue;
    const auto& c = t.counts;
    sum += 0.5 * (c.s1 + c.s2 + c.s3) / static_cast<double>(c.total());
    ++n;
  }
  require(n > 0, ErrorKind::EmptySet, "no counted triplets");
  return sum / static_cast<double>(n);
}

/// One annotator's answer to one triplet.
struct RawAnswer {
  std::string annotator;
  std::string query, cand1, cand2;
  Decision answer = Decision::Cand1;
};

using TripletKey = std::tuple<std::string, std::string, std::string>;

/// Sums raw answers into per-triplet counts, ordered by triplet key.
inline std::vector<TripletAnnotation> aggregate(const std::vector<RawAnswer>& answers) {
  std::map<TripletKey, TripletCounts> counts;
  for (const auto& a : answers) counts[{a.query, a.cand1, a.cand2}].add(a.answer);
  std::vector<TripletAnnotation> out;
  for (const auto& [key, c] : counts) out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
  return out;
}

struct InterHumanAgreement {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation across annotators
  std::map<std::string, double> per_annotator;
};

/// Leave-one-out agreement: each answer is scored against the counts of the
/// remaining annotators of that triplet. "neither" answers are skipped, as are
/// triplets not counted on the full annotation or with no other annotator.
inline InterHumanAgreement inter_human_agreement(const std::vector<RawAnswer>& answers) {
  std::map<TripletKey, TripletCounts> full;
  for (const auto& a : answers) full[{a.query, a.cand1, a.cand2}].add(a.answer);
  bool any_shared = false;
  for (const auto& [key, c] : full) any_shared = any_shared || c.total() >= 2;
  require(any_shared, ErrorKind::InsufficientAnnotators, "no triplet has two or more annotators");

  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& a : answers) {
    const TripletCounts& all = full[{a.query, a.cand1, a.cand2}];
    if (!all.counted() || all.total() < 2) continue;
    TripletCounts rest = all;
    rest.remove(a.answer);
    const auto score = triplet_score(rest, a.answer);
    if (!score) continue;
    auto& [sum, n] = acc[a.annotator];
    sum += *score;
    ++n;
  }
  require(!acc.empty(), ErrorKind::InsufficientAnnotators, "no annotator has a scorable answer");

  InterHumanAgreement out;
  for (const auto& [annotator, sn] : acc) {
    out.per_annotator[annotator] = sn.first / static_cast<double>(sn.second);
  }
  for (const auto& [annotator, v] : out.per_annotator) out.mean += v;
  out.mean /= static_cast<double>(out.per_annotator.size());
  if (out.per_annotator.size() > 1) {
    double ss = 0.0;
    for (const auto& [annotator, v] : out.per_annotator) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(out.per_annotator.size() - 1));
  }
  return out;
}

/// Triplet annotation file: JSON lines, either aggregated
/// {"query","cand1","cand2","s1".."s4"} or raw {"annotator",...,"answer"}.
/// Raw lines are returned in `raw` and also aggregated into `triplets`.
struct AnnotationFile {
  std::vector<TripletAnnotation> triplets;
  std::vector<RawAnswer> raw;
};

inline AnnotationFile read_annotations(std::istream& in) {
  AnnotationFile file;
  std::vector<TripletAnnotation> aggregated;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    fail(ErrorKind::MalformedRecord, "annotations line " + std::to_string(line_no) + ": " + why);
  };
  auto str = [&](const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) bad(std::string("missing string '") + key + "'");
    return j[key].get<std::string>();
  };
  auto count = [&](const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0) {
      bad(std::string("'") + key + "' must be a non-negative integer");
    }
    return j[key].get<int>();
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      bad(e.what());
    }
    if (!j.is_object()) bad("record is not an object");
    if (j.contains("answer")) {
      file.raw.push_back({str(j, "annotator"), str(j, "query"), str(j, "cand1"), str(j, "cand2"),
                          parse_decision(str(j, "answer"))});
    } else {
      TripletAnnotation t{str(j, "query"), str(j, "cand1"), str(j, "cand2"),
                          {count(j, "s1"), count(j, "s2"), count(j, "s3"), count(j, "s4")}};
      if (t.counts.total() < 1) bad("triplet has no annotations");
      aggregated.push_back(std::move(t));
    }
  }
  file.triplets = std::move(aggregated);
  if (!file.raw.empty()) {
    auto from_raw = aggregate(file.raw);
    file.triplets.insert(file.triplets.end(), from_raw.begin(), from_raw.end());
  }
  return file;
}

}  // namespace sgr::eval
