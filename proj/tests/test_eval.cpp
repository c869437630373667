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

#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sgr/sgr.hpp"

namespace sgr {
namespace {

using eval::Decision;
using eval::TripletAnnotation;
using eval::TripletCounts;

TEST(Ndcg, HandExample) {
  const std::vector<double> ranked{2, 3, 0}, pool{3, 2, 0};
  EXPECT_NEAR(eval::ndcg(ranked, pool, 3), 0.91340, 1e-4);
  EXPECT_NEAR(eval::ndcg(ranked, pool, 3), (2.0 + 3.0 / std::log2(3.0)) / (3.0 + 2.0 / std::log2(3.0)), 1e-15);
}

TEST(Ndcg, PerfectOrderClippingAndErrors) {
  const std::vector<double> pool{0.9, 0.5, 0.1, -0.3};
  for (std::size_t k = 1; k <= 6; ++k) EXPECT_EQ(eval::ndcg(pool, pool, k), 1.0);
  const std::vector<double> negative{-0.1, -0.5};
  EXPECT_EQ(eval::ndcg(negative, negative, 2), 0.0);
  EXPECT_EQ(eval::ndcg(std::vector<double>{0.4}, std::vector<double>{0.4}, 10), 1.0);
  try {
    eval::ndcg(pool, pool, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveCutoff);
  }
}

TEST(Ndcg, ExponentialGainSwitch) {
  const std::vector<double> ranked{2, 3, 0}, pool{3, 2, 0};
  const double expected = (3.0 + 7.0 / std::log2(3.0)) / (7.0 + 3.0 / std::log2(3.0));
  EXPECT_NEAR(eval::ndcg(ranked, pool, 3, eval::Gain::Exponential), expected, 1e-15);
  EXPECT_EQ(eval::parse_gain("linear"), eval::Gain::Linear);
  EXPECT_THROW(eval::parse_gain("cubic"), Error);
}

TEST(NdcgProperty, BoundedMonotoneAndMatchesReference) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> rel(n);
    for (double& r : rel) r = rng.uniform(-0.5, 1.0);
    std::vector<double> ranked = rel;
    rng.shuffle(ranked);
    const std::size_t cutoff = 1 + rng.uniform_index(n + 3);
    const double v = eval::ndcg(ranked, rel, cutoff);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
    EXPECT_NEAR(v, testing::reference_ndcg(ranked, rel, cutoff), 1e-12);
    // Moving a higher gain to the better of two ranks never lowers nDCG.
    const std::size_t a = rng.uniform_index(n), b = rng.uniform_index(n);
    const std::size_t hi = std::min(a, b), lo = std::max(a, b);
    if (std::max(ranked[lo], 0.0) > std::max(ranked[hi], 0.0)) {
      auto swapped = ranked;
      std::swap(swapped[hi], swapped[lo]);
      EXPECT_GE(eval::ndcg(swapped, rel, cutoff), v - 1e-12);
    }
  }
}

std::vector<CaptionEmbeddingSet> topic_sets(Rng& rng, std::size_t n, std::size_t topics) {
  std::vector<CaptionEmbeddingSet> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v = 0.3 * testing::random_unit(rng, topics);
    v[static_cast<Eigen::Index>(rng.uniform_index(topics))] += 1.0;
    out.push_back({"i" + std::to_string(100 + i), {v / v.norm()}});
  }
  return out;
}

TEST(EvaluateRetrieval, OracleRankingIsPerfect) {
  Rng rng(2);
  const auto sets = topic_sets(rng, 80, 6);
  const RelevanceOracle oracle(sets);
  const auto& pool = oracle.ids();
  const std::vector<std::string> queries(pool.begin(), pool.begin() + 20);
  const auto r = eval::evaluate_retrieval(relevance_rankings(candidate_lists(queries, pool, RetrievalMode::full()), oracle),
                                          oracle, pool);
  ASSERT_EQ(r.size(), 6u);
  for (double v : r) EXPECT_EQ(v, 1.0);
}

TEST(EvaluateRetrieval, SingleCandidateAndErrors) {
  Vector a(2), b(2);
  a << 1, 0;
  b << 0.6, 0.8;
  const RelevanceOracle oracle({{"q", {a}}, {"c", {b}}});
  const auto r = eval::evaluate_retrieval({{"q", {"c"}}}, oracle, {"q", "c"}, {1, 5});
  EXPECT_EQ(r, (std::vector<double>{1.0, 1.0}));
  try {
    eval::evaluate_retrieval({{"q", {"zzz"}}}, oracle, {"q", "c"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownId);
  }
  EXPECT_THROW(eval::evaluate_retrieval({{"q", {"q"}}}, oracle, {"q", "c"}), Error);
}

TEST(EvaluateRetrieval, RandomRankingsMatchMonteCarlo) {
  Rng rng(3);
  const auto sets = topic_sets(rng, 120, 5);
  const RelevanceOracle oracle(sets);
  const auto& pool = oracle.ids();
  const std::vector<std::string> queries(pool.begin(), pool.begin() + 40);
  Rng a(10, "baseline"), b(11, "mc");
  const auto got = eval::evaluate_retrieval(random_rankings(candidate_lists(queries, pool, RetrievalMode::full()), a),
                                            oracle, pool, {10});
  const double mc = testing::monte_carlo_random_ndcg(queries, pool, oracle, 10, 400, b);
  EXPECT_NEAR(got[0], mc, 0.05);
  // Averaging many random rankings converges to the same value.
  double mean = 0.0;
  for (int r = 0; r < 25; ++r) {
    mean += eval::evaluate_retrieval(random_rankings(candidate_lists(queries, pool, RetrievalMode::full()), a), oracle,
                                     pool, {10})[0];
  }
  EXPECT_NEAR(mean / 25.0, mc, 0.01);
}

TEST(HumanAgreement, FormulaExamples) {
  EXPECT_EQ(*eval::triplet_score({3, 1, 0, 0}, Decision::Cand1), 0.75);
  EXPECT_EQ(*eval::triplet_score({1, 1, 2, 0}, Decision::Cand2), 0.5);
  const std::vector<TripletAnnotation> triplets{{"q", "a", "b", {1, 0, 3, 0}}, {"q", "c", "d", {2, 0, 0, 0}}};
  EXPECT_EQ(eval::human_agreement({std::nullopt, Decision::Cand1}, triplets), 1.0);
  try {
    eval::human_agreement({Decision::Cand1, std::nullopt}, triplets);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingDecision);
  }
  EXPECT_THROW(eval::human_agreement({Decision::Cand1}, {{"q", "a", "b", {1, 0, 3, 0}}}), Error);
}

TEST(HumanAgreement, RandomChoiceExamples) {
  EXPECT_EQ(*eval::triplet_score({0, 0, 2, 0}, Decision::Cand1), 0.5);
  EXPECT_EQ(*eval::triplet_score({0, 0, 2, 0}, Decision::Cand2), 0.5);
  const TripletCounts c{4, 0, 0, 0};
  EXPECT_EQ(0.5 * *eval::triplet_score(c, Decision::Cand1) + 0.5 * *eval::triplet_score(c, Decision::Cand2), 0.5);
}

std::vector<TripletAnnotation> random_triplets(Rng& rng, std::size_t n) {
  std::vector<TripletAnnotation> out;
  for (std::size_t t = 0; t < n; ++t) {
    TripletCounts c{static_cast<int>(rng.uniform_index(5)), static_cast<int>(rng.uniform_index(5)),
                    static_cast<int>(rng.uniform_index(3)), static_cast<int>(rng.uniform_index(2))};
    if (c.total() == 0) c.s1 = 1;
    out.push_back({"q" + std::to_string(t), "a", "b", c});
  }
  return out;
}

TEST(HumanAgreementProperty, BoundsAndMajority) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto triplets = random_triplets(rng, 30);
    for (const auto& t : triplets) {
      const double both = *eval::triplet_score(t.counts, Decision::Cand1) + *eval::triplet_score(t.counts, Decision::Cand2);
      EXPECT_NEAR(both, static_cast<double>(t.counts.s1 + t.counts.s2 + t.counts.s3) / t.counts.total(), 1e-15);
      EXPECT_LE(both, 1.0);
    }
    std::vector<std::optional<Decision>> majority;
    for (const auto& t : triplets) majority.push_back(t.counts.s1 >= t.counts.s2 ? Decision::Cand1 : Decision::Cand2);
    const double best = eval::human_agreement(majority, triplets);
    for (int k = 0; k < 20; ++k) {
      Rng drng(static_cast<std::uint64_t>(k));
      const double v = eval::human_agreement(eval::random_decisions(drng, triplets.size()), triplets);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_LE(v, best + 1e-15);
    }
  }
}

TEST(RandomBaseline, ExpectedAgreementMatchesResampling) {
  Rng rng(5);
  const auto triplets = random_triplets(rng, 200);
  const double analytic = eval::expected_random_agreement(triplets);
  Rng drng(6, "baseline");
  double sum = 0.0;
  const int resamples = 10000;
  for (int r = 0; r < resamples; ++r) sum += eval::human_agreement(eval::random_decisions(drng, triplets.size()), triplets);
  EXPECT_NEAR(sum / resamples, analytic, 0.01);
}

eval::RawAnswer answer(const std::string& who, Decision d, const std::string& q = "q") {
  return {who, q, "a", "b", d};
}

TEST(InterHuman, Examples) {
  // Held-out annotator chose cand1; the rest are (2,1,0,0).
  {
    const auto r = eval::inter_human_agreement({answer("h", Decision::Cand1), answer("x", Decision::Cand1),
                                                answer("y", Decision::Cand1), answer("z", Decision::Cand2)});
    EXPECT_EQ(r.per_annotator.at("h"), 2.0 / 3.0);
  }
  // Held-out chose both; the rest are (2,1,1,0).
  {
    const auto r = eval::inter_human_agreement({answer("h", Decision::Both), answer("w", Decision::Cand1),
                                                answer("x", Decision::Cand1), answer("y", Decision::Cand2),
                                                answer("z", Decision::Both)});
    EXPECT_EQ(r.per_annotator.at("h"), 0.625);
  }
  // Held-out chose neither on one triplet: that triplet is excluded.
  {
    std::vector<eval::RawAnswer> raw{answer("h", Decision::Neither, "q1"), answer("x", Decision::Cand1, "q1"),
                                     answer("y", Decision::Cand1, "q1"),   answer("h", Decision::Cand1, "q2"),
                                     answer("x", Decision::Cand1, "q2"),   answer("y", Decision::Cand2, "q2")};
    const auto r = eval::inter_human_agreement(raw);
    EXPECT_EQ(r.per_annotator.at("h"), 0.5);
  }
}

TEST(InterHuman, MeanStddevAndErrors) {
  const auto r = eval::inter_human_agreement({answer("a", Decision::Cand1), answer("b", Decision::Cand1),
                                              answer("c", Decision::Cand2)});
  // a: rest (1,1) -> 0.5; b: 0.5; c: rest (2,0) -> 0.
  EXPECT_EQ(r.per_annotator.at("c"), 0.0);
  EXPECT_NEAR(r.mean, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.stddev, std::sqrt((2 * (1.0 / 6) * (1.0 / 6) + (1.0 / 3) * (1.0 / 3)) / 2.0), 1e-15);
  try {
    eval::inter_human_agreement({answer("a", Decision::Cand1, "q1"), answer("b", Decision::Cand1, "q2")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientAnnotators);
  }
}

TEST(Annotations, ParseBothLayouts) {
  std::istringstream in(R"({"query":"q","cand1":"a","cand2":"b","s1":3,"s2":1,"s3":0,"s4":1}

{"annotator":"u1","query":"q2","cand1":"c","cand2":"d","answer":"both"}
{"annotator":"u2","query":"q2","cand1":"c","cand2":"d","answer":"cand2"}
)");
  const auto f = eval::read_annotations(in);
  ASSERT_EQ(f.triplets.size(), 2u);
  EXPECT_EQ(f.triplets[0].counts, (TripletCounts{3, 1, 0, 1}));
  EXPECT_EQ(f.triplets[1].counts, (TripletCounts{0, 1, 1, 0}));
  EXPECT_EQ(f.raw.size(), 2u);
  std::istringstream bad(R"({"query":"q","cand1":"a","cand2":"b","s1":-1,"s2":0,"s3":0,"s4":0})");
  EXPECT_THROW(eval::read_annotations(bad), Error);
  std::istringstream bad_answer(R"({"annotator":"u","query":"q","cand1":"a","cand2":"b","answer":"maybe"})");
  EXPECT_THROW(eval::read_annotations(bad_answer), Error);
}

SceneGraph with_objects(const std::vector<std::string>& labels) {
  SceneGraph sg{"x", {}, {}};
  for (const auto& l : labels) sg.objects.push_back({l, {}});
  return sg;
}

TEST(ObjectCount, Examples) {
  EXPECT_NEAR(eval::object_count_similarity(with_objects({"man", "dog"}), with_objects({"dog", "man"})), 1.0, 1e-15);
  EXPECT_EQ(eval::object_count_similarity(with_objects({"man"}), with_objects({"tree"})), 0.0);
  EXPECT_NEAR(eval::object_count_similarity(with_objects({"man", "man", "dog"}), with_objects({"man", "dog"})),
              3.0 / (std::sqrt(5.0) * std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(3.0 / (std::sqrt(5.0) * std::sqrt(2.0)), 0.94868, 1e-5);
  EXPECT_EQ(eval::object_count_similarity(eval::ObjectCounts{}, eval::ObjectCounts{{"a", 1}}), 0.0);
}

TEST(ObjectCountProperty, SymmetricAndScaleOnly) {
  Rng rng(7);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int t = 0; t < 300; ++t) {
    eval::ObjectCounts x, y;
    for (const auto& w : vocab) {
      if (rng.bernoulli(0.6)) x[w] = static_cast<double>(1 + rng.uniform_index(3));
      if (rng.bernoulli(0.6)) y[w] = static_cast<double>(1 + rng.uniform_index(3));
    }
    if (x.empty() || y.empty()) continue;
    const double s = eval::object_count_similarity(x, y);
    EXPECT_EQ(s, eval::object_count_similarity(y, x));
    bool proportional = x.size() == y.size();
    if (proportional) {
      const double ratio = y.begin()->second / x.begin()->second;
      for (const auto& [w, c] : x) proportional = proportional && y.count(w) && y.at(w) == ratio * c;
    }
    if (proportional) {
      EXPECT_NEAR(s, 1.0, 1e-12);
    } else {
      EXPECT_LT(s, 1.0 - 1e-9);
    }
    eval::ObjectCounts scaled = x;
    for (auto& [w, c] : scaled) c *= 3.0;
    EXPECT_NEAR(eval::object_count_similarity(x, scaled), 1.0, 1e-12);
  }
}

TEST(Baselines, RandomRankingIsSeededPermutation) {
  std::vector<std::string> c{"a", "b", "c", "d", "e"};
  Rng a(1, "baseline"), b(1, "baseline");
  const auto r1 = eval::random_ranking(a, c);
  EXPECT_EQ(r1, eval::random_ranking(b, c));
  auto sorted = r1;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, c);
}

TEST(Decisions, FromScoresAndResults) {
  const std::vector<TripletAnnotation> t{{"q", "a", "b", {2, 0, 0, 0}}, {"q", "c", "a", {0, 2, 0, 0}},
                                         {"q", "x", "y", {1, 1, 0, 0}}};
  const std::map<std::string, std::vector<RankedItem>> results{{"q", {{"a", 0.9}, {"b", 0.2}, {"c", 0.1}}}};
  const auto d = result_decisions(t, results);
  EXPECT_EQ(d[0], Decision::Cand1);
  EXPECT_EQ(d[1], Decision::Cand2);
  EXPECT_FALSE(d[2].has_value());
  EXPECT_EQ(eval::decide(0.3, 0.3), Decision::Cand1);
}

}  // namespace
}  // namespace sgr
