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

// Acceptance runner: one PASS/FAIL line per criterion. Tolerances are fixed
// below; the process exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sgr/sgr.hpp"

namespace fs = std::filesystem;
using namespace sgr;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kForwardTolerance = 1e-6;
constexpr double kNdcgExampleTolerance = 1e-4;
constexpr double kMonteCarloBand = 0.05;
constexpr double kAblationSlack = 0.005;
constexpr double kRerankBudgetMs = 50.0;
constexpr double kEmbedBudgetS = 30.0;
constexpr double kPermutationTolerance = 1e-9;
constexpr double kSelfSimilarityTolerance = 1e-6;
constexpr std::size_t kSeeds = 5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome gradient_correctness() {
  Timer timer;
  Outcome o;
  double worst = 0.0;
  std::size_t checked = 0, kinks = 0;
  gnn::ModelDims dims;
  dims.input = 12;
  dims.hidden = 12;
  dims.mlp_hidden = 16;
  for (auto kind : {gnn::ModelKind::Gcn, gnn::ModelKind::Gin}) {
    Rng rng(1000 + static_cast<int>(kind));
    for (int t = 0; t < 20; ++t) {
      const auto a = testing::random_feature_graph(rng, 3 + rng.uniform_index(13), dims.input, 0.3, "a");
      const auto b = testing::random_feature_graph(rng, 3 + rng.uniform_index(13), dims.input, 0.3, "b");
      const auto params = gnn::init_params(kind, dims, rng);
      const auto r = testing::gradient_check(a, b, params, rng.uniform(-1.0, 1.0), rng, 0, 1e-5);
      worst = std::max(worst, r.max_rel_error);
      checked += r.checked;
      kinks += r.skipped_kinks;
      if (r.checked == 0) o.pass = false;
    }
  }
  const double secs = timer.seconds();
  o.pass = o.pass && worst < kGradTolerance && secs < 60.0;
  o.detail = fmt("40 instances, %zu coordinates checked (%zu skipped at ReLU kinks), max rel error %.2e < %.0e, %.1f s",
                 checked, kinks, worst, kGradTolerance, secs);
  return o;
}

// 2 -------------------------------------------------------------------------

Outcome forward_oracle() {
  Rng rng(2);
  double worst = 0.0;
  gnn::ModelDims dims;
  dims.input = 10;
  dims.hidden = 16;
  dims.mlp_hidden = 20;
  for (int t = 0; t < 50; ++t) {
    const auto g = testing::random_feature_graph(rng, 1 + rng.uniform_index(50), dims.input,
                                                 rng.uniform(0.02, 0.5));
    for (auto kind : {gnn::ModelKind::Gcn, gnn::ModelKind::Gin}) {
      const auto p = gnn::init_params(kind, dims, rng);
      const Vector diff = gnn::embed(g, p).vector - testing::dense_embedding(g, p);
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
  }
  return {worst < kForwardTolerance,
          fmt("50 graphs x {GCN, GIN}, max abs difference %.2e < %.0e", worst, kForwardTolerance)};
}

// 3 -------------------------------------------------------------------------

Outcome exact_search() {
  Rng rng(3);
  std::size_t mismatches = 0, queries = 0;
  for (int corpus = 0; corpus < 100; ++corpus) {
    const std::size_t n = 2 + rng.uniform_index(499);
    const std::size_t d = 1 + rng.uniform_index(8);
    std::vector<std::string> ids;
    Matrix feats(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Matrix emb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(fmt("im%06zu", rng.uniform_index(1000000)) + "_" + std::to_string(i));
      // Coarse integer features and repeated embedding rows force ties.
      for (std::size_t k = 0; k < d; ++k) {
        feats(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<double>(1 + rng.uniform_index(3));
      }
      Vector e = testing::random_unit(rng, d);
      if (i > 0 && rng.bernoulli(0.25)) e = emb.row(static_cast<Eigen::Index>(rng.uniform_index(i))).transpose();
      emb.row(static_cast<Eigen::Index>(i)) = e.transpose();
    }
    const VisualFeatureStore store(ids, feats);
    const EmbeddingIndex index(ids, emb);
    for (int qi = 0; qi < 3; ++qi, ++queries) {
      const std::size_t q = rng.uniform_index(n);
      const Vector qf = feats.row(static_cast<Eigen::Index>(q)).transpose();
      const std::size_t k = 1 + rng.uniform_index(n + 10);

      std::vector<std::pair<std::string, double>> scored;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != q) {
          const Vector fi = feats.row(static_cast<Eigen::Index>(i)).transpose();
          scored.emplace_back(ids[i], qf.dot(fi) / (qf.norm() * fi.norm()));
        }
      }
      auto expected_pre = testing::brute_force_order(scored);
      if (expected_pre.size() > k) expected_pre.resize(k);
      const auto pre = prerank(qf, store, k, ids[q]);
      if (pre != expected_pre) ++mismatches;

      const Vector qe = emb.row(static_cast<Eigen::Index>(q)).transpose();
      std::vector<std::pair<std::string, double>> cand_scores;
      for (const auto& c : pre) cand_scores.emplace_back(c, index.embedding(c).dot(qe));
      const auto expected_re = testing::brute_force_order(cand_scores);
      const auto re = rerank(qe, pre, index);
      std::vector<std::string> got;
      for (const auto& r : re) got.push_back(r.id);
      if (got != expected_re) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("100 corpora (N <= 500), %zu queries, %zu prerank/rerank mismatches", queries, mismatches)};
}

// 4 -------------------------------------------------------------------------

Outcome metric_oracles() {
  Timer timer;
  std::vector<std::string> failures;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failures.emplace_back(what);
  };

  const double example = eval::ndcg(std::vector<double>{2, 3, 0}, std::vector<double>{3, 2, 0}, 3);
  check(std::abs(example - 0.91340) <= kNdcgExampleTolerance, "ndcg example");

  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> rel(1 + rng.uniform_index(30));
    for (double& r : rel) r = rng.uniform(-0.2, 1.0);
    std::vector<double> sorted = rel;
    std::sort(sorted.rbegin(), sorted.rend());
    for (std::size_t c : {5, 10, 20, 30, 40, 50}) check(eval::ndcg(sorted, rel, c) == 1.0, "perfect order");
  }

  using eval::Decision;
  check(*eval::triplet_score({3, 1, 0, 0}, Decision::Cand1) == 0.75, "agreement 3/4");
  check(*eval::triplet_score({1, 1, 2, 0}, Decision::Cand2) == 0.5, "agreement with both");
  check(*eval::triplet_score({0, 0, 2, 0}, Decision::Cand1) == 0.5, "agreement all both");
  check(eval::human_agreement({std::nullopt, Decision::Cand1},
                              {{"q", "a", "b", {1, 0, 3, 0}}, {"q", "c", "d", {2, 0, 0, 0}}}) == 1.0,
        "agreement filter");

  auto ans = [](const char* who, Decision d, const char* q = "q") { return eval::RawAnswer{who, q, "a", "b", d}; };
  check(eval::inter_human_agreement({ans("h", Decision::Cand1), ans("x", Decision::Cand1), ans("y", Decision::Cand1),
                                     ans("z", Decision::Cand2)})
                .per_annotator.at("h") == 2.0 / 3.0,
        "inter-human 2/3");
  check(eval::inter_human_agreement({ans("h", Decision::Both), ans("w", Decision::Cand1), ans("x", Decision::Cand1),
                                     ans("y", Decision::Cand2), ans("z", Decision::Both)})
                .per_annotator.at("h") == 0.625,
        "inter-human both");
  check(eval::inter_human_agreement({ans("h", Decision::Neither, "q1"), ans("x", Decision::Cand1, "q1"),
                                     ans("y", Decision::Cand1, "q1"), ans("h", Decision::Cand1, "q2"),
                                     ans("x", Decision::Cand1, "q2"), ans("y", Decision::Cand2, "q2")})
                .per_annotator.at("h") == 0.5,
        "inter-human neither");

  const double secs = timer.seconds();
  check(secs < 1.0, "runtime");
  std::string detail = fmt("ndcg example %.5f, perfect order = 1 at all cutoffs, agreement formulas exact, %.3f s",
                           example, secs);
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

// 5 and 6 -------------------------------------------------------------------

struct SeedRun {
  double gcn = 0.0, no_attributes = 0.0, random_relations = 0.0;
  double random = 0.0, object_count = 0.0, monte_carlo = 0.0;
};

double ndcg10(const synthetic::Corpus& c, const RelevanceOracle& oracle, const eval::Rankings& rankings) {
  return eval::evaluate_retrieval(rankings, oracle, c.test_ids, {10})[0];
}

SeedRun planted_run(std::uint64_t seed) {
  synthetic::CorpusConfig cc;
  cc.seed = seed;
  const auto corpus = synthetic::generate(cc);
  const SceneGraphSet graphs(corpus.graphs);
  const RelevanceOracle all(corpus.captions);
  const auto train_oracle = RelevanceOracle::subset(corpus.captions, corpus.train_ids);
  const auto candidates = candidate_lists(corpus.query_ids, corpus.test_ids, RetrievalMode::full());

  SeedRun r;
  train::TrainConfig cfg;
  cfg.seed = seed;
  for (auto kind : {GraphVariant::Kind::Full, GraphVariant::Kind::NoAttributes, GraphVariant::Kind::RandomRelations}) {
    cfg.graph_variant = kind;
    const auto trained = train::train(feature_graphs(graphs, corpus.train_ids, corpus.words, cfg.variant()),
                                      train_oracle, cfg);
    const auto index = build_index(feature_graphs(graphs, corpus.test_ids, corpus.words, cfg.variant()),
                                   trained.checkpoint.params);
    const double v = ndcg10(corpus, all, retrieval_rankings(corpus.query_ids, RetrievalMode::full(), index));
    if (kind == GraphVariant::Kind::Full) r.gcn = v;
    if (kind == GraphVariant::Kind::NoAttributes) r.no_attributes = v;
    if (kind == GraphVariant::Kind::RandomRelations) r.random_relations = v;
  }
  Rng baseline(seed, "baseline");
  r.random = ndcg10(corpus, all, random_rankings(candidates, baseline));
  r.object_count = ndcg10(corpus, all, object_count_rankings(candidates, graphs));
  Rng mc(seed, "acceptance-monte-carlo");
  r.monte_carlo = testing::monte_carlo_random_ndcg(corpus.query_ids, corpus.test_ids, all, 10, 200, mc);
  return r;
}

std::vector<SeedRun> planted_runs(double& seconds) {
  Timer timer;
  std::vector<SeedRun> runs;
  for (std::uint64_t s = 1; s <= kSeeds; ++s) {
    runs.push_back(planted_run(s));
    const auto& r = runs.back();
    std::printf("  seed %llu: gcn %.4f no_attributes %.4f random_relations %.4f random %.4f (mc %.4f) object_count %.4f\n",
                static_cast<unsigned long long>(s), r.gcn, r.no_attributes, r.random_relations, r.random,
                r.monte_carlo, r.object_count);
    std::fflush(stdout);
  }
  seconds = timer.seconds();
  return runs;
}

double median_of(const std::vector<SeedRun>& runs, double SeedRun::*field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.*field);
  return testing::median(v);
}

Outcome planted_end_to_end(const std::vector<SeedRun>& runs, double seconds) {
  const double gcn = median_of(runs, &SeedRun::gcn);
  const double random = median_of(runs, &SeedRun::random);
  const double oc = median_of(runs, &SeedRun::object_count);
  double worst_gap = 0.0;
  for (const auto& r : runs) worst_gap = std::max(worst_gap, std::abs(r.random - r.monte_carlo));
  const bool pass = gcn > random && gcn > oc && worst_gap <= kMonteCarloBand && seconds < 600.0;
  return {pass, fmt("median nDCG@10 over %zu seeds: GCN %.4f > Random %.4f and > ObjectCount %.4f; "
                    "max |Random - MC| %.4f <= %.2f; %.0f s for all seeds (5 and 6 share runs)",
                    runs.size(), gcn, random, oc, worst_gap, kMonteCarloBand, seconds)};
}

Outcome ablation_ordering(const std::vector<SeedRun>& runs) {
  const double full = median_of(runs, &SeedRun::gcn);
  const double noattr = median_of(runs, &SeedRun::no_attributes);
  const double randrel = median_of(runs, &SeedRun::random_relations);
  const bool pass = full >= noattr - kAblationSlack && noattr >= randrel - kAblationSlack;
  return {pass, fmt("median nDCG@10: full %.4f >= no_attributes %.4f >= random_relations %.4f (slack %.3f)", full,
                    noattr, randrel, kAblationSlack)};
}

// 7 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SGR_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Timer timer;
  const fs::path dir = fs::temp_directory_path() / "sgr_acceptance_determinism";
  fs::remove_all(dir);
  const fs::path log = dir.string() + ".log";
  if (run("synth --out " + dir.string() + " --seed 11", log) != 0) return {false, "synth failed: " + slurp(log)};
  const std::string config = (dir / "config.json").string();
  std::string ck[2], index[2];
  for (int pass = 0; pass < 2; ++pass) {
    if (run("train --config " + config + " --seed 5", log) != 0) return {false, "train failed: " + slurp(log)};
    if (run("embed --config " + config + " --seed 5", log) != 0) return {false, "embed failed: " + slurp(log)};
    ck[pass] = slurp(dir / "out" / "model_full.sgck");
    index[pass] = slurp(dir / "out" / "index_full.sgvec") + slurp(dir / "out" / "index_full.sgvec.ids");
    fs::remove_all(dir / "out");
  }
  fs::remove_all(dir);
  fs::remove(log);
  const bool pass = !ck[0].empty() && !index[0].empty() && ck[0] == ck[1] && index[0] == index[1];
  return {pass, fmt("two CLI train+embed runs (seed 5, default settings): checkpoint %zu bytes %s, index %zu bytes %s, "
                    "%.0f s",
                    ck[0].size(), ck[0] == ck[1] ? "identical" : "DIFFER", index[0].size(),
                    index[0] == index[1] ? "identical" : "DIFFER", timer.seconds())};
}

// 8 -------------------------------------------------------------------------

Outcome throughput() {
  Rng rng(8);
  const gnn::ModelDims dims;  // full-size defaults
  const std::size_t n = 10000;
  std::vector<std::string> ids;
  Matrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims.hidden));
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(fmt("c%05zu", i));
    rows.row(static_cast<Eigen::Index>(i)) = testing::random_unit(rng, dims.hidden).transpose();
  }
  const EmbeddingIndex index(ids, rows);
  const Vector q = testing::random_unit(rng, dims.hidden);
  double best_ms = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    Timer t;
    const auto ranked = rerank(q, ids, index);
    best_ms = std::min(best_ms, t.seconds() * 1000.0);
    if (ranked.size() != n) return {false, "rerank dropped candidates"};
  }

  std::vector<FeatureGraph> graphs;
  for (std::size_t i = 0; i < 1000; ++i) {
    graphs.push_back(testing::random_feature_graph(rng, 1 + rng.uniform_index(30), dims.input, 0.1, fmt("g%04zu", i)));
  }
  double embed_s[2] = {0, 0};
  for (auto kind : {gnn::ModelKind::Gcn, gnn::ModelKind::Gin}) {
    const auto params = gnn::init_params(kind, dims, rng);
    Timer t;
    const auto built = build_index(graphs, params);
    embed_s[static_cast<int>(kind)] = t.seconds();
    if (built.size() != graphs.size()) return {false, "index size mismatch"};
  }
  const bool pass = best_ms < kRerankBudgetMs && embed_s[0] < kEmbedBudgetS && embed_s[1] < kEmbedBudgetS;
  return {pass, fmt("rerank of 10000 candidates (d=%zu) %.2f ms < %.0f ms; 1000 embeddings (<=30 nodes) GCN %.2f s, "
                    "GIN %.2f s < %.0f s",
                    dims.hidden, best_ms, kRerankBudgetMs, embed_s[0], embed_s[1], kEmbedBudgetS)};
}

// 9 -------------------------------------------------------------------------

Outcome invariants() {
  Rng rng(9);
  gnn::ModelDims dims;
  dims.input = 8;
  dims.hidden = 10;
  dims.mlp_hidden = 12;
  double perm_worst = 0.0, self_worst = 0.0;
  bool bilinear = true, symmetric = true, roundtrip = true;

  for (auto kind : {gnn::ModelKind::Gcn, gnn::ModelKind::Gin}) {
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 1 + rng.uniform_index(20);
      const auto g = testing::random_feature_graph(rng, n, dims.input, 0.3);
      const auto p = gnn::init_params(kind, dims, rng);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      const auto e = gnn::embed(g, p);
      const auto f = gnn::embed(testing::permute(g, perm), p);
      perm_worst = std::max(perm_worst, (e.vector - f.vector).cwiseAbs().maxCoeff());
      if (!e.is_zero()) self_worst = std::max(self_worst, std::abs(gnn::similarity(e, e) - 1.0));
    }
  }

  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform_index(8), m = 1 + rng.uniform_index(8), d = 1 + rng.uniform_index(5);
    Matrix a(n, d), b(m, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = static_cast<double>(rng.uniform_index(7)) - 3.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = static_cast<double>(rng.uniform_index(7)) - 3.0;
    double pairs = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.rows(); ++j) pairs += a.row(i).dot(b.row(j));
    }
    bilinear = bilinear && a.colwise().sum().dot(b.colwise().sum()) == pairs;
  }

  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 2 + rng.uniform_index(6);
    CaptionEmbeddingSet x{"x", {}}, y{"y", {}};
    for (std::size_t k = 0, c = 1 + rng.uniform_index(5); k < c; ++k) x.vectors.push_back(testing::random_unit(rng, dim));
    for (std::size_t k = 0, c = 1 + rng.uniform_index(5); k < c; ++k) y.vectors.push_back(testing::random_unit(rng, dim));
    symmetric = symmetric && surrogate_relevance(x, y) == surrogate_relevance(y, x);
  }

  for (auto kind : {gnn::ModelKind::Gcn, gnn::ModelKind::Gin}) {
    train::TrainConfig cfg;
    cfg.model_kind = kind;
    cfg.dims = dims;
    Rng sampler(3, "sampler");
    sampler.normal();
    const train::Checkpoint ck{gnn::init_params(kind, dims, rng), cfg, 4, sampler.save_state()};
    const auto bytes = train::encode_checkpoint(ck);
    const auto back = train::decode_checkpoint(bytes);
    roundtrip = roundtrip && train::encode_checkpoint(back) == bytes;
    const auto want = testing::tensors(ck.params);
    const auto got = testing::tensors(back.params);
    for (std::size_t i = 0; i < want.size(); ++i) {
      roundtrip = roundtrip && want[i]->size() == got[i]->size() &&
                  std::memcmp(want[i]->data(), got[i]->data(), sizeof(double) * want[i]->size()) == 0;
    }
  }

  const bool pass = perm_worst <= kPermutationTolerance && self_worst <= kSelfSimilarityTolerance && bilinear &&
                    symmetric && roundtrip;
  return {pass, fmt("permutation %.1e <= %.0e, self-similarity %.1e <= %.0e, bilinearity %s, relevance symmetry %s, "
                    "checkpoint round-trip %s",
                    perm_worst, kPermutationTolerance, self_worst, kSelfSimilarityTolerance,
                    bilinear ? "exact" : "BROKEN", symmetric ? "exact" : "BROKEN", roundtrip ? "bit-exact" : "BROKEN")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient correctness", guarded(gradient_correctness));
  report(2, "forward oracle equivalence", guarded(forward_oracle));
  report(3, "exact-search equivalence", guarded(exact_search));
  report(4, "metric oracles", guarded(metric_oracles));

  double planted_seconds = 0.0;
  std::vector<SeedRun> runs;
  Outcome planted_error;
  try {
    runs = planted_runs(planted_seconds);
  } catch (const std::exception& e) {
    planted_error = {false, std::string("exception: ") + e.what()};
  }
  report(5, "planted synthetic end-to-end", planted_error.pass ? planted_end_to_end(runs, planted_seconds) : planted_error);
  report(6, "ablation ordering", planted_error.pass ? ablation_ordering(runs) : planted_error);

  report(7, "determinism", guarded(determinism));
  report(8, "throughput", guarded(throughput));
  report(9, "invariant suites", guarded(invariants));

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
