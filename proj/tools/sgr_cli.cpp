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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "sgr/sgr.hpp"

namespace fs = std::filesystem;
using namespace sgr;
using sgr::cli::RunConfig;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::NonPositiveCutoff:
    case ErrorKind::MissingStore:
      return kUsage;
    case ErrorKind::CacheMismatch:
      return kInternal;
    default:
      return kData;
  }
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> k;
  std::optional<std::string> cutoffs;
  std::optional<std::string> variant;
};

RunConfig load(const Overrides& o) {
  RunConfig rc = cli::load_run_config(o.config);
  if (o.seed) rc.seed = *o.seed;
  if (o.mode) rc.mode.kind = cli::parse_mode(*o.mode);
  if (o.k) rc.mode.k = *o.k;
  if (o.cutoffs) rc.cutoffs = cli::parse_cutoffs(*o.cutoffs);
  if (o.variant) rc.train.graph_variant = parse_variant_kind(*o.variant);
  rc.train.seed = rc.seed;
  require(rc.mode.k > 0, ErrorKind::Config, "--k must be positive");
  cli::check_inputs(rc);
  return rc;
}

std::vector<std::string> ids_of(const fs::path& p) { return io::read_id_list(p.string()); }

SceneGraphSet load_graphs(const RunConfig& rc) {
  auto in = io::open_text(rc.scene_graphs.string());
  try {
    return SceneGraphSet(read_scene_graphs(in));
  } catch (const Error& e) {
    fail(e.kind(), rc.scene_graphs.string() + ": " + e.detail());
  }
}

WordVectorTable load_words(const RunConfig& rc) {
  auto in = io::open_text(rc.word_vectors.string());
  try {
    return load_word_vectors(in, rc.word_dim);
  } catch (const Error& e) {
    fail(e.kind(), rc.word_vectors.string() + ": " + e.detail());
  }
}

void check_disjoint(const std::vector<std::string>& train, const std::vector<std::string>& test) {
  const std::set<std::string> a(train.begin(), train.end());
  for (const auto& id : test) {
    if (a.count(id)) fail(ErrorKind::Config, "image '" + id + "' is in both the train and test splits");
  }
}

train::Checkpoint load_model(const fs::path& path, const RunConfig& rc) {
  train::Checkpoint ck = train::load_checkpoint(path.string());
  require(ck.config.dims.input == rc.word_dim, ErrorKind::Config,
          path.string() + " expects " + std::to_string(ck.config.dims.input) + "-d word vectors, config gives " +
              std::to_string(rc.word_dim));
  return ck;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct ReportRow {
  std::string method;
  std::optional<std::vector<double>> ndcg;
  std::optional<double> agreement;
  std::optional<double> agreement_sd;
};

void write_report(std::ostream& out, const std::vector<std::size_t>& cutoffs, const std::vector<ReportRow>& rows,
                  bool with_agreement) {
  out << "method";
  for (std::size_t c : cutoffs) out << "\tnDCG@" << c;
  if (with_agreement) out << "\thuman_agreement";
  out << '\n';
  for (const auto& r : rows) {
    out << r.method;
    for (std::size_t k = 0; k < cutoffs.size(); ++k) out << '\t' << (r.ndcg ? fmt3((*r.ndcg)[k]) : "-");
    if (with_agreement) {
      out << '\t';
      if (!r.agreement) {
        out << '-';
      } else {
        out << fmt3(*r.agreement);
        if (r.agreement_sd) out << "+-" << fmt3(*r.agreement_sd);
      }
    }
    out << '\n';
  }
}

void emit_report(const fs::path& path, const std::vector<std::size_t>& cutoffs, const std::vector<ReportRow>& rows,
                 bool with_agreement) {
  write_report(std::cout, cutoffs, rows, with_agreement);
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_report(out, cutoffs, rows, with_agreement);
}

/// Everything evaluation needs, loaded once.
struct EvalContext {
  const RunConfig& rc;
  std::vector<std::string> pool;
  std::vector<std::string> queries;
  RelevanceOracle oracle;
  std::optional<VisualFeatureStore> features;
  std::optional<eval::AnnotationFile> annotations;

  explicit EvalContext(const RunConfig& cfg)
      : rc(cfg),
        pool(ids_of(cfg.test_ids)),
        queries(ids_of(cfg.query_ids)),
        oracle(RelevanceOracle::subset(read_caption_sets(cfg.captions.string()), pool)) {
    const std::set<std::string> in_pool(pool.begin(), pool.end());
    for (const auto& q : queries) {
      if (!in_pool.count(q)) fail(ErrorKind::UnknownId, "query '" + q + "' is not in the test split");
    }
    if (rc.mode.kind == RetrievalMode::Kind::TwoStage) {
      if (!rc.visual_features) fail(ErrorKind::MissingStore, "two_stage mode needs 'visual_features' in the config");
      features = pool_store(io::read_vectors(rc.visual_features->string()), pool);
    }
    if (rc.annotations) {
      auto in = io::open_text(rc.annotations->string());
      try {
        annotations = eval::read_annotations(in);
      } catch (const Error& e) {
        fail(e.kind(), rc.annotations->string() + ": " + e.detail());
      }
    }
  }

  const VisualFeatureStore* store() const { return features ? &*features : nullptr; }
  CandidateLists candidates() const { return candidate_lists(queries, pool, rc.mode, store()); }
  std::vector<double> ndcg(const eval::Rankings& r) const {
    return eval::evaluate_retrieval(r, oracle, pool, rc.cutoffs, rc.gain);
  }
  bool with_agreement() const { return annotations && !annotations->triplets.empty(); }
  std::optional<double> agreement(const std::vector<std::optional<eval::Decision>>& d) const {
    if (!with_agreement()) return std::nullopt;
    return eval::human_agreement(d, annotations->triplets);
  }
  void add_inter_human(std::vector<ReportRow>& rows) const {
    if (!annotations || annotations->raw.empty()) return;
    const auto ih = eval::inter_human_agreement(annotations->raw);
    rows.push_back({"inter_human", std::nullopt, ih.mean, ih.stddev});
  }
};

int cmd_synth(const fs::path& out, synthetic::CorpusConfig cfg) {
  const auto corpus = synthetic::generate(cfg);
  synthetic::write_corpus(corpus, out);
  std::cout << "wrote " << corpus.graphs.size() << " images to " << out.string() << '\n'
            << "config: " << (out / "config.json").string() << '\n';
  return kOk;
}

int cmd_train(const RunConfig& rc, std::optional<std::size_t> epochs, std::optional<std::string> model,
              std::optional<fs::path> checkpoint_out) {
  train::TrainConfig tc = rc.train;
  if (epochs) tc.epochs = *epochs;
  if (model) tc.model_kind = gnn::parse_model_kind(*model);
  tc.validate();

  const auto train_ids = ids_of(rc.train_ids);
  check_disjoint(train_ids, ids_of(rc.test_ids));
  const SceneGraphSet graphs = load_graphs(rc);
  const WordVectorTable words = load_words(rc);
  const RelevanceOracle oracle = RelevanceOracle::subset(read_caption_sets(rc.captions.string()), train_ids);
  const auto fg = feature_graphs(graphs, train_ids, words, tc.variant());

  const auto result = train::train(fg, oracle, tc, [](const train::EpochStats& s) {
    std::cerr << "epoch " << s.epoch << " lr " << s.learning_rate << " loss " << s.mean_loss << '\n';
  });

  const fs::path ck_path = checkpoint_out.value_or(rc.checkpoint_path(tc.graph_variant));
  ensure_parent(ck_path);
  train::save_checkpoint(result.checkpoint, ck_path.string());
  const fs::path log_path = rc.log_path(tc.graph_variant);
  ensure_parent(log_path);
  {
    std::ofstream log(log_path);
    if (!log) fail(ErrorKind::IoError, "cannot write '" + log_path.string() + "'");
    train::write_metrics_log(log, result.epochs);
  }
  if (result.epochs.empty()) {
    std::cout << "final mean loss: n/a (0 epochs)\n";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", result.epochs.back().mean_loss);
    std::cout << "final mean loss: " << buf << '\n';
  }
  std::cout << "checkpoint: " << ck_path.string() << '\n';
  return kOk;
}

int cmd_embed(const RunConfig& rc, std::optional<fs::path> checkpoint, std::optional<fs::path> output) {
  const fs::path ck_path = checkpoint.value_or(rc.checkpoint_path(rc.train.graph_variant));
  const train::Checkpoint ck = load_model(ck_path, rc);
  const SceneGraphSet graphs = load_graphs(rc);
  const WordVectorTable words = load_words(rc);
  const auto fg = feature_graphs(graphs, ids_of(rc.test_ids), words, ck.config.variant());
  const EmbeddingIndex index = build_index(fg, ck.params);

  const fs::path out = output.value_or(rc.index_path(ck.config.graph_variant));
  ensure_parent(out);
  io::write_sgvec(out.string(), index.to_rows());
  std::cout << "index: " << out.string() << " (" << index.size() << " rows)\n";
  return kOk;
}

int cmd_retrieve(const RunConfig& rc, std::optional<fs::path> index_path, std::optional<fs::path> output) {
  const fs::path in = index_path.value_or(rc.index_path(rc.train.graph_variant));
  const EmbeddingIndex index = EmbeddingIndex::from_rows(io::read_sgvec(in.string()));
  std::optional<VisualFeatureStore> features;
  if (rc.mode.kind == RetrievalMode::Kind::TwoStage) {
    if (!rc.visual_features) fail(ErrorKind::MissingStore, "two_stage mode needs 'visual_features' in the config");
    features = pool_store(io::read_vectors(rc.visual_features->string()), index.ids());
  }
  const fs::path out_path = output.value_or(rc.results_path(rc.train.graph_variant));
  ensure_parent(out_path);
  std::ofstream out(out_path);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + out_path.string() + "'");
  const auto queries = ids_of(rc.query_ids);
  for (const auto& q : queries) {
    write_results(out, q, retrieve(q, rc.mode, index, features ? &*features : nullptr));
  }
  std::cout << "results: " << out_path.string() << " (" << queries.size() << " queries)\n";
  return kOk;
}

int cmd_eval(const RunConfig& rc, const std::vector<std::string>& results, const std::vector<std::string>& baselines,
             std::optional<fs::path> output) {
  if (results.empty() && baselines.empty()) {
    fail(ErrorKind::Config, "eval needs at least one --results file or --baseline");
  }
  const EvalContext ctx(rc);
  std::vector<ReportRow> rows;
  for (const auto& path : results) {
    auto in = io::open_text(path);
    const auto parsed = read_results(in);
    eval::Rankings rankings;
    for (const auto& [q, items] : parsed) {
      auto& r = rankings[q];
      for (const auto& item : items) r.push_back(item.id);
    }
    for (const auto& q : ctx.queries) {
      if (!rankings.count(q)) fail(ErrorKind::UnknownId, path + " has no results for query '" + q + "'");
    }
    std::optional<double> agreement;
    if (ctx.with_agreement()) agreement = ctx.agreement(result_decisions(ctx.annotations->triplets, parsed));
    rows.push_back({fs::path(path).stem().string(), ctx.ndcg(rankings), agreement, std::nullopt});
  }

  std::optional<SceneGraphSet> graphs;
  std::optional<RelevanceOracle> full_oracle;
  for (const auto& name : baselines) {
    ReportRow row{name, {}, {}, {}};
    const auto* triplets = ctx.with_agreement() ? &ctx.annotations->triplets : nullptr;
    if (name == "random") {
      Rng rng(rc.seed, "baseline");
      row.ndcg = ctx.ndcg(random_rankings(ctx.candidates(), rng));
      if (triplets) {
        Rng drng(rc.seed, "baseline-decisions");
        row.agreement = ctx.agreement(eval::random_decisions(drng, triplets->size()));
      }
    } else if (name == "object_count") {
      if (!graphs) graphs = load_graphs(rc);
      row.ndcg = ctx.ndcg(object_count_rankings(ctx.candidates(), *graphs));
      if (triplets) {
        row.agreement = ctx.agreement(score_decisions(*triplets, [&](const auto& q, const auto& c) {
          return std::optional<double>(eval::object_count_similarity(graphs->at(q), graphs->at(c)));
        }));
      }
    } else if (name == "caption_oracle") {
      row.ndcg = ctx.ndcg(relevance_rankings(ctx.candidates(), ctx.oracle));
      if (triplets) {
        if (!full_oracle) full_oracle.emplace(read_caption_sets(rc.captions.string()));
        row.agreement = ctx.agreement(score_decisions(*triplets, [&](const auto& q, const auto& c) {
          return std::optional<double>(full_oracle->relevance(q, c));
        }));
      }
    } else {
      fail(ErrorKind::Config, "unknown baseline '" + name + "' (expected random, object_count or caption_oracle)");
    }
    rows.push_back(std::move(row));
  }
  ctx.add_inter_human(rows);
  emit_report(output.value_or(rc.output_dir / "report.tsv"), rc.cutoffs, rows, ctx.with_agreement());
  return kOk;
}

int cmd_ablate(const RunConfig& rc, std::optional<fs::path> output) {
  const GraphVariant::Kind kinds[] = {GraphVariant::Kind::Full, GraphVariant::Kind::NoAttributes,
                                      GraphVariant::Kind::RandomRelations};
  std::vector<std::pair<GraphVariant::Kind, train::Checkpoint>> models;
  for (auto kind : kinds) {
    const fs::path p = rc.checkpoint_path(kind);
    const std::string name(to_string(kind));
    if (!fs::is_regular_file(p)) {
      fail(ErrorKind::IoError, "missing checkpoint for variant '" + name + "': " + p.string());
    }
    train::Checkpoint ck = load_model(p, rc);
    require(ck.config.graph_variant == kind, ErrorKind::Config,
            p.string() + " was trained on variant '" + std::string(to_string(ck.config.graph_variant)) +
                "', expected '" + name + "'");
    models.emplace_back(kind, std::move(ck));
  }

  const EvalContext ctx(rc);
  const SceneGraphSet graphs = load_graphs(rc);
  const WordVectorTable words = load_words(rc);
  std::vector<ReportRow> rows;
  for (const auto& [kind, ck] : models) {
    std::vector<std::string> ids = ctx.pool;
    if (ctx.with_agreement()) {
      std::set<std::string> extra(ids.begin(), ids.end());
      for (const auto& t : ctx.annotations->triplets) {
        for (const auto* id : {&t.query, &t.cand1, &t.cand2}) {
          if (extra.insert(*id).second) ids.push_back(*id);
        }
      }
    }
    const EmbeddingIndex all = build_index(feature_graphs(graphs, ids, words, ck.config.variant()), ck.params);
    Matrix pool_rows(static_cast<Eigen::Index>(ctx.pool.size()), static_cast<Eigen::Index>(all.dimension()));
    for (std::size_t i = 0; i < ctx.pool.size(); ++i) {
      pool_rows.row(static_cast<Eigen::Index>(i)) = all.embedding(ctx.pool[i]).transpose();
    }
    const EmbeddingIndex index(ctx.pool, std::move(pool_rows));
    ReportRow row{std::string(to_string(kind)), ctx.ndcg(retrieval_rankings(ctx.queries, rc.mode, index, ctx.store())),
                  {}, {}};
    if (ctx.with_agreement()) {
      row.agreement = ctx.agreement(score_decisions(ctx.annotations->triplets, [&](const auto& q, const auto& c) {
        return std::optional<double>(all.embedding(q).dot(all.embedding(c)));
      }));
    }
    rows.push_back(std::move(row));
  }
  ReportRow oc{"object_count", ctx.ndcg(object_count_rankings(ctx.candidates(), graphs)), {}, {}};
  if (ctx.with_agreement()) {
    oc.agreement = ctx.agreement(score_decisions(ctx.annotations->triplets, [&](const auto& q, const auto& c) {
      return std::optional<double>(eval::object_count_similarity(graphs.at(q), graphs.at(c)));
    }));
  }
  rows.push_back(std::move(oc));
  emit_report(output.value_or(rc.output_dir / "ablation.tsv"), rc.cutoffs, rows, ctx.with_agreement());
  return kOk;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--mode", o.mode, "retrieval mode: two_stage or full");
  cmd->add_option("--k", o.k, "pre-rank depth for two_stage");
  cmd->add_option("--cutoffs", o.cutoffs, "comma-separated nDCG cutoffs");
  cmd->add_option("--variant", o.variant, "graph variant: full, no_attributes or random_relations");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene graph image retrieval: train, embed, retrieve, evaluate"};
  app.require_subcommand(1);
  Overrides o;

  synthetic::CorpusConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a planted synthetic corpus and a matching config");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_cfg.seed, "corpus seed");
  synth->add_option("--images", synth_cfg.images, "number of images");
  synth->add_option("--train-images", synth_cfg.train_images, "images in the train split");
  synth->add_option("--query-images", synth_cfg.query_images, "queries drawn from the test split");
  synth->add_option("--word-dim", synth_cfg.word_dim, "word vector dimension");

  std::optional<std::size_t> epochs;
  std::optional<std::string> model;
  std::optional<std::string> checkpoint, output, index;
  std::vector<std::string> results, baselines;

  auto* train_cmd = app.add_subcommand("train", "train a model; writes a checkpoint and a metrics log");
  add_common(train_cmd, o);
  train_cmd->add_option("--epochs", epochs, "override the number of epochs");
  train_cmd->add_option("--model", model, "gcn or gin");
  train_cmd->add_option("--checkpoint", checkpoint, "checkpoint output path");

  auto* embed_cmd = app.add_subcommand("embed", "embed the test split into an index file");
  add_common(embed_cmd, o);
  embed_cmd->add_option("--checkpoint", checkpoint, "checkpoint to load");
  embed_cmd->add_option("--output", output, "index output path");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "rank the index for every query");
  add_common(retrieve_cmd, o);
  retrieve_cmd->add_option("--index", index, "index file to search");
  retrieve_cmd->add_option("--output", output, "results output path");

  auto* eval_cmd = app.add_subcommand("eval", "nDCG and human agreement report");
  add_common(eval_cmd, o);
  eval_cmd->add_option("--results", results, "results file(s) to evaluate");
  eval_cmd->add_option("--baseline", baselines, "random, object_count or caption_oracle");
  eval_cmd->add_option("--output", output, "report output path");

  auto* ablate_cmd = app.add_subcommand("ablate", "compare the three graph variants and object counts");
  add_common(ablate_cmd, o);
  ablate_cmd->add_option("--output", output, "report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  auto path_opt = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
    if (!s) return std::nullopt;
    return fs::path(*s);
  };
  try {
    if (synth->parsed()) return cmd_synth(synth_out, synth_cfg);
    const RunConfig rc = load(o);
    if (train_cmd->parsed()) return cmd_train(rc, epochs, model, path_opt(checkpoint));
    if (embed_cmd->parsed()) return cmd_embed(rc, path_opt(checkpoint), path_opt(output));
    if (retrieve_cmd->parsed()) return cmd_retrieve(rc, path_opt(index), path_opt(output));
    if (eval_cmd->parsed()) return cmd_eval(rc, results, baselines, path_opt(output));
    if (ablate_cmd->parsed()) return cmd_ablate(rc, path_opt(output));
  } catch (const Error& e) {
    std::cerr << "sgr: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "sgr: io error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "sgr: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
