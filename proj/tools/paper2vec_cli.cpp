// Command-line front end. Stages hand off through files so runs can be
// resumed, inspected, and mixed with externally produced rankings.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error,
// 3 missing input file, 4 stage-order violation (a needed intermediate
// file was never produced).

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "paper2vec/baselines.hpp"
#include "paper2vec/context.hpp"
#include "paper2vec/eval.hpp"
#include "paper2vec/graph.hpp"
#include "paper2vec/io.hpp"
#include "paper2vec/online.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/synth.hpp"
#include "paper2vec/trainer.hpp"

namespace fs = std::filesystem;
using namespace paper2vec;

namespace {

struct MissingInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageOrderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void need_primary(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is required");
  if (!fs::exists(path)) throw MissingInputError(what + " not found: " + path);
}

// intermediates are produced by earlier stages of this tool, so a missing one
// is a pipeline-order problem, not a missing-data problem
void need_stage(const std::string& path, const std::string& what, const std::string& hint) {
  if (path.empty()) throw StageOrderError(what + " not given; " + hint);
  if (!fs::exists(path)) throw StageOrderError(what + " not found: " + path + "; " + hint);
}

template <typename F>
void check_usage(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

Optimizer parse_optimizer(const std::string& name) {
  return name == "sgd" ? Optimizer::PlainSgd : Optimizer::AdaptivePerParameter;
}

BaselineMeasure parse_measure(const std::string& name) {
  if (name == "cocitation") return BaselineMeasure::Cocitation;
  if (name == "coupling") return BaselineMeasure::Coupling;
  return BaselineMeasure::Amsler;
}

// one stderr line per run with every resolved knob, so a result can be
// reproduced from its log alone
class ConfigEcho {
 public:
  explicit ConfigEcho(const std::string& command) { line_ << "config: command=" << command; }
  ConfigEcho& kv(std::string_view key, const std::string& value) {
    if (!value.empty()) line_ << ' ' << key << '=' << value;
    return *this;
  }
  ConfigEcho& kv(std::string_view key, const char* value) { return kv(key, std::string(value)); }
  ConfigEcho& kv(std::string_view key, double value) { return kv(key, detail::g9(value)); }
  ConfigEcho& kv(std::string_view key, bool value) { return kv(key, value ? "true" : "false"); }
  template <typename T>
  ConfigEcho& kv(std::string_view key, T value) {
    return kv(key, std::to_string(value));
  }
  ConfigEcho& lambda17(std::string_view key, double value) { return kv(key, detail::g17(value)); }
  void emit() { std::cerr << line_.str() << '\n'; }

 private:
  std::ostringstream line_;
};

void note_written(const fs::path& p) { std::cerr << "wrote " << p.string() << '\n'; }

struct Opts {
  std::string edges, context, model, state, state_out, out, out_dir, gold, rankings, queries_file,
      delta, per_query, model_text;
  std::vector<std::string> inline_queries;

  int win = 3;
  double lambda = 0.0;
  double auto_q = 0.05;
  bool exclude_diagonal = true;
  bool symmetrize = false;
  double prune = 0.0;

  std::int64_t dim = 500;
  int epochs = 50;
  double alpha = 0.05;
  std::string optimizer = "adagrad";
  std::uint64_t seed = 1;
  int workers = 1;
  bool resume = false;

  int k = 10;
  std::string measure = "amsler";
  std::string denominator = "k";
  bool pipeline_model_text = false;
  bool pipeline_per_query = false;

  std::int64_t nodes = 200;
  int communities = 2;
  double p_in = 0.1;
  double p_out = 0.005;
  std::string kind = "communities";
  double hub_fraction = 0.5;
  double background_p = 0.01;
};

void require_workers(int workers) {
  if (workers < 1) throw UsageError("--workers must be >= 1");
}

void require_k(int k) {
  if (k < 1) throw UsageError("--k must be >= 1");
}

CitationGraph load_graph(const std::string& path) {
  return ingest_edges(read_edges_file(path));
}

ContextConfig make_context_config(const Opts& o, bool lambda_given) {
  ContextConfig ctx;
  ctx.win = o.win;
  if (lambda_given) ctx.lambda = o.lambda;
  ctx.auto_q = o.auto_q;
  ctx.exclude_diagonal = o.exclude_diagonal;
  ctx.prune_threshold = o.prune;
  check_usage([&] { ctx.validate(); });
  return ctx;
}

TrainConfig make_train_config(const Opts& o) {
  TrainConfig tc;
  tc.dim = static_cast<Index>(o.dim);
  tc.epochs = o.epochs;
  tc.alpha = o.alpha;
  tc.optimizer = parse_optimizer(o.optimizer);
  tc.seed = o.seed;
  tc.workers = o.workers;
  check_usage([&] { tc.validate(); });
  return tc;
}

int run_ingest(const Opts& o) {
  need_primary(o.edges, "edges file");
  auto records = read_edges_file(o.edges);
  std::size_t self = 0;
  for (const auto& r : records)
    if (r.citing == r.cited) ++self;
  auto g = ingest_edges(records);
  auto directed = g.directed_records();
  ConfigEcho("ingest").kv("edges", o.edges).kv("out", o.out).emit();
  std::cout << "records=" << records.size() << " documents=" << g.node_count()
            << " directed_edges=" << directed.size() << " self_citations_dropped=" << self
            << " duplicates_collapsed=" << (records.size() - self - directed.size()) << '\n';
  if (!o.out.empty()) {
    auto out = detail::open_output(o.out);
    write_edges(out, directed);
    note_written(o.out);
  }
  return 0;
}

int run_build_context(const Opts& o, bool lambda_given) {
  need_primary(o.edges, "edges file");
  if (o.out.empty()) throw UsageError("build-context: --out is required");
  require_workers(o.workers);
  auto g = load_graph(o.edges);
  ContextConfig ctx = make_context_config(o, lambda_given);
  auto matrix = build_context_matrix<double>(g, ctx, o.workers);
  if (o.symmetrize) matrix = symmetrized(matrix);
  write_context_file(o.out, matrix);
  ConfigEcho("build-context")
      .kv("edges", o.edges)
      .kv("out", o.out)
      .kv("win", o.win)
      .lambda17("lambda", matrix.resolved_lambda)
      .kv("lambda_source", lambda_given ? "fixed" : "auto")
      .kv("lambda_auto_q", o.auto_q)
      .kv("exclude_diagonal", o.exclude_diagonal)
      .kv("symmetrize", o.symmetrize)
      .kv("prune_threshold", o.prune)
      .kv("workers", o.workers)
      .kv("documents", static_cast<long long>(g.node_count()))
      .kv("entries", static_cast<long long>(matrix.entries.size()))
      .emit();
  note_written(o.out);
  return 0;
}

int run_train_fresh(const Opts& o) {
  need_primary(o.edges, "edges file");
  need_stage(o.context, "context cache", "run build-context first");
  if (o.out.empty() && o.state_out.empty() && o.model_text.empty())
    throw UsageError("train: give --out, --state-out, or --model-text");
  auto g = load_graph(o.edges);
  auto matrix = read_context_file(o.context);
  if (matrix.node_count != g.node_count())
    throw Error("context cache was built from a different corpus: cache has " +
                std::to_string(matrix.node_count) + " documents, edges file has " +
                std::to_string(g.node_count()));
  TrainConfig tc = make_train_config(o);
  auto [model, trace] = train(matrix, tc);
  auto pv = finalize<double>(model, g.ids());
  Index unembedded = 0;
  for (Index i = 0; i < pv.size(); ++i)
    if (pv.flagged(i)) ++unembedded;

  ConfigEcho("train")
      .kv("edges", o.edges)
      .kv("context", o.context)
      .kv("dim", o.dim)
      .kv("epochs", o.epochs)
      .kv("alpha", o.alpha)
      .kv("optimizer", o.optimizer)
      .kv("seed", o.seed)
      .kv("workers", o.workers)
      .lambda17("lambda", matrix.resolved_lambda)
      .kv("documents", static_cast<long long>(g.node_count()))
      .kv("entries", static_cast<long long>(matrix.entries.size()))
      .kv("cost_first", trace.epoch_cost.empty() ? 0.0 : trace.epoch_cost.front())
      .kv("cost_final", trace.epoch_cost.empty() ? 0.0 : trace.epoch_cost.back())
      .kv("unembedded", static_cast<long long>(unembedded))
      .emit();

  if (!o.out.empty()) {
    write_model_file(o.out, pv);
    note_written(o.out);
  }
  if (!o.model_text.empty()) {
    auto out = detail::open_output(o.model_text);
    write_model_text(out, pv);
    note_written(o.model_text);
  }
  if (!o.state_out.empty()) {
    TrainState st;
    st.context = matrix.config;
    st.context.exclude_diagonal = o.exclude_diagonal;
    st.context.prune_threshold = o.prune;
    st.resolved_lambda = matrix.resolved_lambda;
    st.train = tc;
    st.ids = g.ids();
    st.model = std::move(model);
    st.updates = 0;
    write_state_file(o.state_out, st);
    note_written(o.state_out);
  }
  return 0;
}

int run_train_resume(const Opts& o, bool epochs_given) {
  need_stage(o.state, "train state", "run train --state-out first");
  need_primary(o.edges, "edges file");
  need_primary(o.delta, "edges-delta file");
  require_workers(o.workers);
  auto st = read_state_file(o.state);
  auto base = read_edges_file(o.edges);
  auto delta = read_edges_file(o.delta);
  for (const auto& r : base) {
    if (!st.ids.find(r.citing) || !st.ids.find(r.cited))
      throw Error("base edges mention documents unknown to the state; pass the corpus the state "
                  "was trained on (offending id: " +
                  (st.ids.find(r.citing) ? r.cited : r.citing) + ")");
  }
  const int extra = epochs_given ? o.epochs : st.train.epochs;
  if (extra < 1) throw UsageError("--epochs must be >= 1");
  auto stats = online_update(st, base, delta, extra, o.workers);
  const std::string state_out = o.state_out.empty() ? o.state : o.state_out;
  write_state_file(state_out, st);

  ConfigEcho("train")
      .kv("resume", true)
      .kv("state", o.state)
      .kv("edges", o.edges)
      .kv("edges_delta", o.delta)
      .kv("epochs", extra)
      .kv("workers", o.workers)
      .lambda17("lambda", st.resolved_lambda)
      .kv("new_documents", static_cast<long long>(stats.new_documents))
      .kv("affected_sources", static_cast<long long>(stats.affected_sources))
      .kv("retrained_entries", static_cast<long long>(stats.retrained_entries))
      .kv("updates", static_cast<unsigned long long>(st.updates))
      .emit();
  note_written(state_out);

  if (!o.out.empty() || !o.model_text.empty()) {
    auto pv = finalize<double>(st.model, st.ids);
    if (!o.out.empty()) {
      write_model_file(o.out, pv);
      note_written(o.out);
    }
    if (!o.model_text.empty()) {
      auto out = detail::open_output(o.model_text);
      write_model_text(out, pv);
      note_written(o.model_text);
    }
  }
  return 0;
}

std::vector<std::string> gather_queries(const Opts& o) {
  std::vector<std::string> queries;
  if (!o.queries_file.empty()) {
    need_primary(o.queries_file, "queries file");
    auto in = detail::open_text_input(o.queries_file);
    std::string line;
    std::size_t no = 0;
    while (detail::next_line(in, line)) {
      ++no;
      if (line.empty() || line[0] == '#') continue;
      if (!detail::valid_token(line))
        detail::bad_line(o.queries_file, no, "query ids must be whitespace-free");
      queries.push_back(line);
    }
  }
  queries.insert(queries.end(), o.inline_queries.begin(), o.inline_queries.end());
  std::unordered_set<std::string> seen;
  std::vector<std::string> unique;
  for (auto& q : queries)
    if (seen.insert(q).second) unique.push_back(std::move(q));
  return unique;
}

int run_topk(const Opts& o) {
  need_stage(o.model, "model file", "run train first");
  require_k(o.k);
  require_workers(o.workers);
  auto pv = read_model_file(o.model);
  auto queries = gather_queries(o);

  RankingTable table;
  if (queries.empty()) {
    table = all_top_k(pv, o.k, o.workers);
  } else {
    table.k = o.k;
    for (const auto& q : queries) {
      auto idx = pv.ids.find(q);
      if (!idx) throw LookupError("unknown document id " + q);
      std::vector<RankedDoc> row;
      for (const auto& sd : top_k(pv, *idx, o.k)) row.push_back({pv.ids.id(sd.doc), sd.score});
      table.rows.emplace_back(q, std::move(row));
    }
  }

  ConfigEcho("topk")
      .kv("model", o.model)
      .kv("k", o.k)
      .kv("workers", o.workers)
      .kv("queries", queries.empty() ? std::string("all") : std::to_string(queries.size()))
      .kv("out", o.out)
      .emit();
  if (o.out.empty()) {
    write_rankings(std::cout, table);
  } else {
    write_rankings_file(o.out, table);
    note_written(o.out);
  }
  return 0;
}

int run_baseline(const Opts& o) {
  need_primary(o.edges, "edges file");
  require_k(o.k);
  require_workers(o.workers);
  auto g = load_graph(o.edges);
  auto table = baseline_all_top_k(g, parse_measure(o.measure), o.k, o.workers);
  ConfigEcho("baseline")
      .kv("edges", o.edges)
      .kv("measure", o.measure)
      .kv("k", o.k)
      .kv("workers", o.workers)
      .kv("out", o.out)
      .emit();
  if (o.out.empty()) {
    write_rankings(std::cout, table);
  } else {
    write_rankings_file(o.out, table);
    note_written(o.out);
  }
  return 0;
}

int run_evaluate(const Opts& o, bool k_given) {
  need_primary(o.rankings, "rankings file");
  need_primary(o.gold, "gold file");
  auto table = read_rankings_file(o.rankings);
  auto gold = read_gold_file(o.gold);
  int k = o.k;
  if (!k_given) {
    if (table.k < 1) throw Error("rankings file holds no ranked neighbors");
    k = table.k;
  }
  require_k(k);
  const auto denom = o.denominator == "list" ? RatioDenominator::ListLength : RatioDenominator::FixedK;
  const bool per = !o.per_query.empty();
  auto report = intersection_ratio(table, gold, k, denom, per);

  ConfigEcho("evaluate")
      .kv("rankings", o.rankings)
      .kv("gold", o.gold)
      .kv("k", k)
      .kv("denominator", o.denominator)
      .kv("evaluated", static_cast<long long>(report.evaluated))
      .kv("skipped", static_cast<long long>(report.skipped))
      .emit();
  if (per) {
    auto out = detail::open_output(o.per_query);
    write_per_query_csv(out, report);
    note_written(o.per_query);
  }
  const MetricReport reports[] = {report};
  if (o.out.empty()) {
    write_report(std::cout, reports);
  } else {
    auto out = detail::open_output(o.out);
    write_report(out, reports);
    note_written(o.out);
  }
  return 0;
}

int run_novelty(const Opts& o) {
  need_primary(o.rankings, "rankings file");
  auto table = read_rankings_file(o.rankings);
  auto report = entropy_novelty(table);
  ConfigEcho("novelty")
      .kv("rankings", o.rankings)
      .kv("k", report.k)
      .kv("evaluated", static_cast<long long>(report.evaluated))
      .kv("skipped", static_cast<long long>(report.skipped))
      .emit();
  const MetricReport reports[] = {report};
  if (o.out.empty()) {
    write_report(std::cout, reports);
  } else {
    auto out = detail::open_output(o.out);
    write_report(out, reports);
    note_written(o.out);
  }
  return 0;
}

int run_pipeline(const Opts& o, bool lambda_given) {
  need_primary(o.edges, "edges file");
  if (o.out_dir.empty()) throw UsageError("pipeline: --out-dir is required");
  require_k(o.k);
  require_workers(o.workers);
  if (!o.gold.empty()) need_primary(o.gold, "gold file");

  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  auto g = load_graph(o.edges);
  ContextConfig ctx = make_context_config(o, lambda_given);
  TrainConfig tc = make_train_config(o);

  auto matrix = build_context_matrix<double>(g, ctx, o.workers);
  if (o.symmetrize) matrix = symmetrized(matrix);
  const fs::path context_path = dir / "context.tsv";
  write_context_file(context_path, matrix);
  note_written(context_path);

  // train from the file just written, so the pipeline is exactly the staged
  // build-context + train composition, byte for byte
  matrix = read_context_file(context_path);
  auto [model, trace] = train(matrix, tc);
  auto pv64 = finalize<double>(model, g.ids());
  const fs::path model_path = dir / "model.p2v";
  write_model_file(model_path, pv64);
  note_written(model_path);
  if (o.pipeline_model_text) {
    const fs::path text_path = dir / "model.txt";
    auto out = detail::open_output(text_path);
    write_model_text(out, pv64);
    note_written(text_path);
  }
  {
    TrainState st;
    st.context = ctx;
    st.context.lambda = matrix.resolved_lambda;
    st.resolved_lambda = matrix.resolved_lambda;
    st.train = tc;
    st.ids = g.ids();
    st.model = std::move(model);
    st.updates = 0;
    const fs::path state_path = dir / "state.p2vs";
    write_state_file(state_path, st);
    note_written(state_path);
  }

  // retrieval runs on the file just written, so rankings.tsv always matches
  // what a later `topk` on model.p2v would produce
  auto pv = read_model_file(model_path);
  auto table = all_top_k(pv, o.k, o.workers);
  const fs::path rankings_path = dir / "rankings.tsv";
  write_rankings_file(rankings_path, table);
  note_written(rankings_path);

  std::vector<MetricReport> reports;
  if (!o.gold.empty()) {
    auto gold = read_gold_file(o.gold);
    const auto denom =
        o.denominator == "list" ? RatioDenominator::ListLength : RatioDenominator::FixedK;
    auto ir = intersection_ratio(table, gold, o.k, denom, o.pipeline_per_query);
    if (o.pipeline_per_query) {
      const fs::path pq_path = dir / "per_query.csv";
      auto out = detail::open_output(pq_path);
      write_per_query_csv(out, ir);
      note_written(pq_path);
    }
    ir.per_query.clear();
    reports.push_back(std::move(ir));
  }
  reports.push_back(entropy_novelty(table));
  const fs::path report_path = dir / "report.tsv";
  {
    auto out = detail::open_output(report_path);
    write_report(out, reports);
  }
  note_written(report_path);

  Index unembedded = 0;
  for (Index i = 0; i < pv64.size(); ++i)
    if (pv64.flagged(i)) ++unembedded;
  ConfigEcho("pipeline")
      .kv("edges", o.edges)
      .kv("gold", o.gold)
      .kv("out_dir", o.out_dir)
      .kv("win", o.win)
      .lambda17("lambda", matrix.resolved_lambda)
      .kv("lambda_source", lambda_given ? "fixed" : "auto")
      .kv("lambda_auto_q", o.auto_q)
      .kv("exclude_diagonal", o.exclude_diagonal)
      .kv("symmetrize", o.symmetrize)
      .kv("prune_threshold", o.prune)
      .kv("dim", o.dim)
      .kv("epochs", o.epochs)
      .kv("alpha", o.alpha)
      .kv("optimizer", o.optimizer)
      .kv("seed", o.seed)
      .kv("workers", o.workers)
      .kv("k", o.k)
      .kv("denominator", o.denominator)
      .kv("documents", static_cast<long long>(g.node_count()))
      .kv("entries", static_cast<long long>(matrix.entries.size()))
      .kv("cost_first", trace.epoch_cost.empty() ? 0.0 : trace.epoch_cost.front())
      .kv("cost_final", trace.epoch_cost.empty() ? 0.0 : trace.epoch_cost.back())
      .kv("unembedded", static_cast<long long>(unembedded))
      .emit();
  write_report(std::cout, reports);
  return 0;
}

int run_synth(const Opts& o) {
  if (o.out_dir.empty()) throw UsageError("synth: --out-dir is required");
  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

  SynthData data;
  if (o.kind == "hub") {
    check_usage([&] {
      data = make_hub_graph(static_cast<Index>(o.nodes), o.hub_fraction, o.background_p, o.seed);
    });
  } else {
    SynthConfig config;
    config.nodes = static_cast<Index>(o.nodes);
    config.communities = o.communities;
    config.p_in = o.p_in;
    config.p_out = o.p_out;
    config.seed = o.seed;
    check_usage([&] { config.validate(); });
    data = make_community_graph(config);
  }

  const fs::path edges_path = dir / "edges.tsv";
  {
    auto out = detail::open_output(edges_path);
    write_edges(out, data.edges);
  }
  note_written(edges_path);

  if (o.kind != "hub") {
    auto gold = community_gold(data);
    const fs::path gold_path = dir / "gold.tsv";
    {
      auto out = detail::open_output(gold_path);
      write_gold(out, gold);
    }
    note_written(gold_path);
    const fs::path labels_path = dir / "labels.tsv";
    {
      auto out = detail::open_output(labels_path);
      for (std::size_t v = 0; v < data.ids.size(); ++v)
        out << data.ids[v] << '\t' << data.community[v] << '\n';
    }
    note_written(labels_path);
  }

  ConfigEcho("synth")
      .kv("kind", o.kind)
      .kv("out_dir", o.out_dir)
      .kv("nodes", o.nodes)
      .kv("communities", o.kind == "hub" ? std::string() : std::to_string(o.communities))
      .kv("p_in", o.kind == "hub" ? std::string() : detail::g9(o.p_in))
      .kv("p_out", o.kind == "hub" ? std::string() : detail::g9(o.p_out))
      .kv("hub_fraction", o.kind == "hub" ? detail::g9(o.hub_fraction) : std::string())
      .kv("background_p", o.kind == "hub" ? detail::g9(o.background_p) : std::string())
      .kv("seed", o.seed)
      .kv("edges", static_cast<long long>(data.edges.size()))
      .emit();
  return 0;
}

void add_context_flags(CLI::App* sub, Opts& o, CLI::Option** lambda_out) {
  sub->add_option("--win", o.win, "walk window, the maximum walk length")->capture_default_str();
  *lambda_out = sub->add_option("--lambda", o.lambda, "fixed log shift (default: auto-select)");
  sub->add_option("--lambda-auto-q", o.auto_q,
                  "quantile of context masses used for the automatic shift")
      ->capture_default_str();
  sub->add_flag("--exclude-diagonal,!--include-diagonal", o.exclude_diagonal,
                "drop each document's self-context entry (default on)");
  sub->add_flag("--symmetrize", o.symmetrize, "average the context matrix with its transpose");
  sub->add_option("--prune-threshold", o.prune, "drop context masses at or below this value")
      ->capture_default_str();
}

void add_train_flags(CLI::App* sub, Opts& o, CLI::Option** epochs_out) {
  sub->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
  auto* ep = sub->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  if (epochs_out) *epochs_out = ep;
  sub->add_option("--alpha", o.alpha, "learning rate")->capture_default_str();
  sub->add_option("--optimizer", o.optimizer, "sgd or adagrad")
      ->check(CLI::IsMember({"sgd", "adagrad"}))
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "rng seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  CLI::App app{"citation-graph document embeddings, retrieval and evaluation"};
  app.require_subcommand(1);

  auto* c_ingest = app.add_subcommand("ingest", "validate an edge list and report corpus stats");
  c_ingest->add_option("--edges", o.edges, "citation edge TSV (citing<TAB>cited)")->required();
  c_ingest->add_option("--out", o.out, "write the normalized directed edge list here");

  CLI::Option* bc_lambda = nullptr;
  auto* c_build = app.add_subcommand("build-context", "build the walk-context matrix cache");
  c_build->add_option("--edges", o.edges, "citation edge TSV")->required();
  c_build->add_option("--out", o.out, "context cache output path")->required();
  add_context_flags(c_build, o, &bc_lambda);
  c_build->add_option("--workers", o.workers, "parallel row builders")->capture_default_str();

  CLI::Option* tr_epochs = nullptr;
  auto* c_train = app.add_subcommand("train", "factorize a context cache into document vectors");
  c_train->add_option("--edges", o.edges, "citation edge TSV the cache was built from")->required();
  c_train->add_option("--context", o.context, "context cache from build-context");
  c_train->add_option("--out", o.out, "model output path");
  c_train->add_option("--state-out", o.state_out, "write a resumable training checkpoint here");
  c_train->add_option("--model-text", o.model_text, "also write a text model dump here");
  add_train_flags(c_train, o, &tr_epochs);
  c_train->add_option("--workers", o.workers, "parallel trainers (lock-free updates)")
      ->capture_default_str();
  c_train->add_flag("--resume", o.resume, "apply newly arrived edges to an existing checkpoint");
  c_train->add_option("--state", o.state, "checkpoint to resume from");
  c_train->add_option("--edges-delta", o.delta, "newly arrived citation edges");
  c_train->add_flag("--exclude-diagonal,!--include-diagonal", o.exclude_diagonal,
                    "recorded in the checkpoint for later resumes");
  c_train->add_option("--prune-threshold", o.prune, "recorded in the checkpoint for later resumes")
      ->capture_default_str();

  auto* c_topk = app.add_subcommand("topk", "rank nearest neighbors by cosine");
  c_topk->add_option("--model", o.model, "model file from train");
  c_topk->add_option("--k", o.k, "list length")->capture_default_str();
  c_topk->add_option("--out", o.out, "rankings output path (default: stdout)");
  c_topk->add_option("--queries", o.queries_file, "file of query ids, one per line (default: all)");
  c_topk->add_option("--query", o.inline_queries, "query id (repeatable)");
  c_topk->add_option("--workers", o.workers, "parallel queries")->capture_default_str();

  auto* c_base = app.add_subcommand("baseline", "rank neighbors by a classical citation measure");
  c_base->add_option("--edges", o.edges, "citation edge TSV")->required();
  c_base->add_option("--measure", o.measure, "amsler, cocitation or coupling")
      ->check(CLI::IsMember({"amsler", "cocitation", "coupling"}))
      ->capture_default_str();
  c_base->add_option("--k", o.k, "list length")->capture_default_str();
  c_base->add_option("--out", o.out, "rankings output path (default: stdout)");
  c_base->add_option("--workers", o.workers, "parallel queries")->capture_default_str();

  CLI::Option* ev_k = nullptr;
  auto* c_eval = app.add_subcommand("evaluate", "intersection ratio of rankings against gold");
  c_eval->add_option("--rankings", o.rankings, "rankings TSV (from topk, baseline, or elsewhere)")
      ->required();
  c_eval->add_option("--gold", o.gold, "gold pairs TSV (id_a<TAB>id_b<TAB>score)")->required();
  ev_k = c_eval->add_option("--k", o.k, "evaluation depth (default: the rankings' K)");
  c_eval->add_option("--denominator", o.denominator, "divide by k or by each list's length")
      ->check(CLI::IsMember({"k", "list"}))
      ->capture_default_str();
  c_eval->add_option("--out", o.out, "report output path (default: stdout)");
  c_eval->add_option("--per-query", o.per_query, "write per-query ratios to this CSV");

  auto* c_nov = app.add_subcommand("novelty", "entropy novelty of a rankings file");
  c_nov->add_option("--rankings", o.rankings, "rankings TSV")->required();
  c_nov->add_option("--out", o.out, "report output path (default: stdout)");

  CLI::Option* pl_lambda = nullptr;
  auto* c_pipe = app.add_subcommand("pipeline", "ingest, build-context, train, topk and evaluate");
  c_pipe->add_option("--edges", o.edges, "citation edge TSV")->required();
  c_pipe->add_option("--gold", o.gold, "optional gold pairs for evaluation");
  c_pipe->add_option("--out-dir", o.out_dir, "directory for all stage outputs")->required();
  add_context_flags(c_pipe, o, &pl_lambda);
  add_train_flags(c_pipe, o, nullptr);
  c_pipe->add_option("--k", o.k, "ranking and evaluation depth")->capture_default_str();
  c_pipe->add_option("--denominator", o.denominator, "divide by k or by each list's length")
      ->check(CLI::IsMember({"k", "list"}))
      ->capture_default_str();
  c_pipe->add_option("--workers", o.workers, "parallel workers for all stages")
      ->capture_default_str();
  c_pipe->add_flag("--model-text", o.pipeline_model_text, "also write model.txt");
  c_pipe->add_flag("--per-query", o.pipeline_per_query, "also write per_query.csv");

  auto* c_synth = app.add_subcommand("synth", "generate a synthetic citation corpus");
  c_synth->add_option("--out-dir", o.out_dir, "directory for edges/gold/labels files")->required();
  c_synth->add_option("--kind", o.kind, "communities or hub")
      ->check(CLI::IsMember({"communities", "hub"}))
      ->capture_default_str();
  c_synth->add_option("--nodes", o.nodes, "document count")->capture_default_str();
  c_synth->add_option("--communities", o.communities, "number of planted blocks")
      ->capture_default_str();
  c_synth->add_option("--p-in", o.p_in, "intra-block link probability")->capture_default_str();
  c_synth->add_option("--p-out", o.p_out, "inter-block link probability")->capture_default_str();
  c_synth->add_option("--hub-fraction", o.hub_fraction,
                      "fraction of documents citing the hub (kind=hub)")
      ->capture_default_str();
  c_synth->add_option("--background-p", o.background_p,
                      "background link probability among non-hub documents (kind=hub)")
      ->capture_default_str();
  c_synth->add_option("--seed", o.seed, "rng seed")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (c_ingest->parsed()) return run_ingest(o);
    if (c_build->parsed()) return run_build_context(o, bc_lambda->count() > 0);
    if (c_train->parsed())
      return o.resume ? run_train_resume(o, tr_epochs->count() > 0) : run_train_fresh(o);
    if (c_topk->parsed()) return run_topk(o);
    if (c_base->parsed()) return run_baseline(o);
    if (c_eval->parsed()) return run_evaluate(o, ev_k->count() > 0);
    if (c_nov->parsed()) return run_novelty(o);
    if (c_pipe->parsed()) return run_pipeline(o, pl_lambda->count() > 0);
    if (c_synth->parsed()) return run_synth(o);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const MissingInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const StageOrderError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
