// File formats. Text formats are UTF-8 TSV with # comment lines; binary
// formats are little-endian regardless of host. Readers validate and throw
// ParseError with the offending line, writers emit floating-point text at 9
// significant digits.
#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paper2vec/context.hpp"
#include "paper2vec/eval.hpp"
#include "paper2vec/graph.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/trainer.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

namespace detail {

inline std::string g9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string g17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] inline void bad_line(std::string_view name, std::size_t line, std::string_view msg) {
  throw ParseError(std::string(name) + " line " + std::to_string(line) + ": " + std::string(msg));
}

inline std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// ids must survive both tab-separated and space-separated formats
inline bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') return false;
  return true;
}

inline double parse_double(std::string_view s, std::string_view name, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    bad_line(name, line, "expected a number, got '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, std::string_view name, std::size_t line) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    bad_line(name, line, "expected an integer, got '" + std::string(s) + "'");
  return v;
}

// getline with CRLF tolerance
inline bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline void put_bytes(std::ostream& out, const unsigned char* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  put_bytes(out, b, 2);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 8);
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void take_bytes(std::istream& in, unsigned char* p, std::size_t n, std::string_view what) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw ParseError("truncated " + std::string(what));
}

inline std::uint16_t take_u16(std::istream& in, std::string_view what) {
  unsigned char b[2];
  take_bytes(in, b, 2, what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t take_u32(std::istream& in, std::string_view what) {
  unsigned char b[4];
  take_bytes(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t take_u64(std::istream& in, std::string_view what) {
  unsigned char b[8];
  take_bytes(in, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float take_f32(std::istream& in, std::string_view what) {
  return std::bit_cast<float>(take_u32(in, what));
}

inline double take_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(take_u64(in, what));
}

inline void put_id(std::ostream& out, const std::string& id, std::string_view what) {
  if (id.size() > 0xffff) throw Error(std::string(what) + ": document id longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(id.size()));
  put_bytes(out, reinterpret_cast<const unsigned char*>(id.data()), id.size());
}

inline std::string take_id(std::istream& in, std::string_view what) {
  const std::uint16_t len = take_u16(in, what);
  std::string id(len, '\0');
  if (len > 0) take_bytes(in, reinterpret_cast<unsigned char*>(id.data()), len, what);
  if (!valid_token(id)) throw ParseError(std::string(what) + ": malformed document id");
  return id;
}

inline void expect_eof(std::istream& in, std::string_view what) {
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError(std::string(what) + ": trailing bytes after last record");
}

inline std::ifstream open_text_input(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace detail

// ---- edge files: citing_id<TAB>cited_id -----------------------------------

inline std::vector<EdgeRecord> read_edges(std::istream& in, std::string_view name = "edges") {
  std::vector<EdgeRecord> out;
  std::string line;
  std::size_t no = 0;
  while (detail::next_line(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2)
      detail::bad_line(name, no, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    if (!detail::valid_token(fields[0]) || !detail::valid_token(fields[1]))
      detail::bad_line(name, no, "document ids must be nonempty and whitespace-free");
    out.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  return out;
}

inline void write_edges(std::ostream& out, const std::vector<EdgeRecord>& records) {
  for (const auto& r : records) out << r.citing << '\t' << r.cited << '\n';
}

inline std::vector<EdgeRecord> read_edges_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_edges(in, p.string());
}

// ---- context cache --------------------------------------------------------

inline void write_context(std::ostream& out, const ContextMatrix<double>& m) {
  out << "#paper2vec-context v1 V=" << m.node_count << " win=" << m.config.win
      << " lambda=" << detail::g17(m.resolved_lambda) << '\n';
  for (const auto& e : m.entries)
    out << e.source << '\t' << e.context << '\t' << detail::g9(e.x) << '\t' << detail::g9(e.f)
        << '\n';
}

inline ContextMatrix<double> read_context(std::istream& in, std::string_view name = "context") {
  std::string line;
  if (!detail::next_line(in, line)) throw ParseError(std::string(name) + ": empty file");
  ContextMatrix<double> m;
  {
    unsigned long long v = 0;
    int win = 0;
    double lambda = 0.0;
    if (std::sscanf(line.c_str(), "#paper2vec-context v1 V=%llu win=%d lambda=%lf", &v, &win,
                    &lambda) != 3)
      detail::bad_line(name, 1, "bad header '" + line + "'");
    if (win < 1) detail::bad_line(name, 1, "win must be >= 1");
    m.node_count = static_cast<Index>(v);
    m.config.win = win;
    m.config.lambda = lambda;
    m.resolved_lambda = lambda;
  }
  std::size_t no = 1;
  while (detail::next_line(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 4)
      detail::bad_line(name, no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    ContextEntry<double> e;
    e.source = static_cast<Index>(detail::parse_int(fields[0], name, no));
    e.context = static_cast<Index>(detail::parse_int(fields[1], name, no));
    e.x = detail::parse_double(fields[2], name, no);
    e.f = detail::parse_double(fields[3], name, no);
    if (e.source < 0 || e.source >= m.node_count || e.context < 0 || e.context >= m.node_count)
      detail::bad_line(name, no, "entry index out of range");
    if (!(e.x > 0.0) || !std::isfinite(e.x)) detail::bad_line(name, no, "x must be finite and > 0");
    if (!(e.f > 0.0) || !std::isfinite(e.f)) detail::bad_line(name, no, "f must be finite and > 0");
    m.entries.push_back(e);
  }
  return m;
}

inline void write_context_file(const std::filesystem::path& p, const ContextMatrix<double>& m) {
  auto out = detail::open_output(p);
  write_context(out, m);
  if (!out) throw Error("failed writing " + p.string());
}

inline ContextMatrix<double> read_context_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_context(in, p.string());
}

// ---- model files: magic P2V1, u32 dim, u64 V, per-doc id + f32 vector -----

template <typename Scalar>
void write_model(std::ostream& out, const PaperVectors<Scalar>& pv) {
  out.write("P2V1", 4);
  detail::put_u32(out, static_cast<std::uint32_t>(pv.dim()));
  detail::put_u64(out, static_cast<std::uint64_t>(pv.size()));
  for (Index i = 0; i < pv.size(); ++i) {
    detail::put_id(out, pv.ids.id(i), "model file");
    for (Index c = 0; c < pv.dim(); ++c)
      detail::put_f32(out, static_cast<float>(pv.vectors(i, c)));
  }
}

inline PaperVectors<float> read_model(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::string_view(magic, 4) != "P2V1")
    throw ParseError("model file: bad magic");
  const std::uint32_t dim = detail::take_u32(in, "model file");
  const std::uint64_t v = detail::take_u64(in, "model file");
  if (dim < 1) throw ParseError("model file: dim must be >= 1");
  PaperVectors<float> pv;
  pv.vectors.resize(static_cast<Index>(v), static_cast<Index>(dim));
  pv.unembedded.assign(static_cast<std::size_t>(v), 0);
  for (std::uint64_t i = 0; i < v; ++i) {
    const std::string id = detail::take_id(in, "model file");
    if (pv.ids.find(id)) throw ParseError("model file: duplicate document id " + id);
    pv.ids.intern(id);
    for (std::uint32_t c = 0; c < dim; ++c)
      pv.vectors(static_cast<Index>(i), static_cast<Index>(c)) = detail::take_f32(in, "model file");
    if (pv.vectors.row(static_cast<Index>(i)).norm() == 0.0f)
      pv.unembedded[static_cast<std::size_t>(i)] = 1;
  }
  detail::expect_eof(in, "model file");
  return pv;
}

template <typename Scalar>
void write_model_file(const std::filesystem::path& p, const PaperVectors<Scalar>& pv) {
  auto out = detail::open_output(p);
  write_model(out, pv);
  if (!out) throw Error("failed writing " + p.string());
}

inline PaperVectors<float> read_model_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_model(in);
}

template <typename Scalar>
void write_model_text(std::ostream& out, const PaperVectors<Scalar>& pv) {
  for (Index i = 0; i < pv.size(); ++i) {
    out << pv.ids.id(i);
    for (Index c = 0; c < pv.dim(); ++c)
      out << ' ' << detail::g9(static_cast<double>(pv.vectors(i, c)));
    out << '\n';
  }
}

// ---- ranking files: query<TAB>rank<TAB>neighbor<TAB>score -----------------

inline void write_rankings(std::ostream& out, const RankingTable& table) {
  for (const auto& [query, list] : table.rows) {
    for (std::size_t r = 0; r < list.size(); ++r)
      out << query << '\t' << (r + 1) << '\t' << list[r].doc << '\t' << detail::g9(list[r].score)
          << '\n';
  }
}

inline RankingTable read_rankings(std::istream& in, std::string_view name = "rankings") {
  RankingTable table;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> slot;
  std::vector<std::unordered_set<std::string, StringHash, std::equal_to<>>> seen;
  std::string line;
  std::size_t no = 0;
  while (detail::next_line(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 4)
      detail::bad_line(name, no, "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    if (!detail::valid_token(fields[0]) || !detail::valid_token(fields[2]))
      detail::bad_line(name, no, "document ids must be nonempty and whitespace-free");
    const long long rank = detail::parse_int(fields[1], name, no);
    const double score = detail::parse_double(fields[3], name, no);
    if (!std::isfinite(score)) detail::bad_line(name, no, "score must be finite");
    if (fields[0] == fields[2]) detail::bad_line(name, no, "query listed as its own neighbor");
    auto it = slot.find(fields[0]);
    if (it == slot.end()) {
      it = slot.emplace(std::string(fields[0]), table.rows.size()).first;
      table.rows.emplace_back(std::string(fields[0]), std::vector<RankedDoc>{});
      seen.emplace_back();
    }
    auto& list = table.rows[it->second].second;
    if (rank != static_cast<long long>(list.size()) + 1)
      detail::bad_line(name, no, "rank " + std::to_string(rank) + " out of sequence for query " +
                                     std::string(fields[0]));
    if (!seen[it->second].emplace(fields[2]).second)
      detail::bad_line(name, no, "duplicate neighbor in one query's list");
    list.push_back({std::string(fields[2]), score});
  }
  for (const auto& [query, list] : table.rows)
    table.k = std::max(table.k, static_cast<int>(list.size()));
  return table;
}

inline void write_rankings_file(const std::filesystem::path& p, const RankingTable& table) {
  auto out = detail::open_output(p);
  write_rankings(out, table);
  if (!out) throw Error("failed writing " + p.string());
}

inline RankingTable read_rankings_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_rankings(in, p.string());
}

// ---- gold files: id_a<TAB>id_b<TAB>score ----------------------------------

inline GoldStandard read_gold(std::istream& in, std::string_view name = "gold") {
  GoldStandard gold;
  std::string line;
  std::size_t no = 0;
  while (detail::next_line(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 3)
      detail::bad_line(name, no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    if (!detail::valid_token(fields[0]) || !detail::valid_token(fields[1]))
      detail::bad_line(name, no, "document ids must be nonempty and whitespace-free");
    const double score = detail::parse_double(fields[2], name, no);
    try {
      gold.add(std::string(fields[0]), std::string(fields[1]), score);
    } catch (const Error& e) {
      detail::bad_line(name, no, e.what());
    }
  }
  return gold;
}

inline void write_gold(std::ostream& out, std::span<const GoldRecord> records) {
  for (const auto& r : records)
    out << r.a << '\t' << r.b << '\t' << detail::g9(r.score) << '\n';
}

inline GoldStandard read_gold_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_gold(in, p.string());
}

// ---- metric reports -------------------------------------------------------

inline void write_report(std::ostream& out, std::span<const MetricReport> reports) {
  for (const auto& r : reports)
    out << r.metric << '\t' << r.k << '\t' << detail::g9(r.value) << '\t' << r.evaluated << '\t'
        << r.skipped << '\n';
}

inline std::vector<MetricReport> read_report(std::istream& in, std::string_view name = "report") {
  std::vector<MetricReport> out;
  std::string line;
  std::size_t no = 0;
  while (detail::next_line(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 5)
      detail::bad_line(name, no, "expected 5 tab-separated fields, got " + std::to_string(fields.size()));
    MetricReport r;
    r.metric = std::string(fields[0]);
    r.k = static_cast<int>(detail::parse_int(fields[1], name, no));
    r.value = detail::parse_double(fields[2], name, no);
    r.evaluated = static_cast<Index>(detail::parse_int(fields[3], name, no));
    r.skipped = static_cast<Index>(detail::parse_int(fields[4], name, no));
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_per_query_csv(std::ostream& out, const MetricReport& report) {
  out << "query,value\n";
  for (const auto& [query, value] : report.per_query)
    out << query << ',' << detail::g9(value) << '\n';
}

// ---- train state checkpoints: magic P2VS ----------------------------------

inline void write_state(std::ostream& out, const TrainState& state) {
  const auto& m = state.model;
  if (m.node_count() != state.ids.size()) throw Error("state: id map does not match model");
  out.write("P2VS", 4);
  detail::put_u32(out, 1);  // version
  detail::put_u32(out, static_cast<std::uint32_t>(state.context.win));
  detail::put_u32(out, state.context.exclude_diagonal ? 1 : 0);
  detail::put_u32(out, state.context.lambda ? 0 : 1);  // was auto
  detail::put_f64(out, state.context.auto_q);
  detail::put_f64(out, state.resolved_lambda);
  detail::put_f64(out, state.context.prune_threshold);
  detail::put_u32(out, static_cast<std::uint32_t>(m.dim()));
  detail::put_f64(out, state.train.alpha);
  detail::put_u32(out, m.optimizer == Optimizer::AdaptivePerParameter ? 1 : 0);
  detail::put_u64(out, m.seed);
  detail::put_u64(out, state.updates);
  detail::put_u64(out, static_cast<std::uint64_t>(m.node_count()));
  for (Index i = 0; i < m.node_count(); ++i) detail::put_id(out, state.ids.id(i), "state file");
  auto put_matrix = [&](const RowMatrix<double>& mat) {
    for (Index k = 0; k < mat.size(); ++k) detail::put_f64(out, mat.data()[k]);
  };
  auto put_vector = [&](const Vector<double>& vec) {
    for (Index k = 0; k < vec.size(); ++k) detail::put_f64(out, vec(k));
  };
  put_matrix(m.w);
  put_matrix(m.w_tilde);
  put_vector(m.b);
  put_vector(m.b_tilde);
  if (m.optimizer == Optimizer::AdaptivePerParameter) {
    put_matrix(m.grad_sq_w);
    put_matrix(m.grad_sq_w_tilde);
    put_vector(m.grad_sq_b);
    put_vector(m.grad_sq_b_tilde);
  }
}

inline TrainState read_state(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::string_view(magic, 4) != "P2VS")
    throw ParseError("state file: bad magic");
  const char* what = "state file";
  if (detail::take_u32(in, what) != 1) throw ParseError("state file: unsupported version");
  TrainState state;
  state.context.win = static_cast<int>(detail::take_u32(in, what));
  state.context.exclude_diagonal = detail::take_u32(in, what) != 0;
  const bool was_auto = detail::take_u32(in, what) != 0;
  state.context.auto_q = detail::take_f64(in, what);
  state.resolved_lambda = detail::take_f64(in, what);
  state.context.prune_threshold = detail::take_f64(in, what);
  if (!was_auto) state.context.lambda = state.resolved_lambda;
  const std::uint32_t dim = detail::take_u32(in, what);
  state.train.alpha = detail::take_f64(in, what);
  state.train.optimizer =
      detail::take_u32(in, what) != 0 ? Optimizer::AdaptivePerParameter : Optimizer::PlainSgd;
  state.train.seed = detail::take_u64(in, what);
  state.updates = detail::take_u64(in, what);
  const std::uint64_t v = detail::take_u64(in, what);
  if (state.context.win < 1 || dim < 1) throw ParseError("state file: bad dimensions");
  state.train.dim = static_cast<Index>(dim);
  for (std::uint64_t i = 0; i < v; ++i) {
    const std::string id = detail::take_id(in, what);
    if (state.ids.find(id)) throw ParseError("state file: duplicate document id " + id);
    state.ids.intern(id);
  }
  auto& m = state.model;
  m.optimizer = state.train.optimizer;
  m.seed = state.train.seed;
  const Index n = static_cast<Index>(v);
  const Index d = static_cast<Index>(dim);
  auto take_matrix = [&](RowMatrix<double>& mat) {
    mat.resize(n, d);
    for (Index k = 0; k < mat.size(); ++k) mat.data()[k] = detail::take_f64(in, what);
  };
  auto take_vector = [&](Vector<double>& vec) {
    vec.resize(n);
    for (Index k = 0; k < n; ++k) vec(k) = detail::take_f64(in, what);
  };
  take_matrix(m.w);
  take_matrix(m.w_tilde);
  take_vector(m.b);
  take_vector(m.b_tilde);
  if (m.optimizer == Optimizer::AdaptivePerParameter) {
    take_matrix(m.grad_sq_w);
    take_matrix(m.grad_sq_w_tilde);
    take_vector(m.grad_sq_b);
    take_vector(m.grad_sq_b_tilde);
  }
  detail::expect_eof(in, what);
  return state;
}

inline void write_state_file(const std::filesystem::path& p, const TrainState& state) {
  auto out = detail::open_output(p);
  write_state(out, state);
  if (!out) throw Error("failed writing " + p.string());
}

inline TrainState read_state_file(const std::filesystem::path& p) {
  auto in = detail::open_text_input(p);
  return read_state(in);
}

}  // namespace paper2vec
