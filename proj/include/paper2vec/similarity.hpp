#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "paper2vec/graph.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

// Finalized document vectors: L2-normalized rows keyed by document id.
// A document whose trained vector was exactly zero cannot be normalized; its
// row stays zero and the unembedded flag is set.
template <typename Scalar = float>
struct PaperVectors {
  IdMap ids;
  RowMatrix<Scalar> vectors;
  std::vector<std::uint8_t> unembedded;

  Index size() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
  bool flagged(Index i) const { return unembedded[static_cast<std::size_t>(i)] != 0; }

  void check_embedded(Index i) const {
    if (i < 0 || i >= size()) throw LookupError("unknown document index " + std::to_string(i));
    if (flagged(i)) throw LookupError("no embedding for document " + ids.id(i));
  }
};

struct ScoredDoc {
  Index doc = 0;
  double score = 0.0;
};

struct RankedDoc {
  std::string doc;
  double score = 0.0;
};

// Per-query ordered neighbor lists, keyed by external id. Both evaluation
// metrics consume this shape, whether produced in-process or read from disk.
struct RankingTable {
  int k = 0;
  std::vector<std::pair<std::string, std::vector<RankedDoc>>> rows;
};

template <typename Scalar>
double cosine(const PaperVectors<Scalar>& pv, Index i, Index j) {
  pv.check_embedded(i);
  pv.check_embedded(j);
  return static_cast<double>(pv.vectors.row(i).dot(pv.vectors.row(j)));
}

// Exhaustive top-K by cosine. Candidates are all embedded documents except
// the query; ties break toward the smaller internal index.
template <typename Scalar>
std::vector<ScoredDoc> top_k(const PaperVectors<Scalar>& pv, Index i, int k) {
  if (k < 1) throw Error("top_k: K must be >= 1");
  pv.check_embedded(i);
  Vector<Scalar> scores = pv.vectors * pv.vectors.row(i).transpose();
  std::vector<ScoredDoc> cand;
  cand.reserve(static_cast<std::size_t>(pv.size()));
  for (Index j = 0; j < pv.size(); ++j) {
    if (j == i || pv.flagged(j)) continue;
    cand.push_back({j, static_cast<double>(scores(j))});
  }
  const auto cmp = [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc < b.doc;
  };
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(), cmp);
  cand.resize(keep);
  return cand;
}

// top_k for every embedded document, in internal index order. Parallel
// workers fill disjoint preassigned slots, so results are worker-invariant.
template <typename Scalar>
RankingTable all_top_k(const PaperVectors<Scalar>& pv, int k, int workers = 1) {
  if (k < 1) throw Error("all_top_k: K must be >= 1");
  if (workers < 1) throw Error("all_top_k: workers must be >= 1");
  std::vector<Index> queries;
  for (Index i = 0; i < pv.size(); ++i)
    if (!pv.flagged(i)) queries.push_back(i);

  std::vector<std::vector<ScoredDoc>> lists(queries.size());
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t q = lo; q < hi; ++q) lists[q] = top_k(pv, queries[q], k);
  };
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(queries.size(), 1));
  if (t <= 1) {
    run_range(0, queries.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.size() + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(lo + chunk, queries.size());
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  RankingTable table;
  table.k = k;
  table.rows.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<RankedDoc> row;
    row.reserve(lists[q].size());
    for (const auto& sd : lists[q]) row.push_back({pv.ids.id(sd.doc), sd.score});
    table.rows.emplace_back(pv.ids.id(queries[q]), std::move(row));
  }
  return table;
}

}  // namespace paper2vec
