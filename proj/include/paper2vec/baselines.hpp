#pragma once

#include <algorithm>
#include <span>
#include <thread>
#include <vector>

#include "paper2vec/graph.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

namespace detail {

inline Index intersection_size(std::span<const Index> a, std::span<const Index> b) {
  Index count = 0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (b[ib] < a[ia]) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace detail

// Jaccard overlap of the combined citation neighborhoods (cited_by U cites).
// Self-citations are dropped at ingestion, so that union is exactly the
// undirected adjacency list. Two isolated documents score 0.
inline double amsler(const CitationGraph& g, Index i, Index j) {
  const auto a = g.neighbors(i);
  const auto b = g.neighbors(j);
  const Index inter = detail::intersection_size(a, b);
  const Index uni = static_cast<Index>(a.size() + b.size()) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Number of documents citing both i and j.
inline Index cocitation(const CitationGraph& g, Index i, Index j) {
  return detail::intersection_size(g.cited_by(i), g.cited_by(j));
}

// Number of documents cited by both i and j.
inline Index bibliographic_coupling(const CitationGraph& g, Index i, Index j) {
  return detail::intersection_size(g.cites(i), g.cites(j));
}

enum class BaselineMeasure { Amsler, Cocitation, Coupling };

inline double baseline_score(const CitationGraph& g, BaselineMeasure m, Index i, Index j) {
  switch (m) {
    case BaselineMeasure::Amsler:
      return amsler(g, i, j);
    case BaselineMeasure::Cocitation:
      return static_cast<double>(cocitation(g, i, j));
    default:
      return static_cast<double>(bibliographic_coupling(g, i, j));
  }
}

// Everything within two undirected hops of i, excluding i, sorted ascending.
// All three measures need a shared neighbor (in some orientation) to be
// nonzero, and shared neighbors imply an undirected 2-hop path, so scanning
// this ball loses nothing against a full scan.
inline std::vector<Index> two_hop_candidates(const CitationGraph& g, Index i) {
  std::vector<Index> out;
  for (Index j : g.neighbors(i)) {
    out.push_back(j);
    const auto second = g.neighbors(j);
    out.insert(out.end(), second.begin(), second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), i), out.end());
  return out;
}

// Top-K by a classical measure. Only strictly positive scores rank;
// ties break toward the smaller internal index.
inline std::vector<ScoredDoc> baseline_top_k(const CitationGraph& g, BaselineMeasure m, Index i,
                                             int k) {
  if (k < 1) throw Error("baseline_top_k: K must be >= 1");
  g.neighbors(i);  // bounds check
  std::vector<ScoredDoc> cand;
  for (Index j : two_hop_candidates(g, i)) {
    const double s = baseline_score(g, m, i, j);
    if (s > 0.0) cand.push_back({j, s});
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

// baseline_top_k for every document, in index order. Lists may hold fewer
// than K items; documents with no positive-scoring partner get empty lists.
inline RankingTable baseline_all_top_k(const CitationGraph& g, BaselineMeasure m, int k,
                                       int workers = 1) {
  if (k < 1) throw Error("baseline_all_top_k: K must be >= 1");
  if (workers < 1) throw Error("baseline_all_top_k: workers must be >= 1");
  const Index n = g.node_count();
  std::vector<std::vector<ScoredDoc>> lists(static_cast<std::size_t>(n));
  auto run_range = [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) lists[static_cast<std::size_t>(i)] = baseline_top_k(g, m, i, k);
  };
  const Index t = std::min<Index>(workers, std::max<Index>(n, 1));
  if (t <= 1) {
    run_range(0, n);
  } else {
    std::vector<std::thread> pool;
    const Index chunk = (n + t - 1) / t;
    for (Index w = 0; w < t; ++w) {
      const Index lo = w * chunk;
      const Index hi = std::min<Index>(lo + chunk, n);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  RankingTable table;
  table.k = k;
  table.rows.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::vector<RankedDoc> row;
    row.reserve(lists[static_cast<std::size_t>(i)].size());
    for (const auto& sd : lists[static_cast<std::size_t>(i)]) row.push_back({g.ids().id(sd.doc), sd.score});
    table.rows.emplace_back(g.ids().id(i), std::move(row));
  }
  return table;
}

}  // namespace paper2vec
