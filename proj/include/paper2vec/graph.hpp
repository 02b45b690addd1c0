#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paper2vec/types.hpp"

namespace paper2vec {

// One directed citation: `citing` cites `cited`. Ids are opaque nonempty tokens.
struct EdgeRecord {
  std::string citing;
  std::string cited;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// External id <-> dense index bijection. Indices are assigned contiguously
// from 0 in first-seen order, which makes ingestion deterministic.
class IdMap {
 public:
  Index intern(std::string_view id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    const Index idx = static_cast<Index>(ids_.size());
    ids_.emplace_back(id);
    index_.emplace(ids_.back(), idx);
    return idx;
  }

  std::optional<Index> find(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& id(Index i) const {
    if (i < 0 || i >= size()) throw LookupError("unknown document index " + std::to_string(i));
    return ids_[static_cast<std::size_t>(i)];
  }

  Index size() const { return static_cast<Index>(ids_.size()); }
  bool empty() const { return ids_.empty(); }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index, StringHash, std::equal_to<>> index_;
};

namespace detail {

// Compressed sparse rows over (row, value) pairs sorted by row then value.
struct Csr {
  std::vector<Index> offsets;  // size V+1
  std::vector<Index> targets;

  void assemble(std::vector<std::pair<Index, Index>>& pairs, Index n) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [src, dst] : pairs) offsets[static_cast<std::size_t>(src) + 1]++;
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    targets.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) targets[i] = pairs[i].second;
  }

  std::span<const Index> row(Index i) const {
    const auto lo = static_cast<std::size_t>(offsets[static_cast<std::size_t>(i)]);
    const auto hi = static_cast<std::size_t>(offsets[static_cast<std::size_t>(i) + 1]);
    return {targets.data() + lo, hi - lo};
  }
};

}  // namespace detail

// Citation graph over interned documents. Keeps the directed structure
// (cited_by / cites) plus the undirected, deduplicated, self-loop-free
// adjacency used by walk propagation. neighbors(i) == cited_by(i) U cites(i).
class CitationGraph {
 public:
  CitationGraph() = default;

  // `ids` may pre-seed the interning order (used by resumed runs so existing
  // documents keep their indices). Self-citations are dropped entirely;
  // duplicate records collapse.
  static CitationGraph from_records(const std::vector<EdgeRecord>& records, IdMap ids = {}) {
    CitationGraph g;
    g.ids_ = std::move(ids);
    std::vector<std::pair<Index, Index>> out_pairs, in_pairs, adj_pairs;
    out_pairs.reserve(records.size());
    in_pairs.reserve(records.size());
    adj_pairs.reserve(records.size() * 2);
    for (const auto& r : records) {
      if (r.citing.empty() || r.cited.empty()) throw Error("edge record with empty document id");
      const Index a = g.ids_.intern(r.citing);
      const Index b = g.ids_.intern(r.cited);
      if (a == b) continue;
      out_pairs.emplace_back(a, b);
      in_pairs.emplace_back(b, a);
      adj_pairs.emplace_back(a, b);
      adj_pairs.emplace_back(b, a);
    }
    const Index n = g.ids_.size();
    g.out_.assemble(out_pairs, n);
    g.in_.assemble(in_pairs, n);
    g.adj_.assemble(adj_pairs, n);
    return g;
  }

  Index node_count() const { return ids_.size(); }

  // Undirected neighborhood, sorted ascending.
  std::span<const Index> neighbors(Index i) const {
    check_node(i);
    return adj_.row(i);
  }

  // Documents that cite i.
  std::span<const Index> cited_by(Index i) const {
    check_node(i);
    return in_.row(i);
  }

  // Documents that i cites.
  std::span<const Index> cites(Index i) const {
    check_node(i);
    return out_.row(i);
  }

  Index degree(Index i) const { return static_cast<Index>(neighbors(i).size()); }

  Index edge_count() const { return static_cast<Index>(adj_.targets.size()) / 2; }

  const IdMap& ids() const { return ids_; }

  // Directed records in (source index, target index) order. Isolated
  // documents have no representation in an edge list.
  std::vector<EdgeRecord> directed_records() const {
    std::vector<EdgeRecord> out;
    out.reserve(out_.targets.size());
    for (Index i = 0; i < node_count(); ++i) {
      for (Index j : cites(i)) out.push_back({ids_.id(i), ids_.id(j)});
    }
    return out;
  }

 private:
  void check_node(Index i) const {
    if (i < 0 || i >= node_count()) throw LookupError("unknown document index " + std::to_string(i));
  }

  IdMap ids_;
  detail::Csr adj_, in_, out_;
};

inline CitationGraph ingest_edges(const std::vector<EdgeRecord>& records) {
  return CitationGraph::from_records(records);
}

// Row i of the walk transition matrix: probability 1/degree(i) on each
// undirected neighbor. Rows of isolated documents are empty.
template <typename Scalar = double>
Eigen::SparseVector<Scalar> transition_row(const CitationGraph& g, Index i) {
  const auto nbrs = g.neighbors(i);
  Eigen::SparseVector<Scalar> row(g.node_count());
  if (nbrs.empty()) return row;
  row.reserve(static_cast<Index>(nbrs.size()));
  const Scalar p = Scalar(1) / static_cast<Scalar>(nbrs.size());
  for (Index j : nbrs) row.insert(j) = p;  // ascending inserts, stays compressed
  return row;
}

// Column i holds document i's outgoing transition probabilities, so
// multiplying a column distribution by this matrix advances a walk one step.
template <typename Scalar = double>
Eigen::SparseMatrix<Scalar> walk_operator(const CitationGraph& g) {
  const Index n = g.node_count();
  std::vector<Eigen::Triplet<Scalar>> trips;
  for (Index i = 0; i < n; ++i) {
    const auto nbrs = g.neighbors(i);
    if (nbrs.empty()) continue;
    const Scalar p = Scalar(1) / static_cast<Scalar>(nbrs.size());
    for (Index j : nbrs) trips.emplace_back(j, i, p);
  }
  Eigen::SparseMatrix<Scalar> m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace paper2vec
