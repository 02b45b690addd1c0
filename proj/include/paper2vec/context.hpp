#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "paper2vec/graph.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

// Walk-context weighting parameters. lambda, when set, fixes the log shift;
// otherwise it is selected so that roughly a fraction auto_q of the raw
// masses fall at or below the clip point.
struct ContextConfig {
  int win = 3;
  std::optional<double> lambda;
  double auto_q = 0.05;
  bool exclude_diagonal = true;
  double prune_threshold = 0.0;

  void validate() const {
    if (win < 1) throw Error("context: win must be >= 1");
    if (!lambda && !(auto_q > 0.0 && auto_q < 1.0))
      throw Error("context: lambda percentile must lie in (0,1)");
    if (!(prune_threshold >= 0.0)) throw Error("context: prune threshold must be >= 0");
  }
};

// One stored co-occurrence: x is the shifted-log weight (strictly positive
// for stored entries), f the raw walk mass backing it.
template <typename Scalar = double>
struct ContextEntry {
  Index source = 0;
  Index context = 0;
  Scalar x = 0;
  Scalar f = 0;
};

template <typename Scalar = double>
struct ContextMatrix {
  std::vector<ContextEntry<Scalar>> entries;
  Index node_count = 0;
  ContextConfig config;
  double resolved_lambda = 0.0;
};

namespace detail {

// Reusable dense workspace for walk propagation. Touched-index lists keep the
// cost proportional to the visited ball, and first-touch detection relies on
// all masses being strictly positive.
template <typename Scalar>
struct WalkScratch {
  Vector<Scalar> mass, cur, next;
  std::vector<Index> mass_touched, cur_touched, next_touched;

  void ensure(Index n) {
    if (mass.size() != n) {
      mass = Vector<Scalar>::Zero(n);
      cur = Vector<Scalar>::Zero(n);
      next = Vector<Scalar>::Zero(n);
      mass_touched.clear();
      cur_touched.clear();
      next_touched.clear();
    }
  }
};

// Sum over walk lengths k=1..win of (win+1-k) * P^k e_source, written as
// sorted (index, mass) pairs. Equivalent to accumulating every window
// placement of an origin-anchored walk of length win.
template <typename Scalar>
void accumulate_expected_visits(const CitationGraph& g, int win, Index source,
                                WalkScratch<Scalar>& s, std::vector<std::pair<Index, Scalar>>& out) {
  s.ensure(g.node_count());
  s.cur[source] = Scalar(1);
  s.cur_touched.push_back(source);
  for (int k = 1; k <= win; ++k) {
    const Scalar coeff = static_cast<Scalar>(win + 1 - k);
    for (Index i : s.cur_touched) {
      const auto nbrs = g.neighbors(i);
      if (nbrs.empty()) continue;
      const Scalar share = s.cur[i] / static_cast<Scalar>(nbrs.size());
      for (Index j : nbrs) {
        if (s.next[j] == Scalar(0)) s.next_touched.push_back(j);
        s.next[j] += share;
      }
    }
    for (Index j : s.next_touched) {
      if (s.mass[j] == Scalar(0)) s.mass_touched.push_back(j);
      s.mass[j] += coeff * s.next[j];
    }
    for (Index i : s.cur_touched) s.cur[i] = Scalar(0);
    s.cur_touched.clear();
    std::swap(s.cur, s.next);
    std::swap(s.cur_touched, s.next_touched);
  }
  std::sort(s.mass_touched.begin(), s.mass_touched.end());
  out.clear();
  out.reserve(s.mass_touched.size());
  for (Index i : s.mass_touched) out.emplace_back(i, s.mass[i]);
  for (Index i : s.cur_touched) s.cur[i] = Scalar(0);
  s.cur_touched.clear();
  for (Index i : s.mass_touched) s.mass[i] = Scalar(0);
  s.mass_touched.clear();
}

}  // namespace detail

// Expected visit mass around one source document.
template <typename Scalar = double>
Eigen::SparseVector<Scalar> expected_visits(const CitationGraph& g, int win, Index source) {
  if (win < 1) throw Error("expected_visits: win must be >= 1");
  g.neighbors(source);  // bounds check
  detail::WalkScratch<Scalar> scratch;
  std::vector<std::pair<Index, Scalar>> row;
  detail::accumulate_expected_visits(g, win, source, scratch, row);
  Eigen::SparseVector<Scalar> out(g.node_count());
  out.reserve(static_cast<Index>(row.size()));
  for (const auto& [j, m] : row) out.insert(j) = m;
  return out;
}

// Shift so that the mass at the q-th lower quantile lands exactly on the clip
// point. Rank convention: 1-based floor(q*N), clamped to [1, N]; entries at
// or below the selected mass get x <= 0 and are dropped downstream.
inline double select_lambda(std::vector<double> masses, double q) {
  if (masses.empty()) throw Error("no context mass; graph has no edges");
  if (!(q > 0.0 && q < 1.0)) throw Error("lambda percentile must lie in (0,1)");
  std::sort(masses.begin(), masses.end());
  const std::size_t n = masses.size();
  std::size_t rank = static_cast<std::size_t>(q * static_cast<double>(n));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return -std::log(masses[rank - 1]);
}

// Builds the full context matrix. Rows are computed per source (optionally in
// parallel over disjoint source ranges) and merged in source-index order, so
// the result does not depend on the worker count.
template <typename Scalar = double>
ContextMatrix<Scalar> build_context_matrix(const CitationGraph& g, const ContextConfig& config,
                                           int workers = 1) {
  config.validate();
  if (workers < 1) throw Error("context: workers must be >= 1");
  const Index n = g.node_count();
  ContextMatrix<Scalar> out;
  out.node_count = n;
  out.config = config;
  if (n == 0) {
    out.resolved_lambda = config.lambda.value_or(0.0);
    return out;
  }

  std::vector<std::vector<std::pair<Index, Scalar>>> rows(static_cast<std::size_t>(n));
  const int t = static_cast<int>(std::min<Index>(workers, n));
  auto run_range = [&](Index lo, Index hi) {
    detail::WalkScratch<Scalar> scratch;
    for (Index i = lo; i < hi; ++i)
      detail::accumulate_expected_visits(g, config.win, i, scratch, rows[static_cast<std::size_t>(i)]);
  };
  if (t <= 1) {
    run_range(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    const Index chunk = (n + t - 1) / t;
    for (int w = 0; w < t; ++w) {
      const Index lo = static_cast<Index>(w) * chunk;
      const Index hi = std::min<Index>(lo + chunk, n);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  auto keep = [&](Index i, Index j, Scalar m) {
    if (config.exclude_diagonal && i == j) return false;
    return static_cast<double>(m) > config.prune_threshold;
  };

  double lambda = 0.0;
  if (config.lambda) {
    lambda = *config.lambda;
  } else {
    std::vector<double> masses;
    for (Index i = 0; i < n; ++i)
      for (const auto& [j, m] : rows[static_cast<std::size_t>(i)])
        if (keep(i, j, m)) masses.push_back(static_cast<double>(m));
    lambda = select_lambda(std::move(masses), config.auto_q);
  }
  out.resolved_lambda = lambda;

  for (Index i = 0; i < n; ++i) {
    for (const auto& [j, m] : rows[static_cast<std::size_t>(i)]) {
      if (!keep(i, j, m)) continue;
      const Scalar x = std::log(m) + static_cast<Scalar>(lambda);
      if (x > Scalar(0)) out.entries.push_back({i, j, x, m});
    }
  }
  return out;
}

// Replication variant: average each entry with its transpose (a missing
// direction contributes zero) and store the mean for both directions.
template <typename Scalar>
ContextMatrix<Scalar> symmetrized(const ContextMatrix<Scalar>& m) {
  std::vector<ContextEntry<Scalar>> sorted = m.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::pair(a.source, a.context) < std::pair(b.source, b.context);
  });
  auto find = [&](Index i, Index j) -> const ContextEntry<Scalar>* {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), std::pair(i, j),
                               [](const auto& e, const auto& key) {
                                 return std::pair(e.source, e.context) < key;
                               });
    if (it != sorted.end() && it->source == i && it->context == j) return &*it;
    return nullptr;
  };

  ContextMatrix<Scalar> out;
  out.node_count = m.node_count;
  out.config = m.config;
  out.resolved_lambda = m.resolved_lambda;
  for (const auto& e : sorted) {
    const ContextEntry<Scalar>* t = find(e.context, e.source);
    const Scalar xbar = (e.x + (t ? t->x : Scalar(0))) / Scalar(2);
    const Scalar fbar = (e.f + (t ? t->f : Scalar(0))) / Scalar(2);
    if (!(xbar > Scalar(0)) || !(static_cast<double>(fbar) > m.config.prune_threshold)) continue;
    out.entries.push_back({e.source, e.context, xbar, fbar});
    if (!t) out.entries.push_back({e.context, e.source, xbar, fbar});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a.source, a.context) < std::pair(b.source, b.context);
  });
  return out;
}

}  // namespace paper2vec
