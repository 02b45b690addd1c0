#pragma once

#include <algorithm>
#include <deque>
#include <vector>

#include "paper2vec/context.hpp"
#include "paper2vec/graph.hpp"
#include "paper2vec/trainer.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

struct OnlineUpdateStats {
  Index new_documents = 0;
  Index affected_sources = 0;
  Index retrained_entries = 0;
};

// Incremental inclusion of freshly arrived citations. Documents keep their
// interned indices, new ones get fresh init rows, and only context rows of
// sources within win hops of a delta-edge endpoint are rebuilt and retrained.
// A walk of length <= win can only cross a new edge if its origin lies inside
// that ball, so rows outside it are untouched by construction. The stored
// (already resolved) lambda is reused as a fixed shift.
inline OnlineUpdateStats online_update(TrainState& state, const std::vector<EdgeRecord>& base,
                                       const std::vector<EdgeRecord>& delta, int epochs,
                                       int workers = 1) {
  if (epochs < 1) throw Error("online update: epochs must be >= 1");
  if (workers < 1) throw Error("online update: workers must be >= 1");
  OnlineUpdateStats stats;
  if (delta.empty()) return stats;

  std::vector<EdgeRecord> merged = base;
  merged.insert(merged.end(), delta.begin(), delta.end());
  CitationGraph g = CitationGraph::from_records(merged, state.ids);
  const Index old_n = state.model.node_count();
  const Index new_n = g.node_count();
  grow_model(state.model, new_n);
  stats.new_documents = new_n - old_n;

  // breadth-first ball of radius win around every delta endpoint
  std::vector<int> dist(static_cast<std::size_t>(new_n), -1);
  std::deque<Index> queue;
  for (const auto& r : delta) {
    for (const auto& id : {r.citing, r.cited}) {
      const auto idx = g.ids().find(id);
      if (!idx) throw Error("online update: delta endpoint missing after merge");
      if (dist[static_cast<std::size_t>(*idx)] < 0) {
        dist[static_cast<std::size_t>(*idx)] = 0;
        queue.push_back(*idx);
      }
    }
  }
  std::vector<Index> affected;
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    affected.push_back(u);
    if (dist[static_cast<std::size_t>(u)] >= state.context.win) continue;
    for (Index v : g.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  std::sort(affected.begin(), affected.end());
  stats.affected_sources = static_cast<Index>(affected.size());

  std::vector<ContextEntry<double>> entries;
  {
    detail::WalkScratch<double> scratch;
    std::vector<std::pair<Index, double>> row;
    for (Index i : affected) {
      detail::accumulate_expected_visits(g, state.context.win, i, scratch, row);
      for (const auto& [j, m] : row) {
        if (state.context.exclude_diagonal && i == j) continue;
        if (!(m > state.context.prune_threshold)) continue;
        const double x = std::log(m) + state.resolved_lambda;
        if (x > 0.0) entries.push_back({i, j, x, m});
      }
    }
  }
  stats.retrained_entries = static_cast<Index>(entries.size());

  TrainConfig config = state.train;
  config.workers = workers;
  const std::uint64_t offset = (state.updates + 1) << 32;
  run_epochs(state.model, std::span<const ContextEntry<double>>(entries), config, epochs, offset);
  state.updates += 1;
  state.ids = g.ids();
  return stats;
}

}  // namespace paper2vec
