#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "paper2vec/eval.hpp"
#include "paper2vec/graph.hpp"
#include "paper2vec/rng.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

struct SynthConfig {
  Index nodes = 200;
  int communities = 2;
  double p_in = 0.1;
  double p_out = 0.005;
  std::uint64_t seed = 7;

  void validate() const {
    if (nodes < 1) throw Error("synth: nodes must be >= 1");
    if (communities < 1 || static_cast<Index>(communities) > nodes)
      throw Error("synth: communities must lie in [1, nodes]");
    if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0))
      throw Error("synth: edge probabilities must lie in [0, 1]");
  }
};

struct SynthData {
  std::vector<EdgeRecord> edges;
  std::vector<std::string> ids;  // node -> external id
  std::vector<int> community;    // node -> block label
};

namespace detail {

inline std::string synth_label(char prefix, Index value, Index max_value) {
  int width = 1;
  for (Index v = max_value; v >= 10; v /= 10) ++width;
  width = std::clamp(width, 4, 19);  // a 64-bit count has at most 19 digits
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*lld", prefix, width, static_cast<long long>(value));
  return buf;
}

}  // namespace detail

// Planted-partition citation graph: round-robin block labels, each unordered
// pair linked with p_in inside a block and p_out across blocks, citation
// direction a fair coin. External ids go through a seeded permutation so that
// lexicographic id order carries no information about block structure.
inline SynthData make_community_graph(const SynthConfig& config) {
  config.validate();
  SynthData data;
  const Index n = config.nodes;
  data.community.resize(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v)
    data.community[static_cast<std::size_t>(v)] = static_cast<int>(v) % config.communities;

  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) perm[static_cast<std::size_t>(v)] = v;
  Rng label_rng(mix_seed(config.seed, 0x6c6162656cULL));
  fisher_yates(perm, label_rng);
  data.ids.resize(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v)
    data.ids[static_cast<std::size_t>(v)] = detail::synth_label('p', perm[static_cast<std::size_t>(v)], n - 1);

  Rng edge_rng(mix_seed(config.seed, 0x6564676573ULL));
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const bool same =
          data.community[static_cast<std::size_t>(u)] == data.community[static_cast<std::size_t>(v)];
      if (!edge_rng.bernoulli(same ? config.p_in : config.p_out)) continue;
      if (edge_rng.bernoulli(0.5))
        data.edges.push_back({data.ids[static_cast<std::size_t>(u)], data.ids[static_cast<std::size_t>(v)]});
      else
        data.edges.push_back({data.ids[static_cast<std::size_t>(v)], data.ids[static_cast<std::size_t>(u)]});
    }
  }
  return data;
}

// Co-membership gold: every same-block pair scores 1.
inline std::vector<GoldRecord> community_gold(const SynthData& data) {
  std::vector<GoldRecord> gold;
  const Index n = static_cast<Index>(data.ids.size());
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (data.community[static_cast<std::size_t>(u)] == data.community[static_cast<std::size_t>(v)])
        gold.push_back({data.ids[static_cast<std::size_t>(u)], data.ids[static_cast<std::size_t>(v)], 1.0});
  return gold;
}

// Popularity-skewed graph: node 0 is cited by a fixed fraction of the others,
// on top of sparse uniform background citations. Community labels are not
// meaningful here; the structure exists to stress popularity bias.
inline SynthData make_hub_graph(Index nodes, double hub_fraction, double background_p,
                                std::uint64_t seed) {
  if (nodes < 2) throw Error("synth: hub graph needs >= 2 nodes");
  if (!(hub_fraction >= 0.0 && hub_fraction <= 1.0) || !(background_p >= 0.0 && background_p <= 1.0))
    throw Error("synth: probabilities must lie in [0, 1]");
  SynthData data;
  data.ids.resize(static_cast<std::size_t>(nodes));
  data.community.assign(static_cast<std::size_t>(nodes), 0);
  for (Index v = 0; v < nodes; ++v)
    data.ids[static_cast<std::size_t>(v)] = detail::synth_label('h', v, nodes - 1);

  std::vector<Index> others;
  for (Index v = 1; v < nodes; ++v) others.push_back(v);
  Rng hub_rng(mix_seed(seed, 0x687562ULL));
  fisher_yates(others, hub_rng);
  const auto citers = static_cast<std::size_t>(hub_fraction * static_cast<double>(nodes - 1) + 0.5);
  for (std::size_t i = 0; i < citers && i < others.size(); ++i)
    data.edges.push_back({data.ids[static_cast<std::size_t>(others[i])], data.ids[0]});

  Rng bg_rng(mix_seed(seed, 0x6267ULL));
  for (Index u = 1; u < nodes; ++u) {
    for (Index v = u + 1; v < nodes; ++v) {
      if (!bg_rng.bernoulli(background_p)) continue;
      if (bg_rng.bernoulli(0.5))
        data.edges.push_back({data.ids[static_cast<std::size_t>(u)], data.ids[static_cast<std::size_t>(v)]});
      else
        data.edges.push_back({data.ids[static_cast<std::size_t>(v)], data.ids[static_cast<std::size_t>(u)]});
    }
  }
  return data;
}

}  // namespace paper2vec
