#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "paper2vec/graph.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

struct GoldRecord {
  std::string a;
  std::string b;
  double score = 0.0;
};

// Symmetric relevance judgments over external ids. A pair may be added twice
// with the same score; a contradicting score is an error.
class GoldStandard {
 public:
  void add(const std::string& a, const std::string& b, double score) {
    if (a.empty() || b.empty()) throw Error("gold: empty document id");
    if (!std::isfinite(score)) throw Error("gold: non-finite score for (" + a + ", " + b + ")");
    const std::string key = canonical(a, b);
    auto it = pairs_.find(key);
    if (it != pairs_.end()) {
      if (it->second != score)
        throw Error("gold: conflicting scores for (" + a + ", " + b + ")");
      return;
    }
    pairs_.emplace(key, score);
    partners_[a].emplace_back(b, score);
    if (a != b) partners_[b].emplace_back(a, score);
  }

  std::optional<double> score(std::string_view a, std::string_view b) const {
    auto it = pairs_.find(canonical(a, b));
    if (it == pairs_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(std::string_view id) const { return partners_.find(id) != partners_.end(); }

  std::span<const std::pair<std::string, double>> partners(std::string_view id) const {
    auto it = partners_.find(id);
    if (it == partners_.end()) return {};
    return it->second;
  }

  std::size_t pair_count() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  static std::string canonical(std::string_view a, std::string_view b) {
    if (b < a) std::swap(a, b);
    std::string key;
    key.reserve(a.size() + b.size() + 1);
    key.append(a);
    key.push_back('\t');  // ids are tab-free tokens
    key.append(b);
    return key;
  }

  std::unordered_map<std::string, double, StringHash, std::equal_to<>> pairs_;
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>, StringHash,
                     std::equal_to<>>
      partners_;
};

// K highest-scored gold partners of one document; ties break toward the
// lexicographically smaller id.
inline std::vector<std::pair<std::string, double>> gold_top_k(const GoldStandard& gold,
                                                              std::string_view id, int k) {
  if (k < 1) throw Error("gold_top_k: K must be >= 1");
  if (!gold.contains(id)) throw LookupError("no gold data for document " + std::string(id));
  const auto src = gold.partners(id);
  std::vector<std::pair<std::string, double>> out(src.begin(), src.end());
  const auto cmp = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), cmp);
  out.resize(keep);
  return out;
}

struct MetricReport {
  std::string metric;
  int k = 0;
  double value = 0.0;
  Index evaluated = 0;
  Index skipped = 0;
  std::vector<std::pair<std::string, double>> per_query;  // filled on request
};

// When a system list holds fewer than K items, the ratio may divide by K
// (penalizing short lists) or by the list length actually compared.
enum class RatioDenominator { FixedK, ListLength };

// Mean over evaluable queries of |system top-K  intersect  gold top-K| / K.
// Queries absent from the gold standard are skipped and counted.
inline MetricReport intersection_ratio(const RankingTable& system, const GoldStandard& gold, int k,
                                       RatioDenominator denom = RatioDenominator::FixedK,
                                       bool collect_per_query = false) {
  if (k < 1) throw Error("intersection_ratio: K must be >= 1");
  MetricReport report;
  report.metric = "intersection_ratio";
  report.k = k;
  double sum = 0.0;
  for (const auto& [query, list] : system.rows) {
    if (!gold.contains(query)) {
      ++report.skipped;
      continue;
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), list.size());
    std::unordered_set<std::string_view> sys;
    sys.reserve(take * 2);
    for (std::size_t r = 0; r < take; ++r) sys.insert(list[r].doc);
    std::size_t inter = 0;
    for (const auto& [doc, score] : gold_top_k(gold, query, k))
      if (sys.count(doc)) ++inter;
    double ratio = 0.0;
    const std::size_t d = denom == RatioDenominator::FixedK ? static_cast<std::size_t>(k) : take;
    if (d > 0) ratio = static_cast<double>(inter) / static_cast<double>(d);
    sum += ratio;
    ++report.evaluated;
    if (collect_per_query) report.per_query.emplace_back(query, ratio);
  }
  if (report.evaluated == 0)
    throw Error("intersection_ratio: no evaluable queries (rankings and gold share no documents)");
  report.value = sum / static_cast<double>(report.evaluated);
  return report;
}

// Shannon entropy of how recommendation slots spread over documents:
// p_i = (number of lists containing document i) / (total list slots),
// novelty = -sum p_i ln p_i. Concentrated recommenders score low.
inline MetricReport entropy_novelty(const RankingTable& table) {
  if (table.rows.empty()) throw Error("entropy_novelty: ranking table is empty");
  MetricReport report;
  report.metric = "entropy_novelty";
  report.k = table.k;
  std::unordered_map<std::string_view, Index> counts;
  std::size_t total = 0;
  for (const auto& [query, list] : table.rows) {
    total += list.size();
    if (list.empty())
      ++report.skipped;
    else
      ++report.evaluated;
    for (const auto& rd : list) ++counts[rd.doc];  // a doc appears at most once per list
  }
  if (total == 0) throw Error("entropy_novelty: all ranking lists are empty");
  std::vector<std::pair<std::string_view, Index>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  double novelty = 0.0;
  for (const auto& [doc, c] : sorted) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    novelty -= p * std::log(p);
  }
  report.value = novelty;
  return report;
}

}  // namespace paper2vec
