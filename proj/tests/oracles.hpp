// Test-only reference implementations. Deliberately naive: exhaustive walk
// enumeration, literal dense formula evaluation, finite differences, and
// full-scan retrieval, used as independent oracles for the fast paths.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <vector>

#include "paper2vec/baselines.hpp"
#include "paper2vec/context.hpp"
#include "paper2vec/graph.hpp"
#include "paper2vec/rng.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/trainer.hpp"

namespace oracles {

using paper2vec::CitationGraph;
using paper2vec::ContextEntry;
using paper2vec::EdgeRecord;
using paper2vec::EmbeddingModel;
using paper2vec::Index;
using paper2vec::Rng;
using paper2vec::ScoredDoc;

// Every walk of length 1..win from `source`, each contributing
// (win + 1 - length) times its probability to its endpoint.
inline Eigen::VectorXd enumerate_walk_mass(const CitationGraph& g, int win, Index source) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(g.node_count());
  std::function<void(Index, int, double)> walk = [&](Index node, int len, double prob) {
    if (len == win) return;
    const auto nbrs = g.neighbors(node);
    if (nbrs.empty()) return;
    const double p = prob / static_cast<double>(nbrs.size());
    const double coeff = static_cast<double>(win - len);
    for (Index j : nbrs) {
      mass(j) += coeff * p;
      walk(j, len + 1, p);
    }
  };
  walk(source, 0, 1.0);
  return mass;
}

inline Eigen::MatrixXd dense_transition(const CitationGraph& g) {
  const Index n = g.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto nbrs = g.neighbors(i);
    if (nbrs.empty()) continue;
    const double p = 1.0 / static_cast<double>(nbrs.size());
    for (Index j : nbrs) a(i, j) = p;
  }
  return a;
}

// Literal double sum: for each window size o = 1..win, add A^k for k = 1..o,
// recomputing the powers from scratch.
inline Eigen::MatrixXd double_sum_mass(const Eigen::MatrixXd& a, int win) {
  const Index n = a.rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  for (int o = 1; o <= win; ++o) {
    Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= o; ++k) {
      pow = (pow * a).eval();
      total += pow;
    }
  }
  return total;
}

// Closed form of the same quantity: sum over k of (win + 1 - k) A^k.
inline Eigen::MatrixXd closed_form_mass(const Eigen::MatrixXd& a, int win) {
  const Index n = a.rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd pow = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= win; ++k) {
    pow = (pow * a).eval();
    total += static_cast<double>(win + 1 - k) * pow;
  }
  return total;
}

// Weighted squared error of one factorization term, evaluated from scratch.
inline double term_loss(const EmbeddingModel<double>& m, const ContextEntry<double>& e) {
  const double diff = m.w.row(e.source).dot(m.w_tilde.row(e.context)) + m.b(e.source) +
                      m.b_tilde(e.context) - e.x;
  return e.f * diff * diff;
}

struct TermGradient {
  Eigen::VectorXd w;        // d loss / d w_i
  Eigen::VectorXd w_tilde;  // d loss / d w_tilde_j
  double b = 0.0;
  double b_tilde = 0.0;
};

// Gradient implied by one plain-SGD update: (theta_before - theta_after) / alpha.
inline TermGradient implied_gradient(const EmbeddingModel<double>& m, const ContextEntry<double>& e,
                                     double alpha) {
  EmbeddingModel<double> probe = m;
  probe.optimizer = paper2vec::Optimizer::PlainSgd;
  paper2vec::sgd_step(probe, e, alpha);
  TermGradient grad;
  grad.w = (m.w.row(e.source) - probe.w.row(e.source)).transpose() / alpha;
  grad.w_tilde = (m.w_tilde.row(e.context) - probe.w_tilde.row(e.context)).transpose() / alpha;
  grad.b = (m.b(e.source) - probe.b(e.source)) / alpha;
  grad.b_tilde = (m.b_tilde(e.context) - probe.b_tilde(e.context)) / alpha;
  return grad;
}

// Central finite differences of term_loss over the four parameter blocks.
inline TermGradient fd_gradient(const EmbeddingModel<double>& m, const ContextEntry<double>& e,
                                double h) {
  TermGradient grad;
  const Index dim = m.dim();
  grad.w.resize(dim);
  grad.w_tilde.resize(dim);
  EmbeddingModel<double> probe = m;
  auto central = [&](double& cell) {
    const double saved = cell;
    cell = saved + h;
    const double up = term_loss(probe, e);
    cell = saved - h;
    const double down = term_loss(probe, e);
    cell = saved;
    return (up - down) / (2.0 * h);
  };
  for (Index c = 0; c < dim; ++c) grad.w(c) = central(probe.w(e.source, c));
  for (Index c = 0; c < dim; ++c) grad.w_tilde(c) = central(probe.w_tilde(e.context, c));
  grad.b = central(probe.b(e.source));
  grad.b_tilde = central(probe.b_tilde(e.context));
  return grad;
}

inline bool score_order(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

// Full sort of every candidate's cosine against the query.
template <typename Scalar>
std::vector<ScoredDoc> brute_force_top_k(const paper2vec::PaperVectors<Scalar>& pv, Index i, int k) {
  std::vector<ScoredDoc> cand;
  for (Index j = 0; j < pv.size(); ++j) {
    if (j == i || pv.flagged(j)) continue;
    cand.push_back({j, paper2vec::cosine(pv, i, j)});
  }
  std::sort(cand.begin(), cand.end(), score_order);
  if (cand.size() > static_cast<std::size_t>(k)) cand.resize(static_cast<std::size_t>(k));
  return cand;
}

// Full scan over all documents, no candidate restriction.
inline std::vector<ScoredDoc> brute_force_baseline_top_k(const CitationGraph& g,
                                                         paper2vec::BaselineMeasure m, Index i,
                                                         int k) {
  std::vector<ScoredDoc> cand;
  for (Index j = 0; j < g.node_count(); ++j) {
    if (j == i) continue;
    const double s = paper2vec::baseline_score(g, m, i, j);
    if (s > 0.0) cand.push_back({j, s});
  }
  std::sort(cand.begin(), cand.end(), score_order);
  if (cand.size() > static_cast<std::size_t>(k)) cand.resize(static_cast<std::size_t>(k));
  return cand;
}

// Erdos-Renyi citation records: each unordered pair linked with probability p,
// direction by fair coin, ids "n<i>".
inline std::vector<EdgeRecord> random_edges(Index nodes, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EdgeRecord> records;
  for (Index u = 0; u < nodes; ++u) {
    for (Index v = u + 1; v < nodes; ++v) {
      if (!rng.bernoulli(p)) continue;
      const std::string a = "n" + std::to_string(u);
      const std::string b = "n" + std::to_string(v);
      if (rng.bernoulli(0.5))
        records.push_back({a, b});
      else
        records.push_back({b, a});
    }
  }
  return records;
}

inline std::vector<EdgeRecord> path_edges(Index nodes) {
  std::vector<EdgeRecord> records;
  for (Index i = 0; i + 1 < nodes; ++i)
    records.push_back({"n" + std::to_string(i), "n" + std::to_string(i + 1)});
  return records;
}

}  // namespace oracles
