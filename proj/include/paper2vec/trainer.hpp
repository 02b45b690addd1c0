#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paper2vec/context.hpp"
#include "paper2vec/rng.hpp"
#include "paper2vec/similarity.hpp"
#include "paper2vec/types.hpp"

namespace paper2vec {

enum class Optimizer { PlainSgd, AdaptivePerParameter };

struct TrainConfig {
  Index dim = 500;
  int epochs = 50;
  double alpha = 0.05;
  Optimizer optimizer = Optimizer::AdaptivePerParameter;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const {
    if (dim < 1) throw Error("train: dim must be >= 1");
    if (epochs < 1) throw Error("train: epochs must be >= 1");
    if (!(alpha > 0.0)) throw Error("train: alpha must be > 0");
    if (workers < 1) throw Error("train: workers must be >= 1");
  }
};

// Raw factorization state: paper vectors w, context vectors w_tilde, the two
// bias columns, and (adaptive mode only) per-parameter squared-gradient
// accumulators, which start at 1.
template <typename Scalar = double>
struct EmbeddingModel {
  RowMatrix<Scalar> w, w_tilde;
  Vector<Scalar> b, b_tilde;
  RowMatrix<Scalar> grad_sq_w, grad_sq_w_tilde;
  Vector<Scalar> grad_sq_b, grad_sq_b_tilde;
  Optimizer optimizer = Optimizer::AdaptivePerParameter;
  std::uint64_t seed = 0;

  Index node_count() const { return w.rows(); }
  Index dim() const { return w.cols(); }
};

struct LossTrace {
  std::vector<double> epoch_cost;
};

namespace detail {
constexpr std::uint64_t kShuffleStream = 0x73687566666c6521ULL;
constexpr std::uint64_t kRowInitStream = 0x726f77696e697421ULL;
}  // namespace detail

template <typename Scalar = double>
EmbeddingModel<Scalar> init_model(Index node_count, const TrainConfig& config) {
  config.validate();
  if (node_count < 0) throw Error("train: negative node count");
  EmbeddingModel<Scalar> m;
  m.optimizer = config.optimizer;
  m.seed = config.seed;
  m.w.resize(node_count, config.dim);
  m.w_tilde.resize(node_count, config.dim);
  m.b = Vector<Scalar>::Zero(node_count);
  m.b_tilde = Vector<Scalar>::Zero(node_count);
  const double half = 0.5 / static_cast<double>(config.dim);
  Rng rng(config.seed);
  // w then w_tilde, each in row-major order, off one generator
  for (Index k = 0; k < m.w.size(); ++k) m.w.data()[k] = static_cast<Scalar>(rng.uniform(-half, half));
  for (Index k = 0; k < m.w_tilde.size(); ++k)
    m.w_tilde.data()[k] = static_cast<Scalar>(rng.uniform(-half, half));
  if (config.optimizer == Optimizer::AdaptivePerParameter) {
    m.grad_sq_w = RowMatrix<Scalar>::Ones(node_count, config.dim);
    m.grad_sq_w_tilde = RowMatrix<Scalar>::Ones(node_count, config.dim);
    m.grad_sq_b = Vector<Scalar>::Ones(node_count);
    m.grad_sq_b_tilde = Vector<Scalar>::Ones(node_count);
  }
  return m;
}

// Appends rows for documents added after the initial fit. Each new row is
// drawn from its own substream so the result does not depend on how many
// documents arrive per batch.
template <typename Scalar>
void grow_model(EmbeddingModel<Scalar>& m, Index new_count) {
  const Index old_count = m.node_count();
  if (new_count < old_count) throw Error("train: model cannot shrink");
  if (new_count == old_count) return;
  const Index dim = m.dim();
  m.w.conservativeResize(new_count, dim);
  m.w_tilde.conservativeResize(new_count, dim);
  m.b.conservativeResize(new_count);
  m.b_tilde.conservativeResize(new_count);
  const double half = 0.5 / static_cast<double>(dim);
  for (Index r = old_count; r < new_count; ++r) {
    Rng rng(mix_seed(mix_seed(m.seed, detail::kRowInitStream), static_cast<std::uint64_t>(r)));
    for (Index c = 0; c < dim; ++c) m.w(r, c) = static_cast<Scalar>(rng.uniform(-half, half));
    for (Index c = 0; c < dim; ++c) m.w_tilde(r, c) = static_cast<Scalar>(rng.uniform(-half, half));
    m.b(r) = Scalar(0);
    m.b_tilde(r) = Scalar(0);
  }
  if (m.optimizer == Optimizer::AdaptivePerParameter) {
    m.grad_sq_w.conservativeResize(new_count, dim);
    m.grad_sq_w_tilde.conservativeResize(new_count, dim);
    m.grad_sq_b.conservativeResize(new_count);
    m.grad_sq_b_tilde.conservativeResize(new_count);
    m.grad_sq_w.bottomRows(new_count - old_count).setOnes();
    m.grad_sq_w_tilde.bottomRows(new_count - old_count).setOnes();
    m.grad_sq_b.tail(new_count - old_count).setOnes();
    m.grad_sq_b_tilde.tail(new_count - old_count).setOnes();
  }
}

// One stochastic update on a single entry. Returns the entry's weighted
// squared error before the update. Both embedding rows are read before
// either is written.
template <typename Scalar>
Scalar sgd_step(EmbeddingModel<Scalar>& model, const ContextEntry<Scalar>& entry, Scalar alpha) {
  const Index i = entry.source;
  const Index j = entry.context;
  const Index n = model.node_count();
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw LookupError("train: entry references unknown document index");
  auto wi = model.w.row(i);
  auto wj = model.w_tilde.row(j);
  const Scalar diff = wi.dot(wj) + model.b(i) + model.b_tilde(j) - entry.x;
  const Scalar g = Scalar(2) * entry.f * diff;
  if (!std::isfinite(static_cast<double>(g)))
    throw Error("train: non-finite gradient at entry (" + std::to_string(i) + ", " +
                std::to_string(j) + ")");
  const Scalar loss = entry.f * diff * diff;

  using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
  static thread_local RowArray wi_old, grad;
  wi_old = wi.array();

  if (model.optimizer == Optimizer::PlainSgd) {
    const Scalar step = alpha * g;
    wi.array() -= step * wj.array();
    wj.array() -= step * wi_old;
    model.b(i) -= step;
    model.b_tilde(j) -= step;
  } else {
    // per-component gradients; current accumulator scales the step, then the
    // fresh square is added
    grad = g * wj.array();
    wi.array() -= alpha * grad / model.grad_sq_w.row(i).array().sqrt();
    model.grad_sq_w.row(i).array() += grad.square();
    grad = g * wi_old;
    wj.array() -= alpha * grad / model.grad_sq_w_tilde.row(j).array().sqrt();
    model.grad_sq_w_tilde.row(j).array() += grad.square();
    model.b(i) -= alpha * g / std::sqrt(model.grad_sq_b(i));
    model.grad_sq_b(i) += g * g;
    model.b_tilde(j) -= alpha * g / std::sqrt(model.grad_sq_b_tilde(j));
    model.grad_sq_b_tilde(j) += g * g;
  }
  return loss;
}

// Runs `epochs` passes over `entries`. Every epoch draws a fresh uniform
// shuffle from a substream of (seed, epoch_offset + epoch). With one worker
// the pass is sequential and bit-reproducible; with several, contiguous
// shards of the shuffled order run lock-free in parallel and may interleave.
template <typename Scalar>
LossTrace run_epochs(EmbeddingModel<Scalar>& model, std::span<const ContextEntry<Scalar>> entries,
                     const TrainConfig& config, int epochs, std::uint64_t epoch_offset = 0) {
  config.validate();
  const Index n = model.node_count();
  for (const auto& e : entries) {
    if (e.source < 0 || e.source >= n || e.context < 0 || e.context >= n)
      throw LookupError("train: entry references unknown document index");
  }
  LossTrace trace;
  trace.epoch_cost.reserve(static_cast<std::size_t>(epochs));
  std::vector<std::size_t> order(entries.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  const Scalar alpha = static_cast<Scalar>(config.alpha);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // each epoch's permutation is a pure function of (seed, epoch index), so
    // a resumed run visits entries exactly as an unbroken one would
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    Rng rng(mix_seed(config.seed, detail::kShuffleStream + epoch_offset + static_cast<std::uint64_t>(epoch)));
    fisher_yates(order, rng);
    double cost = 0.0;
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(config.workers),
                                                std::max<std::size_t>(order.size(), 1));
    if (t <= 1) {
      for (std::size_t k : order) cost += static_cast<double>(sgd_step(model, entries[k], alpha));
    } else {
      std::vector<double> partial(t, 0.0);
      std::vector<std::exception_ptr> errors(t);
      std::vector<std::thread> pool;
      const std::size_t chunk = (order.size() + t - 1) / t;
      for (std::size_t w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(lo + chunk, order.size());
        if (lo >= hi) break;
        pool.emplace_back([&, w, lo, hi] {
          try {
            double local = 0.0;
            for (std::size_t k = lo; k < hi; ++k)
              local += static_cast<double>(sgd_step(model, entries[order[k]], alpha));
            partial[w] = local;
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
      for (double p : partial) cost += p;
    }
    trace.epoch_cost.push_back(cost);
  }
  return trace;
}

template <typename Scalar = double>
std::pair<EmbeddingModel<Scalar>, LossTrace> train(const ContextMatrix<Scalar>& matrix,
                                                   const TrainConfig& config) {
  config.validate();
  auto model = init_model<Scalar>(matrix.node_count, config);
  auto trace = run_epochs(model, std::span<const ContextEntry<Scalar>>(matrix.entries), config,
                          config.epochs);
  return {std::move(model), std::move(trace)};
}

// Everything a resumed run needs: the context configuration the corpus was
// built with (lambda already resolved), the optimizer configuration, the id
// interning order, and the raw model including adaptive state.
struct TrainState {
  ContextConfig context;
  double resolved_lambda = 0.0;
  TrainConfig train;
  IdMap ids;
  EmbeddingModel<double> model;
  std::uint64_t updates = 0;  // online-update generations applied so far
};

// Drops context vectors and biases, L2-normalizes each paper vector. An
// exactly-zero row cannot be normalized; it stays zero and is flagged.
template <typename OutScalar = double, typename Scalar>
PaperVectors<OutScalar> finalize(const EmbeddingModel<Scalar>& model, const IdMap& ids) {
  if (ids.size() != model.node_count()) throw Error("finalize: id map does not match model");
  PaperVectors<OutScalar> pv;
  pv.ids = ids;
  pv.vectors.resize(model.node_count(), model.dim());
  pv.unembedded.assign(static_cast<std::size_t>(model.node_count()), 0);
  for (Index i = 0; i < model.node_count(); ++i) {
    const Scalar norm = model.w.row(i).norm();
    if (norm == Scalar(0)) {
      pv.vectors.row(i).setZero();
      pv.unembedded[static_cast<std::size_t>(i)] = 1;
    } else {
      pv.vectors.row(i) = (model.w.row(i) / norm).template cast<OutScalar>();
    }
  }
  return pv;
}

}  // namespace paper2vec
