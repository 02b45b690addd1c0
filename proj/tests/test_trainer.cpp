#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "paper2vec/context.hpp"
#include "paper2vec/trainer.hpp"

using namespace paper2vec;

namespace {

TrainConfig small_config(Index dim, Optimizer opt = Optimizer::PlainSgd) {
  TrainConfig c;
  c.dim = dim;
  c.epochs = 1;
  c.alpha = 0.05;
  c.optimizer = opt;
  c.seed = 42;
  return c;
}

ContextMatrix<double> path3_matrix() {
  const auto g = ingest_edges({{"1", "2"}, {"2", "3"}});
  ContextConfig config;
  config.win = 2;
  config.lambda = 1.0;
  return build_context_matrix(g, config);
}

}  // namespace

TEST_CASE("init draws uniform rows inside +-0.5/dim with zero biases") {
  auto config = small_config(8, Optimizer::AdaptivePerParameter);
  const auto m = init_model(100, config);
  CHECK(m.w.rows() == 100);
  CHECK(m.w.cols() == 8);
  CHECK(m.w_tilde.rows() == 100);
  CHECK(m.b.isZero(0.0));
  CHECK(m.b_tilde.isZero(0.0));
  const double bound = 0.5 / 8.0;
  CHECK(m.w.cwiseAbs().maxCoeff() <= bound);
  CHECK(m.w_tilde.cwiseAbs().maxCoeff() <= bound);
  CHECK(m.w.cwiseAbs().maxCoeff() > 0.0);
  CHECK((m.grad_sq_w.array() == 1.0).all());
  CHECK((m.grad_sq_w_tilde.array() == 1.0).all());
  CHECK((m.grad_sq_b.array() == 1.0).all());
  CHECK(m.w != m.w_tilde);  // the two blocks use disjoint stretches of the stream

  const auto again = init_model(100, config);
  CHECK(m.w == again.w);
  CHECK(m.w_tilde == again.w_tilde);
  config.seed = 43;
  const auto other = init_model(100, config);
  CHECK(m.w != other.w);

  CHECK(init_model(0, config).w.rows() == 0);
  const auto plain = init_model(10, small_config(4));
  CHECK(plain.grad_sq_w.size() == 0);
}

TEST_CASE("plain step reproduces the dim-1 worked example") {
  auto m = init_model<double>(2, small_config(1));
  m.w(0, 0) = 0.1;
  m.w_tilde(1, 0) = 0.2;
  m.b.setZero();
  m.b_tilde.setZero();
  const ContextEntry<double> entry{0, 1, 1.0, 2.0};
  const double loss = sgd_step(m, entry, 0.05);
  CHECK(std::abs(loss - 1.9208) < 1e-12);
  CHECK(std::abs(m.w(0, 0) - 0.1392) < 1e-12);
  CHECK(std::abs(m.w_tilde(1, 0) - 0.2196) < 1e-12);
  CHECK(std::abs(m.b(0) - 0.196) < 1e-12);
  CHECK(std::abs(m.b_tilde(1) - 0.196) < 1e-12);
}

TEST_CASE("a perfectly fit entry is a fixed point") {
  auto m = init_model<double>(2, small_config(3));
  m.w.row(0) << 0.1, 0.2, 0.3;
  m.w_tilde.row(1) << 0.4, 0.5, 0.6;
  m.b(0) = 0.25;
  m.b_tilde(1) = -0.05;
  const double x = m.w.row(0).dot(m.w_tilde.row(1)) + m.b(0) + m.b_tilde(1);
  const auto before = m;
  const double loss = sgd_step(m, {0, 1, x, 3.0}, 0.05);
  CHECK(loss == 0.0);
  CHECK(m.w == before.w);
  CHECK(m.w_tilde == before.w_tilde);
  CHECK(m.b == before.b);
}

TEST_CASE("returned loss is the pre-update weighted squared error") {
  auto m = init_model<double>(2, small_config(4));
  const ContextEntry<double> entry{0, 1, 0.7, 1.3};
  const double expect = oracles::term_loss(m, entry);
  CHECK(sgd_step(m, entry, 0.05) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("adaptive steps divide by the accumulator before adding to it") {
  auto config = small_config(1, Optimizer::AdaptivePerParameter);
  auto m = init_model<double>(2, config);
  m.w.setZero();
  m.w_tilde.setZero();
  const ContextEntry<double> entry{0, 1, 1.0, 1.0};
  // step 1: g = -2, bias step alpha*2/sqrt(1), accumulator then 1 + 4
  sgd_step(m, entry, 0.05);
  CHECK(m.b(0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(m.grad_sq_b(0) == doctest::Approx(5.0).epsilon(1e-14));
  // step 2: diff = -0.8, g = -1.6, step uses sqrt(5), accumulator then 7.56
  sgd_step(m, entry, 0.05);
  CHECK(m.b(0) == doctest::Approx(0.1 + 0.08 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(m.grad_sq_b(0) == doctest::Approx(7.56).epsilon(1e-14));
  // w rows started at zero, so their per-component gradients stay zero
  CHECK(m.w(0, 0) == 0.0);
  CHECK(m.grad_sq_w(0, 0) == 1.0);
}

TEST_CASE("update-implied gradients match central finite differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Index dim = 1 + static_cast<Index>(rng.below(8));
    TrainConfig config = small_config(dim);
    config.seed = rng.bits();
    auto m = init_model<double>(3, config);
    m.b(0) = rng.uniform(-0.5, 0.5);
    m.b_tilde(1) = rng.uniform(-0.5, 0.5);
    const ContextEntry<double> entry{0, 1, rng.uniform(0.05, 2.0), rng.uniform(0.1, 3.0)};
    const auto analytic = oracles::implied_gradient(m, entry, 1e-3);
    const auto numeric = oracles::fd_gradient(m, entry, 1e-5);
    for (Index c = 0; c < dim; ++c) {
      CHECK(std::abs(analytic.w(c) - numeric.w(c)) <
            1e-4 * std::max(1.0, std::abs(numeric.w(c))));
      CHECK(std::abs(analytic.w_tilde(c) - numeric.w_tilde(c)) <
            1e-4 * std::max(1.0, std::abs(numeric.w_tilde(c))));
    }
    CHECK(std::abs(analytic.b - numeric.b) < 1e-4 * std::max(1.0, std::abs(numeric.b)));
    CHECK(std::abs(analytic.b_tilde - numeric.b_tilde) <
          1e-4 * std::max(1.0, std::abs(numeric.b_tilde)));
  }
}

TEST_CASE("training an empty matrix changes nothing") {
  ContextMatrix<double> m;
  m.node_count = 4;
  auto config = small_config(4);
  config.epochs = 3;
  const auto base = init_model<double>(4, config);
  const auto [model, trace] = train(m, config);
  CHECK(model.w == base.w);
  REQUIRE(trace.epoch_cost.size() == 3);
  for (double j : trace.epoch_cost) CHECK(j == 0.0);
}

TEST_CASE("single-worker training is bit-reproducible") {
  const auto matrix = path3_matrix();
  auto config = small_config(8, Optimizer::AdaptivePerParameter);
  config.epochs = 20;
  const auto [a, ta] = train(matrix, config);
  const auto [b, tb] = train(matrix, config);
  CHECK(a.w == b.w);
  CHECK(a.w_tilde == b.w_tilde);
  CHECK(a.b == b.b);
  CHECK(ta.epoch_cost == tb.epoch_cost);
  config.seed = 7;
  const auto [c, tc] = train(matrix, config);
  CHECK(a.w != c.w);
}

TEST_CASE("each epoch draws a fresh shuffle") {
  // entries share parameters, so the visit order is visible in the result of
  // a single epoch; distinct epoch indices must yield distinct permutations
  std::vector<ContextEntry<double>> entries = {{0, 1, 1.0, 1.0}, {0, 2, 1.0, 1.0}};
  auto config = small_config(1);
  const auto base = init_model<double>(3, config);
  std::vector<double> outcomes;
  for (std::uint64_t offset = 0; offset < 12; ++offset) {
    auto m = base;
    run_epochs(m, std::span<const ContextEntry<double>>(entries), config, 1, offset);
    outcomes.push_back(m.b(0));
  }
  std::sort(outcomes.begin(), outcomes.end());
  outcomes.erase(std::unique(outcomes.begin(), outcomes.end()), outcomes.end());
  CHECK(outcomes.size() > 1);
}

TEST_CASE("one multi-epoch run equals chained single-epoch runs") {
  const auto matrix = path3_matrix();
  auto config = small_config(4);
  auto whole = init_model<double>(matrix.node_count, config);
  const auto t = run_epochs(whole, std::span<const ContextEntry<double>>(matrix.entries), config, 3);
  auto chained = init_model<double>(matrix.node_count, config);
  std::vector<double> costs;
  for (std::uint64_t e = 0; e < 3; ++e) {
    const auto step =
        run_epochs(chained, std::span<const ContextEntry<double>>(matrix.entries), config, 1, e);
    costs.push_back(step.epoch_cost.front());
  }
  CHECK(whole.w == chained.w);
  CHECK(whole.b == chained.b);
  CHECK(t.epoch_cost == costs);
}

TEST_CASE("plain training drives the path-graph cost down") {
  const auto matrix = path3_matrix();
  TrainConfig config;
  config.dim = 16;
  config.epochs = 200;
  config.alpha = 0.05;
  config.optimizer = Optimizer::PlainSgd;
  config.seed = 42;
  const auto [model, trace] = train(matrix, config);
  REQUIRE(trace.epoch_cost.size() == 200);
  CHECK(trace.epoch_cost.back() < 0.01 * trace.epoch_cost.front());
  std::vector<double> residuals;
  for (const auto& e : matrix.entries) {
    const double diff = model.w.row(e.source).dot(model.w_tilde.row(e.context)) + model.b(e.source) +
                        model.b_tilde(e.context) - e.x;
    residuals.push_back(std::abs(diff));
  }
  std::sort(residuals.begin(), residuals.end());
  CHECK(residuals[residuals.size() / 2] < 0.1);
}

TEST_CASE("adaptive training also converges on the path graph") {
  const auto matrix = path3_matrix();
  TrainConfig config;
  config.dim = 16;
  config.epochs = 200;
  config.optimizer = Optimizer::AdaptivePerParameter;
  config.seed = 42;
  const auto [model, trace] = train(matrix, config);
  (void)model;
  CHECK(trace.epoch_cost.back() < 0.05 * trace.epoch_cost.front());
}

TEST_CASE("diverging runs abort with a diagnostic instead of emitting NaN") {
  ContextMatrix<double> m;
  m.node_count = 2;
  m.entries = {{0, 1, 1.0, 2.0}};
  TrainConfig config;
  config.dim = 2;
  config.epochs = 400;
  config.alpha = 1e155;
  config.optimizer = Optimizer::PlainSgd;
  CHECK_THROWS_AS(train(m, config), Error);
}

TEST_CASE("entries referencing unknown documents are rejected") {
  auto m = init_model<double>(2, small_config(2));
  CHECK_THROWS_AS(sgd_step(m, {0, 5, 1.0, 1.0}, 0.05), LookupError);
  CHECK_THROWS_AS(sgd_step(m, {-1, 0, 1.0, 1.0}, 0.05), LookupError);
  ContextMatrix<double> bad;
  bad.node_count = 2;
  bad.entries = {{0, 7, 1.0, 1.0}};
  CHECK_THROWS_AS(train(bad, small_config(2)), LookupError);
}

TEST_CASE("finalize normalizes rows and flags exact zeros") {
  auto m = init_model<double>(3, small_config(2));
  m.w.row(0) << 3.0, 4.0;
  m.w.row(1).setZero();
  m.w.row(2) << -1.0, 1.0;
  IdMap ids;
  ids.intern("a");
  ids.intern("b");
  ids.intern("c");
  const auto pv = finalize<float>(m, ids);
  CHECK(pv.vectors(0, 0) == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(pv.vectors(0, 1) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(!pv.flagged(0));
  CHECK(pv.flagged(1));
  CHECK(pv.vectors.row(1).norm() == 0.0f);
  for (Index i : {Index(0), Index(2)})
    CHECK(std::abs(pv.vectors.row(i).norm() - 1.0f) < 1e-6f);
  CHECK(pv.ids.id(2) == "c");

  IdMap wrong;
  wrong.intern("a");
  CHECK_THROWS_AS(finalize(m, wrong), Error);
}

TEST_CASE("grow keeps old rows and derives new rows per index") {
  auto config = small_config(4, Optimizer::AdaptivePerParameter);
  auto base = init_model<double>(5, config);
  const auto frozen = base;

  auto two_steps = base;
  grow_model(two_steps, 7);
  grow_model(two_steps, 9);
  auto one_step = frozen;
  grow_model(one_step, 9);
  CHECK(two_steps.w == one_step.w);
  CHECK(two_steps.w_tilde == one_step.w_tilde);

  CHECK(one_step.w.topRows(5) == frozen.w);
  CHECK(one_step.b.tail(4).isZero(0.0));
  CHECK((one_step.grad_sq_w.bottomRows(4).array() == 1.0).all());
  const double bound = 0.5 / 4.0;
  CHECK(one_step.w.bottomRows(4).cwiseAbs().maxCoeff() <= bound);
  CHECK(one_step.w.bottomRows(4).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(grow_model(one_step, 3), Error);
}

TEST_CASE("multi-worker training produces a finite usable model") {
  const auto g = ingest_edges(oracles::random_edges(40, 0.15, 21));
  ContextConfig cc;
  cc.win = 2;
  const auto matrix = build_context_matrix(g, cc);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 10;
  config.workers = 4;
  const auto [model, trace] = train(matrix, config);
  CHECK(model.w.allFinite());
  CHECK(model.w_tilde.allFinite());
  REQUIRE(trace.epoch_cost.size() == 10);
  for (double j : trace.epoch_cost) CHECK(std::isfinite(j));
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.dim = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.dim = 4;
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.epochs = 1;
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.alpha = 0.1;
  c.workers = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
