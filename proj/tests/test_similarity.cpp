#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "paper2vec/rng.hpp"
#include "paper2vec/similarity.hpp"

using namespace paper2vec;

namespace {

PaperVectors<double> make_vectors(const std::vector<std::vector<double>>& rows) {
  PaperVectors<double> pv;
  const Index n = static_cast<Index>(rows.size());
  const Index dim = rows.empty() ? 0 : static_cast<Index>(rows[0].size());
  pv.vectors.resize(n, dim);
  for (Index i = 0; i < n; ++i) {
    pv.ids.intern("d" + std::to_string(i));
    for (Index c = 0; c < dim; ++c) pv.vectors(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  pv.unembedded.assign(static_cast<std::size_t>(n), 0);
  return pv;
}

PaperVectors<double> random_unit_vectors(Index n, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  PaperVectors<double> pv;
  pv.vectors.resize(n, dim);
  for (Index i = 0; i < n; ++i) {
    pv.ids.intern("d" + std::to_string(i));
    for (Index c = 0; c < dim; ++c) pv.vectors(i, c) = rng.uniform(-1.0, 1.0);
    pv.vectors.row(i).normalize();
  }
  pv.unembedded.assign(static_cast<std::size_t>(n), 0);
  return pv;
}

}  // namespace

TEST_CASE("cosine matches hand values") {
  auto pv = make_vectors({{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {-1.0, 0.0}});
  CHECK(cosine(pv, 0, 2) == 0.6);
  CHECK(cosine(pv, 1, 2) == 0.8);
  CHECK(cosine(pv, 0, 1) == 0.0);
  CHECK(cosine(pv, 0, 3) == -1.0);
  CHECK(cosine(pv, 0, 2) == cosine(pv, 2, 0));
}

TEST_CASE("top_k orders by score and breaks ties toward the smaller index") {
  // candidates 1 and 2 both score exactly 0.6 against the query
  auto pv = make_vectors({{1.0, 0.0}, {0.6, 0.8}, {0.6, -0.8}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}});
  auto top = top_k(pv, 0, 6);
  REQUIRE(top.size() == 5);
  CHECK(top[0].doc == 3);
  CHECK(top[0].score == 1.0);
  CHECK(top[1].doc == 1);
  CHECK(top[1].score == 0.6);
  CHECK(top[2].doc == 2);
  CHECK(top[2].score == 0.6);
  CHECK(top[3].doc == 4);
  CHECK(top[4].doc == 5);

  auto top2 = top_k(pv, 0, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].doc == 3);
  CHECK(top2[1].doc == 1);
}

TEST_CASE("top_k excludes the query and unembedded documents") {
  auto pv = make_vectors({{1.0, 0.0}, {0.8, 0.6}, {0.0, 0.0}, {0.6, 0.8}});
  pv.unembedded[2] = 1;
  auto top = top_k(pv, 0, 10);
  REQUIRE(top.size() == 2);
  CHECK(top[0].doc == 1);
  CHECK(top[1].doc == 3);

  CHECK_THROWS_AS(top_k(pv, 2, 3), LookupError);
  CHECK_THROWS_AS(top_k(pv, -1, 3), LookupError);
  CHECK_THROWS_AS(top_k(pv, 4, 3), LookupError);
  CHECK_THROWS_AS(cosine(pv, 0, 2), LookupError);
  CHECK_THROWS_AS(top_k(pv, 0, 0), Error);
}

TEST_CASE("top_k equals a full-sort scan") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto pv = random_unit_vectors(37, 7, seed);
    for (int k : {1, 5, 10, 80}) {
      for (Index q : {Index(0), Index(17), Index(36)}) {
        auto fast = top_k(pv, q, k);
        auto slow = oracles::brute_force_top_k(pv, q, k);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t r = 0; r < fast.size(); ++r) {
          CHECK(fast[r].doc == slow[r].doc);
          CHECK(fast[r].score == doctest::Approx(slow[r].score).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("rankings are invariant under orthogonal maps") {
  const Index dim = 6;
  auto pv = random_unit_vectors(25, dim, 99);

  // compose seeded Givens rotations into an orthogonal matrix
  Rng rng(4242);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(dim, dim);
  for (int t = 0; t < 12; ++t) {
    const Index a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(dim)));
    Index b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(dim - 1)));
    if (b >= a) ++b;
    const double theta = rng.uniform(0.0, 6.28318530717958647692);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(dim, dim);
    g(a, a) = std::cos(theta);
    g(b, b) = std::cos(theta);
    g(a, b) = -std::sin(theta);
    g(b, a) = std::sin(theta);
    q = (q * g).eval();
  }

  PaperVectors<double> rotated = pv;
  rotated.vectors = (pv.vectors * q).eval();

  for (Index i : {Index(0), Index(7), Index(24)}) {
    auto plain = top_k(pv, i, 8);
    auto moved = top_k(rotated, i, 8);
    REQUIRE(plain.size() == moved.size());
    for (std::size_t r = 0; r < plain.size(); ++r) {
      CHECK(plain[r].doc == moved[r].doc);
      CHECK(plain[r].score == doctest::Approx(moved[r].score).epsilon(1e-9));
    }
  }
}

TEST_CASE("all_top_k covers every embedded document in index order") {
  auto pv = random_unit_vectors(12, 5, 7);
  pv.unembedded[3] = 1;
  pv.unembedded[9] = 1;
  auto table = all_top_k(pv, 4);
  CHECK(table.k == 4);
  REQUIRE(table.rows.size() == 10);
  std::size_t row = 0;
  for (Index i = 0; i < pv.size(); ++i) {
    if (pv.flagged(i)) continue;
    CHECK(table.rows[row].first == pv.ids.id(i));
    auto expect = top_k(pv, i, 4);
    REQUIRE(table.rows[row].second.size() == expect.size());
    for (std::size_t r = 0; r < expect.size(); ++r) {
      CHECK(table.rows[row].second[r].doc == pv.ids.id(expect[r].doc));
      CHECK(table.rows[row].second[r].score == expect[r].score);
    }
    ++row;
  }
}

TEST_CASE("all_top_k is worker-invariant") {
  auto pv = random_unit_vectors(33, 6, 21);
  auto one = all_top_k(pv, 5, 1);
  auto four = all_top_k(pv, 5, 4);
  auto many = all_top_k(pv, 5, 64);
  REQUIRE(one.rows.size() == four.rows.size());
  REQUIRE(one.rows.size() == many.rows.size());
  for (std::size_t r = 0; r < one.rows.size(); ++r) {
    CHECK(one.rows[r].first == four.rows[r].first);
    REQUIRE(one.rows[r].second.size() == four.rows[r].second.size());
    for (std::size_t c = 0; c < one.rows[r].second.size(); ++c) {
      CHECK(one.rows[r].second[c].doc == four.rows[r].second[c].doc);
      CHECK(one.rows[r].second[c].score == four.rows[r].second[c].score);
      CHECK(one.rows[r].second[c].doc == many.rows[r].second[c].doc);
      CHECK(one.rows[r].second[c].score == many.rows[r].second[c].score);
    }
  }
}

TEST_CASE("a lone document yields an empty neighbor list") {
  auto pv = make_vectors({{1.0, 0.0}});
  CHECK(top_k(pv, 0, 5).empty());
  auto table = all_top_k(pv, 5);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].second.empty());
  CHECK_THROWS_AS(all_top_k(pv, 0), Error);
  CHECK_THROWS_AS(all_top_k(pv, 3, 0), Error);
}
