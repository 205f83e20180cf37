#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "hubscan/error.hpp"
#include "hubscan/index.hpp"
#include "oracles.hpp"

using namespace hubscan;

TEST_CASE("basic lookups") {
  const Matrix docs(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const FlatIndex index(docs, Metric::cosine);
  CHECK(index.size() == 3);

  const auto self = index.knn(docs.row(2), 1);
  CHECK(self.doc_indices == std::vector<std::size_t>{2});
  CHECK(self.similarities[0] == 1.0);

  std::vector<float> q{0.9f, 0.1f, 0.0f};
  normalize(std::span<float>(q));
  const auto nn = index.knn(q, 2);
  CHECK(nn.doc_indices == std::vector<std::size_t>{0, 1});

  CHECK(index.knn(q, 10).size() == 3);
  CHECK_THROWS_AS(index.knn(std::vector<float>{1, 0}, 1), Error);
  CHECK_THROWS_AS(FlatIndex(Matrix(0, 3), Metric::cosine), Error);
}

TEST_CASE("knn matches exhaustive argsort on random and tied instances") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> nd(1, 500), dd(2, 32), kd(1, 40);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = nd(rng), d = dd(rng), k = kd(rng);
    const int grid = trial % 2 ? 1 : 0;  // odd trials use a coarse lattice full of ties
    const Matrix docs = oracle::random_unit_rows(n, d, rng, grid);
    const Matrix queries = oracle::random_unit_rows(17, d, rng, grid);
    const FlatIndex index(docs, Metric::cosine);
    const auto batch = index.knn_batch(queries, k);
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const auto ref = oracle::knn(docs, queries, q, k);
      const auto got = index.knn(queries.row(q), k);
      REQUIRE(got.doc_indices == ref.idx);
      REQUIRE(batch[q] == got);
      for (std::size_t r = 0; r < ref.sim.size(); ++r) REQUIRE(std::fabs(got.similarities[r] - ref.sim[r]) < 1e-12);
    }
  }
}

TEST_CASE("neighbor list invariants") {
  std::mt19937_64 rng(3);
  const Matrix docs = oracle::random_unit_rows(300, 12, rng);
  const Matrix queries = oracle::random_unit_rows(50, 12, rng);
  const FlatIndex index(docs, Metric::cosine);
  for (const auto& nl : index.knn_batch(queries, 25)) {
    CHECK(nl.size() == 25);
    CHECK(std::set<std::size_t>(nl.doc_indices.begin(), nl.doc_indices.end()).size() == 25);
    for (std::size_t r = 1; r < nl.size(); ++r) CHECK(nl.similarities[r] <= nl.similarities[r - 1]);
  }
}

TEST_CASE("batch ranges agree with the full batch") {
  std::mt19937_64 rng(4);
  const Matrix docs = oracle::random_unit_rows(700, 20, rng);
  const Matrix queries = oracle::random_unit_rows(300, 20, rng);
  const FlatIndex index(docs, Metric::cosine);
  const auto full = index.knn_batch(queries, 20);
  const auto part = index.knn_batch(queries, 20, 130, 261);
  REQUIRE(part.size() == 131);
  for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i] == full[130 + i]);
  CHECK(index.similarity(5, queries.row(7)) == doctest::Approx(oracle::dot(queries, 7, docs, 5)).epsilon(1e-12));
}
