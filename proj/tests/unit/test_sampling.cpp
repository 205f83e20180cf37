#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "hubscan/error.hpp"
#include "hubscan/sampling.hpp"
#include "oracles.hpp"

using namespace hubscan;

namespace {

Corpus random_corpus(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Corpus c;
  c.embeddings = oracle::random_unit_rows(n, d, rng);
  for (std::size_t i = 0; i < n; ++i) c.metadata.push_back({"d" + std::to_string(i), "dom" + std::to_string(i % 3)});
  return c;
}

std::size_t count(const QuerySet& q, QueryProvenance p) {
  std::size_t k = 0;
  for (auto x : q.provenance) k += x == p;
  return k;
}

bool equals_some_row(const Corpus& c, std::span<const float> q) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (std::equal(q.begin(), q.end(), c.embeddings.row(i).begin())) return true;
  return false;
}

}  // namespace

TEST_CASE("10000 queries split evenly between centroids and random docs") {
  const Corpus c = random_corpus(2000, 8, 1);
  SamplingConfig cfg;
  cfg.seed = 4;
  const auto q = sample_queries(c, nullptr, cfg);
  CHECK(q.size() == 10000);
  CHECK(count(q, QueryProvenance::centroid) == 5000);
  CHECK(count(q, QueryProvenance::random_doc) == 5000);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::fabs(l2_norm(q.embeddings.row(i)) - 1.0) < 1e-5);
}

TEST_CASE("random-doc sampling draws corpus rows") {
  const Corpus c = random_corpus(3, 4, 2);
  SamplingConfig cfg;
  cfg.frac_centroid = 0.0;
  cfg.frac_random = 1.0;
  cfg.total = 1;
  auto q = sample_queries(c, nullptr, cfg);
  REQUIRE(q.size() == 1);
  CHECK(equals_some_row(c, q.embeddings.row(0)));

  cfg.total = 5;
  q = sample_queries(c, nullptr, cfg);
  REQUIRE(q.size() == 5);
  std::set<std::vector<float>> first3;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(q.provenance[i] == QueryProvenance::random_doc);
    CHECK(equals_some_row(c, q.embeddings.row(i)));
    if (i < 3) first3.insert({q.embeddings.row(i).begin(), q.embeddings.row(i).end()});
  }
  CHECK(first3.size() == 3);  // distinct rows exhausted before any repeat
}

TEST_CASE("size, determinism and row identity over random configs") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> nd(5, 300), td(1, 700);
  std::uniform_real_distribution<double> fd(0.0, 1.0);
  for (int t = 0; t < 25; ++t) {
    const Corpus c = random_corpus(nd(rng), 6, 100 + t);
    SamplingConfig cfg;
    cfg.total = td(rng);
    cfg.frac_centroid = fd(rng);
    cfg.frac_random = 1.0 - cfg.frac_centroid;
    cfg.seed = t;
    const auto a = sample_queries(c, nullptr, cfg);
    const auto b = sample_queries(c, nullptr, cfg);
    REQUIRE(a.size() == cfg.total);
    CHECK(a.embeddings == b.embeddings);
    CHECK(a.domains == b.domains);

    cfg.frac_centroid = 0.0;
    cfg.frac_random = 1.0;
    cfg.total = std::min(cfg.total, c.size());
    const auto r = sample_queries(c, nullptr, cfg);
    for (std::size_t i = 0; i < r.size(); ++i) REQUIRE(equals_some_row(c, r.embeddings.row(i)));
  }
}

TEST_CASE("largest remainder split") {
  CHECK(split_counts(10000, 0.5, 0.5, 0.0) == std::array<std::size_t, 3>{5000, 5000, 0});
  CHECK(split_counts(10, 1.0 / 3, 1.0 / 3, 1.0 / 3) == std::array<std::size_t, 3>{4, 3, 3});
  CHECK(split_counts(7, 0.4, 0.4, 0.2) == std::array<std::size_t, 3>{3, 3, 1});
  CHECK_THROWS_AS(split_counts(10, 0.5, 0.6, 0.0), Error);
  CHECK_THROWS_AS(split_counts(10, -0.1, 1.1, 0.0), Error);
}

TEST_CASE("real-query shortfall moves to the random pool") {
  const Corpus c = random_corpus(50, 4, 3);
  QuerySet real;
  real.embeddings = Matrix(0, 4);
  for (std::size_t i = 0; i < 5; ++i) real.append(c.embeddings.row(i), QueryProvenance::real, "fiqa");
  SamplingConfig cfg;
  cfg.total = 100;
  cfg.frac_centroid = 0.4;
  cfg.frac_random = 0.4;
  cfg.frac_real = 0.2;
  const auto q = sample_queries(c, &real, cfg);
  CHECK(q.size() == 100);
  CHECK(count(q, QueryProvenance::real) == 5);
  CHECK(count(q, QueryProvenance::random_doc) == 55);
  CHECK(count(q, QueryProvenance::centroid) == 40);
  CHECK_THROWS_AS(sample_queries(c, nullptr, cfg), Error);
}

TEST_CASE("centroid queries inherit majority domain labels") {
  const Corpus c = random_corpus(200, 6, 4);
  SamplingConfig cfg;
  cfg.total = 40;
  cfg.frac_centroid = 1.0;
  cfg.frac_random = 0.0;
  const auto q = sample_queries(c, nullptr, cfg);
  CHECK(q.has_domains());
  CHECK(default_centroid_clusters(5000) == 256);
  CHECK(default_centroid_clusters(100) == 40);
  std::vector<std::optional<std::string>> labels = {"b", "a", "b", "a", std::nullopt};
  const std::vector<std::size_t> all = {0, 1, 2, 3, 4};
  CHECK(majority_label(labels, all) == "a");
}
