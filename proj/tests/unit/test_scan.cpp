#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hubscan/error.hpp"
#include "hubscan/scan.hpp"
#include "oracles.hpp"

using namespace hubscan;

namespace {

struct Instance {
  Corpus corpus;
  QuerySet queries;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t q, std::size_t d, int grid = 0) {
  Instance in;
  in.corpus.embeddings = oracle::random_unit_rows(n, d, rng, grid);
  const char* mods[] = {"text", "image"};
  for (std::size_t i = 0; i < n; ++i)
    in.corpus.metadata.push_back({"d" + std::to_string(i), "dom" + std::to_string(i % 3), mods[i % 2]});
  const Matrix qm = oracle::random_unit_rows(q, d, rng, grid);
  in.queries.embeddings = Matrix(0, d);
  for (std::size_t i = 0; i < q; ++i)
    in.queries.append(qm.row(i), QueryProvenance::random_doc, "dom" + std::to_string(i % 4), mods[(i / 2) % 2]);
  return in;
}

constexpr HitWeighting kUniform{RankWeight::uniform, DistWeight::uniform};
constexpr HitWeighting kDefault{};

}  // namespace

TEST_CASE("hit weights") {
  CHECK(kDefault.weight(1, 1.0) == 1.0);
  CHECK(kDefault.weight(3, 0.5) == doctest::Approx(0.5 / 2.0));
  CHECK(kDefault.weight(1, -0.3) == 1e-6);
  CHECK(kDefault.weight(1, 1.2) == 1.0);
  CHECK(kUniform.weight(17, -1.0) == 1.0);
}

TEST_CASE("one query, k=3, uniform weighting") {
  std::mt19937_64 rng(1);
  auto in = random_instance(rng, 10, 1, 4);
  const FlatIndex index(in.corpus);
  const auto acc = execute_scan(index, in.corpus, in.queries, 3, kUniform, {});
  CHECK(std::accumulate(acc.raw_hit_counts.begin(), acc.raw_hit_counts.end(), std::uint64_t{0}) == 3);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(acc.raw_hit_counts[i] <= 1);
    CHECK(acc.total_weighted_hits[i] == double(acc.raw_hit_counts[i]));
  }
}

TEST_CASE("hand-built 4-doc corpus with weighted hits") {
  Corpus c;
  c.embeddings = Matrix(4, 2, {1, 0, 0.8f, 0.6f, 0, 1, -1, 0});
  for (int i = 0; i < 4; ++i) c.metadata.push_back({"d" + std::to_string(i)});
  QuerySet q;
  q.embeddings = Matrix(0, 2);
  q.append(std::vector<float>{1, 0}, QueryProvenance::real);
  q.append(std::vector<float>{0, 1}, QueryProvenance::real);
  const FlatIndex index(c);
  const auto acc = execute_scan(index, c, q, 2, kDefault, {});
  // q0: d0 (sim 1, rank 1), d1 (sim 0.8, rank 2); q1: d2 (sim 1, rank 1), d1 (sim 0.6, rank 2)
  const double r2 = 1.0 / std::log2(3.0);
  CHECK(acc.total_weighted_hits[0] == doctest::Approx(1.0));
  CHECK(acc.total_weighted_hits[1] == doctest::Approx(double(0.8f) * r2 + double(0.6f) * r2).epsilon(1e-12));
  CHECK(acc.total_weighted_hits[2] == doctest::Approx(1.0));
  CHECK(acc.total_weighted_hits[3] == 0.0);
  CHECK(acc.raw_hit_counts == std::vector<std::uint64_t>{1, 2, 1, 0});
}

TEST_CASE("scan equals the reverse-kNN oracle on random instances") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> nd(1, 200), qd(1, 500), dd(2, 32), kd(1, 25);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = nd(rng), k = kd(rng);
    auto in = random_instance(rng, n, qd(rng), dd(rng), t % 3 == 0 ? 1 : 0);
    const FlatIndex index(in.corpus);
    const bool rank_log = t % 2 == 0, sim_w = t % 4 < 2;
    const HitWeighting w{rank_log ? RankWeight::inverse_log_rank : RankWeight::uniform,
                         sim_w ? DistWeight::similarity : DistWeight::uniform};
    const auto ref = oracle::reverse_knn(in.corpus.embeddings, in.queries.embeddings, k, rank_log, sim_w);
    const auto a = execute_scan(index, in.corpus, in.queries, k, w, {}, {1, 7});
    const auto b = execute_scan(index, in.corpus, in.queries, k, w, {}, {4, 7});
    REQUIRE(a.raw_hit_counts == ref.counts);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::fabs(a.total_weighted_hits[i] - ref.weighted[i]) < 1e-9);
    REQUIRE(a == b);
    const auto total = std::accumulate(a.raw_hit_counts.begin(), a.raw_hit_counts.end(), std::uint64_t{0});
    REQUIRE(total == std::min(k, n) * in.queries.size());
    for (auto h : a.raw_hit_counts) REQUIRE(h <= a.n_queries_processed);
  }
}

TEST_CASE("sharded merge equals a single pass") {
  std::mt19937_64 rng(5);
  auto in = random_instance(rng, 150, 400, 10);
  const FlatIndex index(in.corpus);
  const Bucketing b{true, true, nullptr};
  const auto whole = execute_scan(index, in.corpus, in.queries, 10, kDefault, b);
  BucketedAccumulator merged = BucketedAccumulator::empty(150, true, true, 0);
  for (std::size_t s = 0; s < 4; ++s) {
    QuerySet part;
    part.embeddings = Matrix(0, 10);
    for (std::size_t i = s * 100; i < (s + 1) * 100; ++i)
      part.append(in.queries.embeddings.row(i), in.queries.provenance[i], in.queries.domains[i],
                  in.queries.modalities[i]);
    merged = merge_accumulators(merged, execute_scan(index, in.corpus, part, 10, kDefault, b));
  }
  CHECK(merged.raw_hit_counts == whole.raw_hit_counts);
  CHECK(merged.n_queries_processed == whole.n_queries_processed);
  for (std::size_t i = 0; i < 150; ++i) CHECK(std::fabs(merged.total_weighted_hits[i] - whole.total_weighted_hits[i]) < 1e-9);
}

TEST_CASE("merge identity, commutativity and associativity") {
  std::mt19937_64 rng(6);
  auto a_in = random_instance(rng, 60, 50, 6), b_in = a_in, c_in = a_in;
  b_in.queries.embeddings = oracle::random_unit_rows(50, 6, rng);
  c_in.queries.embeddings = oracle::random_unit_rows(50, 6, rng);
  const FlatIndex index(a_in.corpus);
  const Bucketing bk{true, true, nullptr};
  const auto a = execute_scan(index, a_in.corpus, a_in.queries, 5, kUniform, bk);
  const auto b = execute_scan(index, b_in.corpus, b_in.queries, 5, kUniform, bk);
  const auto c = execute_scan(index, c_in.corpus, c_in.queries, 5, kUniform, bk);
  CHECK(merge_accumulators(a, BucketedAccumulator::empty(60, true, true, 0)) == a);
  CHECK(merge_accumulators(a, b) == merge_accumulators(b, a));
  CHECK(merge_accumulators(merge_accumulators(a, b), c) == merge_accumulators(a, merge_accumulators(b, c)));
  CHECK_THROWS_AS(merge_accumulators(a, BucketedAccumulator::empty(60, false, true, 0)), Error);
}

TEST_CASE("domain buckets sum to the global totals") {
  std::mt19937_64 rng(7);
  auto in = random_instance(rng, 80, 200, 8);
  const FlatIndex index(in.corpus);
  const auto acc = execute_scan(index, in.corpus, in.queries, 6, kDefault, {true, false, nullptr});
  std::vector<double> sum(80, 0.0);
  std::uint64_t nq = 0;
  for (const auto& [d, hits] : acc.per_domain_hits)
    for (std::size_t i = 0; i < 80; ++i) sum[i] += hits[i];
  for (const auto& [d, n] : acc.n_queries_per_domain) nq += n;
  CHECK(nq == 200);
  for (std::size_t i = 0; i < 80; ++i) CHECK(std::fabs(sum[i] - acc.total_weighted_hits[i]) < 1e-9);
}

TEST_CASE("cross-modal hits count only mismatched labelled pairs") {
  Corpus c;
  c.embeddings = Matrix(3, 2, {1, 0, 0, 1, 0.6f, 0.8f});
  c.metadata = {{"t0", std::nullopt, "text"}, {"i0", std::nullopt, "image"}, {"u", std::nullopt, std::nullopt}};
  QuerySet q;
  q.embeddings = Matrix(0, 2);
  q.append(std::vector<float>{1, 0}, QueryProvenance::real, std::nullopt, "image");
  q.append(std::vector<float>{0, 1}, QueryProvenance::real, std::nullopt, "image");
  q.append(std::vector<float>{0, 1}, QueryProvenance::real, std::nullopt, std::nullopt);
  const FlatIndex index(c);
  const auto acc = execute_scan(index, c, q, 3, kUniform, {false, true, nullptr});
  CHECK(acc.per_modality_cross_hits == std::vector<double>{2, 0, 0});
}

TEST_CASE("hub rates") {
  std::mt19937_64 rng(8);
  auto in = random_instance(rng, 30, 100, 5);
  const FlatIndex index(in.corpus);
  const auto acc = execute_scan(index, in.corpus, in.queries, 4, kUniform, {true, false, nullptr});
  const auto rates = compute_hub_rates(acc);
  for (std::size_t i = 0; i < 30; ++i) CHECK(rates[i] == double(acc.raw_hit_counts[i]) / 100.0);
  const auto scoped = compute_hub_rates(acc, "dom1");
  const double nq = double(acc.n_queries_per_domain.at("dom1"));
  for (std::size_t i = 0; i < 30; ++i) CHECK(scoped[i] == acc.per_domain_hits.at("dom1")[i] / nq);
  CHECK_THROWS_AS(compute_hub_rates(acc, "finance"), Error);

  BucketedAccumulator hand = BucketedAccumulator::empty(2, false, false, 0);
  hand.total_weighted_hits = {20, 100};
  hand.n_queries_processed = 1000;
  CHECK(compute_hub_rates(hand)[0] == 0.02);
  hand.n_queries_processed = 100;
  CHECK(compute_hub_rates(hand)[1] == 1.0);
}

TEST_CASE("bucketing without metadata is a configuration error") {
  std::mt19937_64 rng(9);
  auto in = random_instance(rng, 10, 5, 3);
  for (auto& d : in.queries.domains) d.reset();
  const FlatIndex index(in.corpus);
  try {
    execute_scan(index, in.corpus, in.queries, 2, kUniform, {true, false, nullptr});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
  for (auto& m : in.corpus.metadata) m.modality.reset();
  CHECK_THROWS_AS(execute_scan(index, in.corpus, in.queries, 2, kUniform, {false, true, nullptr}), Error);
}
