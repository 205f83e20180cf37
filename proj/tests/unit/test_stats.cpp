#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hubscan/error.hpp"
#include "hubscan/stats.hpp"
#include "oracles.hpp"

using namespace hubscan;

TEST_CASE("robust z on a constant vector is degenerate and zero") {
  const std::vector<double> x{5, 5, 5, 5};
  const auto r = robust_zscore(x);
  CHECK(r.degenerate);
  for (double z : r.zscores) CHECK(z == 0.0);
}

TEST_CASE("robust z hand example") {
  const std::vector<double> x{1, 2, 3, 4, 100};
  const auto r = robust_zscore(x);
  CHECK(r.median == 3.0);
  CHECK(r.mad_scaled == doctest::Approx(1.4826).epsilon(1e-15));
  CHECK(std::fabs(r.zscores[4] - 97.0 / 1.4826) < 1e-12);
  CHECK(std::fabs(r.zscores[4] - 65.43) < 0.01);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("robust z floors a zero MAD") {
  std::vector<double> x(999, 0.02);
  x.push_back(0.5);
  const auto r = robust_zscore(x);
  CHECK(r.degenerate);
  CHECK(r.zscores.back() == doctest::Approx((0.5 - 0.02) / 1e-12));
  CHECK(r.zscores.front() == 0.0);
}

TEST_CASE("median of even length averages the central pair") {
  const std::vector<double> x{4, 1, 3, 2};
  CHECK(median(x) == 2.5);
  CHECK_THROWS_AS(median(std::vector<double>{}), Error);
  CHECK_THROWS_AS(robust_zscore(std::vector<double>{}), Error);
}

TEST_CASE("normalized entropy examples") {
  CHECK(normalized_entropy(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(normalized_entropy(std::vector<double>{7, 0, 0, 0}) == 0.0);
  CHECK(std::fabs(normalized_entropy(std::vector<double>{2, 2, 0, 0}) - 0.5) < 1e-12);
  CHECK(normalized_entropy(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK_THROWS_AS(normalized_entropy(std::vector<double>{3}), Error);
}

TEST_CASE("gini examples") {
  CHECK(gini(std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::fabs(gini(std::vector<double>{0, 0, 1, 0, 0}) - 0.8) < 1e-12);
  const std::vector<double> r{0.1, 0.1, 0.8};
  CHECK(std::fabs(gini(r) - oracle::gini(r)) < 1e-12);
  CHECK_THROWS_AS(gini(std::vector<double>{0.5, -0.1}), Error);
}

TEST_CASE("percentile uses the nearest-rank order statistic") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(v.size() - i);
  CHECK(percentile_value(v, 99.0) == 991.0);
  CHECK(percentile_value(v, 0.0) == 1.0);
  CHECK(percentile_value(v, 100.0) == 1000.0);
  CHECK(percentile_value(std::vector<double>{3, 3, 3}, 99.9) == 3.0);
}

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t lo = 2, std::size_t hi = 60) {
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::uniform_real_distribution<double> val(0.0, 10.0);
  std::vector<double> v(len(rng));
  for (auto& x : v) x = val(rng);
  return v;
}

}  // namespace

TEST_CASE("robust z properties over random inputs") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> shift(-50.0, 50.0), scale(0.01, 100.0);
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_vector(rng);
    const auto z = robust_zscore(x).zscores;
    const auto ref = oracle::robust_z(x);
    const double c = shift(rng), a = scale(rng);
    std::vector<double> xs, xa;
    for (double v : x) {
      xs.push_back(v + c);
      xa.push_back(a * v);
    }
    const auto zs = robust_zscore(xs).zscores, za = robust_zscore(xa).zscores;
    for (std::size_t i = 0; i < x.size(); ++i) {
      REQUIRE(std::fabs(z[i] - ref[i]) <= 1e-12 * std::max(1.0, std::fabs(ref[i])));
      REQUIRE(std::fabs(zs[i] - z[i]) <= 1e-9 * std::max(1.0, std::fabs(z[i])));
      REQUIRE(std::fabs(za[i] - z[i]) <= 1e-9 * std::max(1.0, std::fabs(z[i])));
    }
  }
}

TEST_CASE("entropy properties over random inputs") {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> scale(0.001, 1000.0);
  for (int t = 0; t < 1000; ++t) {
    auto x = random_vector(rng);
    if (t % 7 == 0) x[0] = 0.0;
    const double h = normalized_entropy(x);
    REQUIRE(std::fabs(h - oracle::entropy(x)) < 1e-12);
    REQUIRE(h >= 0.0);
    REQUIRE(h <= 1.0 + 1e-12);
    auto p = x;
    std::shuffle(p.begin(), p.end(), rng);
    REQUIRE(std::fabs(normalized_entropy(p) - h) < 1e-12);
    const double a = scale(rng);
    for (auto& v : p) v *= a;
    REQUIRE(std::fabs(normalized_entropy(p) - h) < 1e-12);
    const std::vector<double> uniform(x.size(), a);
    REQUIRE(std::fabs(normalized_entropy(uniform) - 1.0) < 1e-12);
    std::vector<double> hot(x.size(), 0.0);
    hot[t % hot.size()] = a;
    REQUIRE(normalized_entropy(hot) == 0.0);
  }
}

TEST_CASE("gini properties over random inputs") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> scale(0.001, 1000.0);
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_vector(rng);
    const double g = gini(x);
    REQUIRE(std::fabs(g - oracle::gini(x)) < 1e-12);
    auto p = x;
    std::shuffle(p.begin(), p.end(), rng);
    const double a = scale(rng);
    for (auto& v : p) v *= a;
    REQUIRE(std::fabs(gini(p) - g) < 1e-12);
    const std::size_t n = x.size();
    REQUIRE(std::fabs(gini(std::vector<double>(n, a))) < 1e-12);
    std::vector<double> hot(n, 0.0);
    hot[t % n] = a;
    REQUIRE(std::fabs(gini(hot) - double(n - 1) / double(n)) < 1e-12);
  }
}
