#include <doctest.h>

#include <cmath>
#include <random>

#include "hubscan/clustering.hpp"
#include "hubscan/error.hpp"
#include "oracles.hpp"

using namespace hubscan;

namespace {

// Two tight blobs around orthogonal directions, rows unit-normalized.
Matrix two_blobs(std::size_t per_blob, std::size_t d, std::mt19937_64& rng, std::vector<int>* labels = nullptr) {
  std::normal_distribution<double> g(0.0, 0.05);
  Matrix m(2 * per_blob, d);
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    const int b = i < per_blob ? 0 : 1;
    if (labels) labels->push_back(b);
    for (std::size_t j = 0; j < d; ++j) m(i, j) = float((j == std::size_t(b) ? 1.0 : 0.0) + g(rng));
    normalize(m.row(i));
  }
  return m;
}

std::vector<std::vector<double>> centroids_of(const ClusterModel& m) {
  std::vector<std::vector<double>> out(m.n_clusters);
  for (std::size_t c = 0; c < m.n_clusters; ++c) out[c].assign(m.centroids.row(c).begin(), m.centroids.row(c).end());
  return out;
}

}  // namespace

TEST_CASE("one cluster is the normalized mean") {
  std::mt19937_64 rng(1);
  const Matrix pts = oracle::random_unit_rows(50, 6, rng);
  KMeansParams p;
  p.seed = 3;
  const auto m = fit_minibatch_kmeans(pts, 1, p);
  std::vector<double> mean(6, 0.0);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 6; ++j) mean[j] += pts(i, j);
  double norm = 0.0;
  for (double v : mean) norm += v * v;
  norm = std::sqrt(norm);
  for (std::size_t j = 0; j < 6; ++j) CHECK(m.centroids(0, j) == doctest::Approx(mean[j] / norm).epsilon(1e-5));
}

TEST_CASE("one cluster per point gives zero inertia") {
  std::mt19937_64 rng(2);
  const Matrix pts = oracle::random_unit_rows(12, 5, rng);
  KMeansParams p;
  p.spherical = false;
  const auto m = fit_minibatch_kmeans(pts, 12, p);
  CHECK(m.inertia == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_minibatch_kmeans(pts, 13, p), Error);
}

TEST_CASE("two separated blobs recover their means") {
  std::mt19937_64 rng(3);
  std::vector<int> labels;
  const Matrix pts = two_blobs(100, 8, rng, &labels);
  KMeansParams p;
  p.seed = 11;
  p.batch_size = 64;
  const auto m = fit_minibatch_kmeans(pts, 2, p);

  std::vector<std::vector<double>> init(2, std::vector<double>(8, 0.0));
  init[0][0] = init[1][1] = 1.0;
  const auto ref = oracle::lloyd(pts, init);
  for (std::size_t b = 0; b < 2; ++b) {
    double norm = 0.0;
    for (double v : ref.centroids[b]) norm += v * v;
    const auto cid = assign_cluster(m, pts.row(b * 100));
    double cos = 0.0;
    for (std::size_t j = 0; j < 8; ++j) cos += m.centroids(cid, j) * ref.centroids[b][j] / std::sqrt(norm);
    CHECK(1.0 - cos < 0.05);
    for (std::size_t i = b * 100; i < (b + 1) * 100; ++i) CHECK(assign_cluster(m, pts.row(i)) == cid);
  }
}

TEST_CASE("assignment identity and tie rule") {
  ClusterModel m;
  m.n_clusters = 4;
  m.centroids = Matrix(4, 2, {1, 0, 0, 1, -1, 0, 0.6f, 0.8f});
  CHECK(assign_cluster(m, std::vector<float>{0.6f, 0.8f}) == 3);
  const float h = float(1.0 / std::sqrt(2.0));
  CHECK(assign_cluster(m, std::vector<float>{h, -h}) == 0);
  m.centroids = Matrix(2, 2, {h, h, h, -h});
  CHECK(assign_cluster(m, std::vector<float>{1, 0}) == 0);
  CHECK_THROWS_AS(assign_cluster(m, std::vector<float>{1, 0, 0}), Error);
}

TEST_CASE("mini-batch inertia stays within 10% of Lloyd from the same start") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix pts = oracle::random_unit_rows(200, 6, rng);
    KMeansParams init_only;
    init_only.seed = 100 + trial;
    init_only.spherical = false;
    init_only.max_iters = 0;
    init_only.batch_size = 1 << 20;
    const auto start = fit_minibatch_kmeans(pts, 5, init_only);

    KMeansParams p = init_only;
    p.max_iters = 100;
    p.batch_size = 32;
    const auto fit = fit_minibatch_kmeans(pts, 5, p);
    const auto ref = oracle::lloyd(pts, centroids_of(start));
    CHECK(fit.inertia <= 1.10 * ref.inertia);
    for (std::size_t i = 1; i < fit.inertia_history.size(); ++i)
      CHECK(fit.inertia_history[i] <= fit.inertia_history[i - 1]);
  }
}

TEST_CASE("fixed seed gives identical centroids") {
  std::mt19937_64 rng(5);
  const Matrix pts = oracle::random_unit_rows(3000, 16, rng);
  KMeansParams p;
  p.seed = 9;
  p.batch_size = 256;
  const auto a = fit_minibatch_kmeans(pts, 20, p);
  const auto b = fit_minibatch_kmeans(pts, 20, p);
  CHECK(a.centroids == b.centroids);
  for (std::size_t c = 0; c < 20; ++c) CHECK(std::fabs(l2_norm(a.centroids.row(c)) - 1.0) < 1e-6);
  CHECK(assign_all(a, pts) == assign_all(b, pts));
}
