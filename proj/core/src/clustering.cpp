#include "hubscan/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hubscan/error.hpp"
#include "hubscan/rng.hpp"
#include "kernel.hpp"

namespace hubscan {
namespace {

using detail::PackedRows;

constexpr std::size_t kPointBlock = 256;
constexpr std::size_t kCentroidBlock = 256;

struct Assignment {
  std::vector<std::size_t> label;
  std::vector<double> dist2;
  double inertia = 0.0;
};

double norm2(const double* v, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += v[i] * v[i];
  return s;
}

// Spherical: maximize <x,c>. Euclidean: maximize 2<x,c> - |c|^2. Strict > keeps the lowest index.
Assignment assign_packed(const PackedRows& pts, const std::vector<double>& pnorm2,
                         const PackedRows& cents, bool spherical) {
  const std::size_t n = pts.rows(), k = cents.rows(), d = pts.dim();
  std::vector<double> cnorm2(k);
  for (std::size_t c = 0; c < k; ++c) cnorm2[c] = norm2(cents.row(c), d);

  Assignment a;
  a.label.assign(n, 0);
  a.dist2.assign(n, 0.0);
  std::vector<double> best(n, -std::numeric_limits<double>::infinity());
  std::vector<double> best_dot(n, 0.0);
  std::vector<double> tile(kPointBlock * kCentroidBlock);
  for (std::size_t p0 = 0; p0 < n; p0 += kPointBlock) {
    const std::size_t np = std::min(kPointBlock, n - p0);
    for (std::size_t c0 = 0; c0 < k; c0 += kCentroidBlock) {
      const std::size_t nc = std::min(kCentroidBlock, k - c0);
      detail::dot_tile(pts, p0, np, cents, c0, nc, tile.data(), kCentroidBlock);
      for (std::size_t i = 0; i < np; ++i) {
        const double* row = tile.data() + i * kCentroidBlock;
        for (std::size_t j = 0; j < nc; ++j) {
          const double s = spherical ? row[j] : 2.0 * row[j] - cnorm2[c0 + j];
          if (s > best[p0 + i]) {
            best[p0 + i] = s;
            best_dot[p0 + i] = row[j];
            a.label[p0 + i] = c0 + j;
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    a.dist2[i] = std::max(0.0, pnorm2[i] + cnorm2[a.label[i]] - 2.0 * best_dot[i]);
    a.inertia += a.dist2[i];
  }
  return a;
}

PackedRows pack(const std::vector<double>& c, std::size_t k, std::size_t d) {
  PackedRows p;
  p.resize(k, d);
  for (std::size_t i = 0; i < k; ++i) p.assign_row(i, c.data() + i * d);
  return p;
}

void normalize_rows(std::vector<double>& c, std::size_t k, std::size_t d) {
  for (std::size_t i = 0; i < k; ++i) {
    double* v = c.data() + i * d;
    const double n = std::sqrt(norm2(v, d));
    if (n > 0.0)
      for (std::size_t j = 0; j < d; ++j) v[j] /= n;
  }
}

std::vector<double> kmeans_pp(const Matrix& points, const PackedRows& pts,
                              const std::vector<double>& pnorm2, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows(), d = points.cols();
  std::vector<double> cents(k * d);
  std::vector<bool> chosen(n, false);
  std::vector<double> mind(n, std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t idx, std::size_t slot) {
    chosen[idx] = true;
    for (std::size_t j = 0; j < d; ++j) cents[slot * d + j] = points(idx, j);
    const double* c = pts.row(idx);
    for (std::size_t i = 0; i < n; ++i) {
      const double dd =
          std::max(0.0, pnorm2[i] + pnorm2[idx] - 2.0 * detail::dot_packed(pts.row(i), c, pts.blocks()));
      mind[i] = std::min(mind[i], dd);
    }
  };
  take(uniform_index(rng, n), 0);
  for (std::size_t s = 1; s < k; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : mind[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += mind[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
      if (pick == n)  // rounding fell off the end: last eligible point with mass
        for (std::size_t i = n; i-- > 0;)
          if (!chosen[i] && mind[i] > 0.0) {
            pick = i;
            break;
          }
    }
    if (pick == n)  // every remaining point coincides with a centroid
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) {
          pick = i;
          break;
        }
    take(pick, s);
  }
  return cents;
}

// One exact Lloyd update from a full assignment; empty clusters keep their centroid.
std::vector<double> lloyd_update(const Matrix& points, const Assignment& a, const std::vector<double>& cents,
                                 std::size_t k, bool spherical) {
  const std::size_t d = points.cols();
  std::vector<double> sum(k * d, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const std::size_t c = a.label[i];
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) sum[c * d + j] += points(i, j);
  }
  std::vector<double> next = cents;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) next[c * d + j] = sum[c * d + j] / double(count[c]);
  }
  if (spherical) normalize_rows(next, k, d);
  return next;
}

double max_shift(const std::vector<double>& a, const std::vector<double>& b, std::size_t k, std::size_t d) {
  double worst = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = a[c * d + j] - b[c * d + j];
      s += t * t;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace

ClusterModel fit_minibatch_kmeans(const Matrix& points, std::size_t n_clusters, const KMeansParams& params) {
  const std::size_t n = points.rows(), d = points.cols();
  if (n_clusters < 1) fail(ErrorCode::parameter, "n_clusters must be at least 1");
  if (n_clusters > n) fail(ErrorCode::parameter, "n_clusters exceeds the number of points");
  if (params.batch_size < 1) fail(ErrorCode::parameter, "batch_size must be at least 1");

  Rng rng = make_rng(params.seed, "kmeans");
  const PackedRows pts(points);
  std::vector<double> pnorm2(n);
  for (std::size_t i = 0; i < n; ++i) pnorm2[i] = norm2(pts.row(i), d);

  const std::size_t k = n_clusters;
  std::vector<double> cents = kmeans_pp(points, pts, pnorm2, k, rng);
  if (params.spherical) normalize_rows(cents, k, d);

  ClusterModel model;
  model.n_clusters = k;
  model.seed = params.seed;
  model.spherical = params.spherical;

  Assignment full = assign_packed(pts, pnorm2, pack(cents, k, d), params.spherical);
  model.inertia_history.push_back(full.inertia);

  const bool full_batch = params.batch_size >= n;
  std::vector<double> counts(k, 0.0);
  std::vector<std::size_t> batch(std::min(params.batch_size, n));
  PackedRows bpts;
  std::vector<double> bnorm2;

  for (std::size_t it = 0; it < params.max_iters; ++it) {
    ++model.iterations;
    std::vector<double> next;
    std::vector<double> next_counts = counts;
    if (full_batch) {
      next = lloyd_update(points, full, cents, k, params.spherical);
    } else {
      for (auto& b : batch) b = uniform_index(rng, n);
      bpts.resize(batch.size(), d);
      bnorm2.resize(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        bpts.assign_row(i, pts.row(batch[i]));
        bnorm2[i] = pnorm2[batch[i]];
      }
      const Assignment ba = assign_packed(bpts, bnorm2, pack(cents, k, d), params.spherical);
      next = cents;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::size_t c = ba.label[i];
        next_counts[c] += 1.0;
        const double eta = 1.0 / next_counts[c];
        const double* x = pts.row(batch[i]);
        for (std::size_t j = 0; j < d; ++j) next[c * d + j] = (1.0 - eta) * next[c * d + j] + eta * x[j];
      }
      if (params.spherical) normalize_rows(next, k, d);
    }

    Assignment trial = assign_packed(pts, pnorm2, pack(next, k, d), params.spherical);
    if (trial.inertia > full.inertia) continue;  // guarded step: keep the better model
    const double shift = max_shift(cents, next, k, d);
    const bool same_labels = trial.label == full.label;
    cents = std::move(next);
    counts = std::move(next_counts);
    full = std::move(trial);
    model.inertia_history.push_back(full.inertia);
    if (shift < params.tolerance || (full_batch && same_labels)) break;
  }

  // A closing exact Lloyd pass never raises inertia and settles mini-batch noise.
  if (!full_batch) {
    std::vector<double> next = lloyd_update(points, full, cents, k, params.spherical);
    Assignment trial = assign_packed(pts, pnorm2, pack(next, k, d), params.spherical);
    if (trial.inertia <= full.inertia) {
      cents = std::move(next);
      full = std::move(trial);
      model.inertia_history.push_back(full.inertia);
    }
  }

  model.centroids = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) model.centroids(c, j) = static_cast<float>(cents[c * d + j]);
  if (params.spherical)
    for (std::size_t c = 0; c < k; ++c) normalize(model.centroids.row(c));
  model.inertia = kmeans_inertia(model, points);
  return model;
}

std::vector<std::size_t> assign_all(const ClusterModel& model, const Matrix& points) {
  if (points.cols() != model.centroids.cols()) fail(ErrorCode::shape, "point dimension does not match model");
  const PackedRows pts(points);
  std::vector<double> pnorm2(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) pnorm2[i] = norm2(pts.row(i), points.cols());
  return assign_packed(pts, pnorm2, PackedRows(model.centroids), model.spherical).label;
}

std::size_t assign_cluster(const ClusterModel& model, std::span<const float> point) {
  if (point.size() != model.centroids.cols()) fail(ErrorCode::shape, "point dimension does not match model");
  Matrix m(1, point.size(), std::vector<float>(point.begin(), point.end()));
  return assign_all(model, m).front();
}

double kmeans_inertia(const ClusterModel& model, const Matrix& points) {
  if (points.cols() != model.centroids.cols()) fail(ErrorCode::shape, "point dimension does not match model");
  const PackedRows pts(points);
  std::vector<double> pnorm2(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) pnorm2[i] = norm2(pts.row(i), points.cols());
  return assign_packed(pts, pnorm2, PackedRows(model.centroids), model.spherical).inertia;
}

}  // namespace hubscan
