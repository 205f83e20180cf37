#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hubscan/matrix.hpp"

namespace hubscan {

struct KMeansParams {
  std::size_t batch_size = 1024;
  std::size_t max_iters = 100;
  double tolerance = 1e-4;  // stop when no centroid moves further than this
  std::uint64_t seed = 0;
  bool spherical = true;    // cosine assignment on unit vectors
};

struct ClusterModel {
  Matrix centroids;
  std::size_t n_clusters = 0;
  double inertia = 0.0;     // sum of squared distances to assigned centroids
  std::uint64_t seed = 0;
  bool spherical = true;
  std::size_t iterations = 0;
  std::vector<double> inertia_history;  // full-batch inertia after init and each accepted step
};

ClusterModel fit_minibatch_kmeans(const Matrix& points, std::size_t n_clusters,
                                  const KMeansParams& params);

// Nearest centroid (highest similarity when spherical); ties go to the lowest index.
std::size_t assign_cluster(const ClusterModel& model, std::span<const float> point);
std::vector<std::size_t> assign_all(const ClusterModel& model, const Matrix& points);

double kmeans_inertia(const ClusterModel& model, const Matrix& points);

}  // namespace hubscan
