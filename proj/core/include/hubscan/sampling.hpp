#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "hubscan/clustering.hpp"
#include "hubscan/corpus.hpp"

namespace hubscan {

struct SamplingConfig {
  std::size_t total = 10000;
  double frac_centroid = 0.5;
  double frac_random = 0.5;
  double frac_real = 0.0;
  std::optional<std::size_t> n_centroid_clusters;  // default min(256, floor(sqrt(N)) * 4)
  std::uint64_t seed = 0;
  std::size_t kmeans_batch_size = 1024;
  std::size_t kmeans_max_iters = 100;
};

std::size_t default_centroid_clusters(std::size_t n_docs) noexcept;

// Largest-remainder split of `total` into {centroid, random, real}.
std::array<std::size_t, 3> split_counts(std::size_t total, double frac_centroid, double frac_random,
                                        double frac_real);

QuerySet sample_queries(const Corpus& corpus, const QuerySet* real_queries, const SamplingConfig& config);

// Majority label among `members`, ties to the lexicographically lowest label.
std::optional<std::string> majority_label(const std::vector<std::optional<std::string>>& labels,
                                          std::span<const std::size_t> members);

}  // namespace hubscan
