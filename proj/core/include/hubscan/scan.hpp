#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubscan/clustering.hpp"
#include "hubscan/corpus.hpp"
#include "hubscan/index.hpp"

namespace hubscan {

enum class RankWeight { uniform, inverse_log_rank };
enum class DistWeight { uniform, similarity };

struct HitWeighting {
  RankWeight rank = RankWeight::inverse_log_rank;
  DistWeight dist = DistWeight::similarity;

  // position is the 1-based rank. Similarity weight is clamp(sim, 1e-6, 1).
  double weight(std::size_t position, double similarity) const noexcept;
};

struct Bucketing {
  bool by_domain = false;
  bool by_modality = false;
  const ClusterModel* by_query_cluster = nullptr;
};

struct BucketedAccumulator {
  std::size_t n_docs = 0;
  std::vector<double> total_weighted_hits;
  std::vector<std::uint64_t> raw_hit_counts;

  bool has_domains = false;
  std::map<std::string, std::vector<double>> per_domain_hits;
  std::map<std::string, std::uint64_t> n_queries_per_domain;

  bool has_modalities = false;
  std::vector<double> per_modality_cross_hits;
  // Raw hits split by the querying modality (feeds dominant_query_modality).
  std::map<std::string, std::vector<double>> per_query_modality_hits;

  std::size_t n_query_clusters = 0;
  std::vector<std::uint32_t> per_cluster_hits;  // [doc * n_query_clusters + cluster]

  std::uint64_t n_queries_processed = 0;

  static BucketedAccumulator empty(std::size_t n_docs, bool by_domain, bool by_modality,
                                   std::size_t n_query_clusters);

  std::uint32_t cluster_hits(std::size_t doc, std::size_t cluster) const noexcept {
    return per_cluster_hits[doc * n_query_clusters + cluster];
  }

  friend bool operator==(const BucketedAccumulator&, const BucketedAccumulator&) = default;
};

struct ScanOptions {
  std::size_t workers = 1;
  std::size_t shard_size = 256;  // fixed so results do not depend on worker count
};

BucketedAccumulator execute_scan(const FlatIndex& index, const Corpus& corpus, const QuerySet& queries,
                                 std::size_t k, const HitWeighting& weighting, const Bucketing& bucketing,
                                 const ScanOptions& options = {});

BucketedAccumulator merge_accumulators(const BucketedAccumulator& a, const BucketedAccumulator& b);

// Scope is global when `domain` is empty.
std::vector<double> compute_hub_rates(const BucketedAccumulator& acc,
                                      const std::optional<std::string>& domain = std::nullopt);

// Runs fn(begin, end, shard_id) over fixed-size shards on `workers` threads.
// Returned shard results are ordered by shard id.
template <typename Result, typename Fn>
std::vector<Result> run_sharded(std::size_t n, std::size_t shard_size, std::size_t workers, Fn fn);

}  // namespace hubscan

#include "hubscan/detail/sharding.hpp"
