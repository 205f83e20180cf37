#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hubscan/clustering.hpp"
#include "hubscan/corpus.hpp"
#include "hubscan/index.hpp"
#include "hubscan/scan.hpp"

namespace hubscan {

enum class DetectorId { hubness, cluster_spread, stability, dedup, domain_hub, cross_modal };

inline constexpr std::array<DetectorId, 6> kAllDetectors = {
    DetectorId::hubness, DetectorId::cluster_spread, DetectorId::stability,
    DetectorId::dedup,   DetectorId::domain_hub,     DetectorId::cross_modal};

std::string_view to_string(DetectorId id) noexcept;
std::optional<DetectorId> parse_detector(std::string_view name) noexcept;

enum class RetrievalMethod { vector, hybrid, lexical };

std::string_view to_string(RetrievalMethod m) noexcept;
RetrievalMethod parse_retrieval_method(std::string_view name);

struct DetectorOutput {
  DetectorId id = DetectorId::hubness;
  std::vector<double> raw_scores;
  bool skipped = false;
  std::string skip_reason;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> numeric_aux;
  std::map<std::string, std::vector<std::string>> label_aux;
};

DetectorOutput skipped_output(DetectorId id, std::size_t n_docs, std::string reason);

// Robust z of the rates. When `population` is given, median and MAD are taken over
// those docs only and applied to every doc.
DetectorOutput hubness_detect(std::span<const double> rates,
                              std::span<const std::size_t> population = {});

ClusterModel fit_query_clusters(const QuerySet& queries, std::size_t n_clusters, std::uint64_t seed,
                                bool spherical = true);

// Normalized entropy of each doc's hits over query clusters, from a scan bucketed by cluster.
DetectorOutput cluster_spread_from_accumulator(const BucketedAccumulator& acc);

DetectorOutput cluster_spread_detect(const FlatIndex& index, const Corpus& corpus, const QuerySet& queries,
                                     std::size_t n_clusters, std::size_t k, std::uint64_t seed,
                                     RetrievalMethod method = RetrievalMethod::vector,
                                     const ScanOptions& options = {});

struct StabilityParams {
  std::size_t n_perturbations = 5;
  // Expected norm of the query noise; per-coordinate std is sigma / sqrt(D).
  double sigma = 0.01;
  std::size_t k = 20;
  std::uint64_t seed = 0;
};

// Hit counts of `candidates` over one pass of `queries` (no weighting).
std::vector<std::uint64_t> candidate_hits(const FlatIndex& index, const Matrix& queries,
                                          std::span<const std::size_t> candidates, std::size_t k,
                                          const ScanOptions& options = {});

// Queries plus Gaussian noise, renormalized. Noise for each fixed-size block of rows
// comes from its own derived stream.
Matrix perturb_queries(const Matrix& queries, double sigma, std::uint64_t seed, std::size_t round,
                       bool renormalize = true);

DetectorOutput stability_detect(const FlatIndex& index, const QuerySet& queries,
                                std::span<const std::size_t> candidates, const StabilityParams& params,
                                RetrievalMethod method = RetrievalMethod::vector,
                                const ScanOptions& options = {},
                                std::span<const std::uint64_t> original_hits = {});

// Top-n docs by score, ties to the lower index.
std::vector<std::size_t> top_candidates(std::span<const double> scores, std::size_t n);

struct DedupParams {
  double near_dup_threshold = 0.98;
  std::size_t boilerplate_min_cluster = 10;
  std::size_t neighbors = 32;  // near-duplicate candidates examined per doc
};

DetectorOutput dedup_detect(const Corpus& corpus, const FlatIndex& index, const DedupParams& params,
                            const ScanOptions& options = {});

struct DomainParams {
  double contrast_z = 5.0;
  double contrast_gini = 0.5;
};

DetectorOutput domain_detect(const BucketedAccumulator& acc,
                             std::span<const std::optional<std::string>> doc_domains,
                             const DomainParams& params = {});

DetectorOutput crossmodal_detect(const BucketedAccumulator& acc);

std::set<DetectorId> gate_detectors(RetrievalMethod method, const std::set<DetectorId>& requested);

}  // namespace hubscan
