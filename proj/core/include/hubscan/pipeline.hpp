#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hubscan/attackbench.hpp"
#include "hubscan/corpus.hpp"
#include "hubscan/detectors.hpp"
#include "hubscan/fusion.hpp"
#include "hubscan/sampling.hpp"
#include "hubscan/scan.hpp"

namespace hubscan {

struct ScanConfig {
  std::size_t k = 20;
  SamplingConfig sampling;
  HitWeighting weighting;
  std::set<DetectorId> detectors = {kAllDetectors.begin(), kAllDetectors.end()};
  RetrievalMethod method = RetrievalMethod::vector;
  FusionConfig fusion;
  std::size_t spread_clusters = 50;
  StabilityParams stability;
  std::size_t stability_candidates = 200;
  DedupParams dedup;
  DomainParams domain;
  std::optional<std::string> domain_scope;
  std::uint64_t seed = 42;
  std::size_t workers = 1;  // never changes results
};

struct ScanResult {
  ScanConfig config;
  std::vector<DetectorOutput> outputs;  // requested detectors, in canonical order
  VerdictReport verdicts;
  std::string domain_source;  // "metadata", "clustering" or "none"
  std::vector<std::optional<std::string>> doc_domains;
  std::size_t n_queries = 0;
  std::size_t n_queries_total = 0;  // before domain scoping

  const DetectorOutput& output(DetectorId id) const;
  bool has_output(DetectorId id) const noexcept;
};

ScanResult run_scan(const Corpus& corpus, const QuerySet* real_queries, const ScanConfig& config);

// Domain labels for docs and queries: metadata when any doc is labelled, else k-means
// over the corpus with min(32, floor(sqrt(N))) clusters.
std::string label_domains(const Corpus& corpus, QuerySet& queries, std::uint64_t seed,
                          std::vector<std::optional<std::string>>& doc_domains);

// Effective configuration as JSON text (worker count omitted).
std::string scan_config_to_json(const ScanConfig& config);
// Overlays keys from a JSON object onto `base`. Unknown keys are a configuration error.
ScanConfig scan_config_from_json(const std::string& json_text, ScanConfig base = {});

std::string report_json(const ScanResult& result, const Corpus& corpus);
std::string report_csv(const ScanResult& result, const Corpus& corpus);

struct BenchConfig {
  HubVariant variant = HubVariant::universal;
  std::size_t n_hubs = 10;
  std::optional<double> fraction;  // overrides n_hubs: hubs / (N + hubs) = fraction
  std::size_t n_benign = 0;        // benign universal "popular" docs (not ground-truth hubs)
  std::optional<std::string> target_domain;
  double lambda_neg = 3.0;
  bool hinge_repulsion = true;
  std::size_t margin_k = 20;
  std::size_t n_targets = 200;
  std::size_t steps = 1000;
  double momentum = 0.9;
  double learning_rate = 0.12;
  std::size_t centroid_docs = 2;
  std::uint64_t seed = 7;
  bool allow_override = false;
  std::size_t workers = 1;
};

Corpus build_benchmark(const Corpus& base, const BenchConfig& config);

// Parses "n=5000,dim=128,clusters=20,kappa=0.6,shared=0.5,seed=1".
SyntheticCorpusSpec parse_synthetic_spec(const std::string& text, std::uint64_t default_seed);

}  // namespace hubscan
