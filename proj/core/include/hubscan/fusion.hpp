#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hubscan/detectors.hpp"
#include "hubscan/index.hpp"

namespace hubscan {

struct FusionConfig {
  // Keyed by detector name; detectors without an entry get weight 0.
  std::map<std::string, double> weights = {
      {"hubness", 1.0}, {"domain_hub", 0.5}, {"cross_modal", 0.5}, {"cluster_spread", 0.3}, {"stability", 0.2}};
  double z_clip = 10.0;
  double high_percentile = 99.0;
  double medium_percentile = 98.0;

  void validate() const;
  double weight(DetectorId id) const;
};

enum class Verdict { LOW, MEDIUM, HIGH };

std::string_view to_string(Verdict v) noexcept;

// Maps a raw detector score into [0, 1].
double normalize_score(DetectorId id, double raw, const FusionConfig& config, std::size_t n_docs);

std::vector<double> normalized_scores(const DetectorOutput& output, const FusionConfig& config);

std::vector<double> fuse_scores(const std::vector<DetectorOutput>& outputs, const FusionConfig& config);

struct VerdictReport {
  std::vector<double> combined;
  std::vector<Verdict> verdicts;
  double high_threshold = 0.0;
  double medium_threshold = 0.0;
  std::map<Verdict, std::size_t> counts;
};

VerdictReport assign_verdicts(std::span<const double> combined, const FusionConfig& config);

NeighborList rerank_filter(const NeighborList& results, const std::set<std::size_t>& flagged, double penalty);

}  // namespace hubscan
