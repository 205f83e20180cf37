#include "hubscan/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hubscan/error.hpp"
#include "hubscan/stats.hpp"

namespace hubscan {

void FusionConfig::validate() const {
  for (const auto& [name, w] : weights) {
    if (!parse_detector(name)) fail(ErrorCode::configuration, "unknown detector '" + name + "' in fusion weights");
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorCode::configuration, "fusion weight for '" + name + "' must be finite and non-negative");
  }
  if (!(z_clip > 0.0)) fail(ErrorCode::configuration, "z_clip must be positive");
  if (!(high_percentile > medium_percentile)) fail(ErrorCode::configuration, "high percentile must exceed medium");
  if (medium_percentile < 0.0 || high_percentile > 100.0)
    fail(ErrorCode::configuration, "percentiles must lie in [0, 100]");
}

double FusionConfig::weight(DetectorId id) const {
  for (const auto& [name, w] : weights)
    if (parse_detector(name) == id) return w;
  return 0.0;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::HIGH: return "HIGH";
    case Verdict::MEDIUM: return "MEDIUM";
    case Verdict::LOW: return "LOW";
  }
  return "LOW";
}

double normalize_score(DetectorId id, double raw, const FusionConfig& config, std::size_t n_docs) {
  switch (id) {
    case DetectorId::hubness:
    case DetectorId::domain_hub:
    case DetectorId::cross_modal:
      return std::clamp(raw, 0.0, config.z_clip) / config.z_clip;
    case DetectorId::cluster_spread:
    case DetectorId::stability:
      return std::clamp(raw, 0.0, 1.0);
    case DetectorId::dedup: {
      const double cap = n_docs >= 2 ? std::log2(double(n_docs)) : 1.0;
      return std::clamp(raw / cap, 0.0, 1.0);
    }
  }
  return 0.0;
}

std::vector<double> normalized_scores(const DetectorOutput& output, const FusionConfig& config) {
  std::vector<double> out(output.raw_scores.size(), 0.0);
  if (output.skipped) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = normalize_score(output.id, output.raw_scores[i], config, out.size());
  return out;
}

std::vector<double> fuse_scores(const std::vector<DetectorOutput>& outputs, const FusionConfig& config) {
  config.validate();
  if (outputs.empty()) return {};
  const std::size_t n = outputs.front().raw_scores.size();
  std::vector<double> combined(n, 0.0);
  // Fixed detector order keeps the floating-point sum independent of list order.
  for (auto id : kAllDetectors) {
    for (const auto& out : outputs) {
      if (out.id != id || out.skipped) continue;
      if (out.raw_scores.size() != n) fail(ErrorCode::shape, "detector outputs disagree in length");
      const double w = config.weight(id);
      if (w == 0.0) continue;
      const auto norm = normalized_scores(out, config);
      for (std::size_t i = 0; i < n; ++i) combined[i] += w * norm[i];
    }
  }
  return combined;
}

VerdictReport assign_verdicts(std::span<const double> combined, const FusionConfig& config) {
  config.validate();
  if (combined.empty()) fail(ErrorCode::parameter, "no scores to classify");
  VerdictReport r;
  r.combined.assign(combined.begin(), combined.end());
  r.high_threshold = percentile_value(combined, config.high_percentile);
  r.medium_threshold = percentile_value(combined, config.medium_percentile);
  r.counts = {{Verdict::HIGH, 0}, {Verdict::MEDIUM, 0}, {Verdict::LOW, 0}};
  r.verdicts.reserve(combined.size());
  for (double s : combined) {
    const Verdict v = s >= r.high_threshold ? Verdict::HIGH : s >= r.medium_threshold ? Verdict::MEDIUM : Verdict::LOW;
    r.verdicts.push_back(v);
    ++r.counts[v];
  }
  return r;
}

NeighborList rerank_filter(const NeighborList& results, const std::set<std::size_t>& flagged, double penalty) {
  if (!(penalty >= 0.0)) fail(ErrorCode::parameter, "penalty must be non-negative");
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> adjusted = results.similarities;
  for (std::size_t i = 0; i < adjusted.size(); ++i)
    if (flagged.count(results.doc_indices[i])) adjusted[i] -= penalty;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return adjusted[a] > adjusted[b]; });
  NeighborList out;
  for (std::size_t i : order) {
    out.doc_indices.push_back(results.doc_indices[i]);
    out.similarities.push_back(adjusted[i]);
  }
  return out;
}

}  // namespace hubscan
