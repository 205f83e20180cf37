#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hubscan/corpus.hpp"
#include "hubscan/matrix.hpp"

namespace hubscan {

enum class HubVariant { universal, domain_targeted, centroid };
enum class LrSchedule { cosine, constant };

std::string_view to_string(HubVariant v) noexcept;
HubVariant parse_hub_variant(std::string_view name);

struct HubRecipe {
  HubVariant variant = HubVariant::universal;
  Matrix target_queries;
  std::optional<Matrix> negative_queries;
  // Optional per-negative margins. When present the repulsion is
  // lambda * sum max(0, sim(h, q) - margin_q) instead of lambda * sum sim(h, q).
  std::vector<double> negative_margins;
  double lambda_neg = 3.0;
  double momentum = 0.9;
  double learning_rate = 0.12;
  std::size_t steps = 1000;
  LrSchedule schedule = LrSchedule::cosine;
  std::uint64_t seed = 0;
  std::optional<std::vector<float>> initial;  // default: normalized mean of the targets
};

struct OptimizedHub {
  std::vector<float> embedding;
  std::vector<double> objective_trace;  // objective after each step
  bool tail_non_decreasing = true;      // over the final 10% of steps
};

double hub_objective(const HubRecipe& recipe, std::span<const float> h);
OptimizedHub optimize_hub(const HubRecipe& recipe);

// Weighted mean of rows, renormalized. Uniform weights when `weights` is empty.
std::vector<float> centroid_hub(const Matrix& docs, std::span<const double> weights = {});

struct PlantedHub {
  std::vector<float> embedding;
  std::string recipe_json = "{}";
  bool adversarial = true;  // false plants a benign high-popularity doc
  std::optional<std::string> domain;
  std::optional<std::string> modality;
};

Corpus plant_hubs(const Corpus& corpus, const std::vector<PlantedHub>& hubs, bool allow_override = false);

struct SyntheticCorpusSpec {
  std::size_t n_docs = 5000;
  std::size_t dim = 128;
  std::size_t n_clusters = 20;
  double intra_cluster_concentration = 0.6;
  // Weight of a direction shared by all component means (0 = isotropic means).
  double shared_direction = 0.5;
  std::uint64_t seed = 0;
};

Corpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec);

// Summary of a recipe for the planted doc's metadata (the target matrix is not embedded).
std::string recipe_summary_json(const HubRecipe& recipe, std::string_view extra_json = "{}");

}  // namespace hubscan
