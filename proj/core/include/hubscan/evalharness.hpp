#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hubscan/corpus.hpp"
#include "hubscan/pipeline.hpp"

namespace hubscan {

struct Budget {
  std::optional<double> fraction;
  std::optional<std::size_t> k;

  static Budget of_fraction(double b) { return {b, std::nullopt}; }
  static Budget of_k(std::size_t k) { return {std::nullopt, k}; }
};

struct BudgetEval {
  double budget_fraction = 0.0;
  std::size_t K = 0;
  std::size_t n_docs = 0;
  std::size_t n_true = 0;
  std::size_t true_in_top_k = 0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<std::size_t> flagged;  // top-K doc indices, best first
};

// K = ceil(b * N) for a fractional budget (explicit K is used as is).
BudgetEval alert_budget_eval(std::span<const double> combined, const std::vector<bool>& truth, const Budget& budget);

// Mann-Whitney AUC with ties counted as 1/2.
double auc_roc(std::span<const double> scores, const std::vector<bool>& labels);

struct ScoreSummary {
  double p99 = 0.0;
  double p999 = 0.0;
  double max = 0.0;
  std::optional<double> max_clean;
  std::optional<double> min_adversarial;
  std::optional<double> separation_factor;  // min_adversarial / p99 over clean docs
};

// With truth present, percentiles are taken over the clean docs.
ScoreSummary score_distribution_summary(std::span<const double> combined, const std::vector<bool>* truth = nullptr);

struct SweepRow {
  double fraction = 0.0;
  std::size_t n_hubs = 0;
  std::size_t n_docs = 0;
  double auc = 0.0;
};

struct SweepConfig {
  BenchConfig bench;  // variant/optimizer settings; n_hubs is derived per fraction
  ScanConfig scan;    // detectors forced to hubness only
};

std::size_t hubs_for_fraction(std::size_t n_clean, double fraction);

std::vector<SweepRow> fraction_sweep(const Corpus& base, std::span<const double> fractions, const SweepConfig& config);

}  // namespace hubscan
