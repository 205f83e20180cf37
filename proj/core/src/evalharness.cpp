#include "hubscan/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hubscan/error.hpp"
#include "hubscan/stats.hpp"

namespace hubscan {

BudgetEval alert_budget_eval(std::span<const double> combined, const std::vector<bool>& truth, const Budget& budget) {
  const std::size_t n = combined.size();
  if (truth.size() != n) fail(ErrorCode::evaluation, "truth and scores differ in length");
  const std::size_t positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), true));
  if (positives == 0) fail(ErrorCode::evaluation, "ground truth has no positives");

  BudgetEval e;
  e.n_docs = n;
  e.n_true = positives;
  if (budget.k) {
    if (*budget.k < 1) fail(ErrorCode::evaluation, "K must be at least 1");
    e.K = std::min(*budget.k, n);
    e.budget_fraction = double(e.K) / double(n);
  } else if (budget.fraction) {
    const double b = *budget.fraction;
    if (!(b > 0.0 && b <= 1.0)) fail(ErrorCode::evaluation, "budget fraction must lie in (0, 1]");
    e.budget_fraction = b;
    // Guard against b*N landing a hair above an integer through rounding.
    e.K = std::min(n, static_cast<std::size_t>(std::ceil(b * double(n) - 1e-9)));
    e.K = std::max<std::size_t>(e.K, 1);
  } else {
    fail(ErrorCode::evaluation, "budget needs a fraction or an explicit K");
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return combined[a] > combined[b]; });
  e.flagged.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(e.K));
  for (std::size_t i : e.flagged) e.true_in_top_k += truth[i] ? 1 : 0;
  e.precision = double(e.true_in_top_k) / double(e.K);
  e.recall = double(e.true_in_top_k) / double(positives);
  return e;
}

double auc_roc(std::span<const double> scores, const std::vector<bool>& labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) fail(ErrorCode::evaluation, "labels and scores differ in length");
  std::size_t npos = 0;
  for (bool b : labels) npos += b ? 1 : 0;
  const std::size_t nneg = n - npos;
  if (npos == 0 || nneg == 0) fail(ErrorCode::evaluation, "AUC needs both classes");

  // Midranks handle ties; U = R_pos - npos(npos+1)/2.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double midrank = (double(i + 1) + double(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (labels[idx[t]]) rank_sum += midrank;
    i = j;
  }
  const double u = rank_sum - double(npos) * double(npos + 1) / 2.0;
  return u / (double(npos) * double(nneg));
}

ScoreSummary score_distribution_summary(std::span<const double> combined, const std::vector<bool>* truth) {
  if (combined.empty()) return {};
  ScoreSummary s;
  s.max = *std::max_element(combined.begin(), combined.end());
  const bool has_truth = truth && truth->size() == combined.size() &&
                         std::find(truth->begin(), truth->end(), true) != truth->end();
  std::vector<double> clean;
  if (has_truth) {
    double min_adv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < combined.size(); ++i) {
      if ((*truth)[i]) {
        min_adv = std::min(min_adv, combined[i]);
      } else {
        clean.push_back(combined[i]);
      }
    }
    s.min_adversarial = min_adv;
  } else {
    clean.assign(combined.begin(), combined.end());
  }
  if (clean.empty()) return s;
  s.p99 = percentile_value(clean, 99.0);
  s.p999 = percentile_value(clean, 99.9);
  if (has_truth) {
    s.max_clean = *std::max_element(clean.begin(), clean.end());
    if (s.p99 > 0.0) s.separation_factor = *s.min_adversarial / s.p99;
  }
  return s;
}

std::size_t hubs_for_fraction(std::size_t n_clean, double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) fail(ErrorCode::parameter, "sweep fractions must lie in (0, 0.5]");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * double(n_clean) / (1.0 - fraction))));
}

std::vector<SweepRow> fraction_sweep(const Corpus& base, std::span<const double> fractions, const SweepConfig& config) {
  for (double f : fractions) hubs_for_fraction(base.size(), f);  // validate up front
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    BenchConfig bench = config.bench;
    bench.n_hubs = hubs_for_fraction(base.size(), f);
    bench.fraction.reset();
    const Corpus poisoned = build_benchmark(base, bench);
    ScanConfig scan = config.scan;
    scan.detectors = {DetectorId::hubness};
    const ScanResult result = run_scan(poisoned, nullptr, scan);
    SweepRow row;
    row.fraction = f;
    row.n_hubs = bench.n_hubs;
    row.n_docs = poisoned.size();
    row.auc = auc_roc(result.output(DetectorId::hubness).raw_scores, poisoned.planted_hub_truth());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hubscan
