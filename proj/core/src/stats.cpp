#include "hubscan/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hubscan/error.hpp"

namespace hubscan {

double median(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::parameter, "median of empty input");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return lo + (hi - lo) / 2.0;
}

RobustZ robust_zscore(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::parameter, "robust_zscore of empty input");
  RobustZ r;
  r.median = median(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - r.median);
  const double mad = median(dev);
  r.mad_scaled = kMadScale * mad;
  r.degenerate = mad == 0.0;
  const double denom = std::max(r.mad_scaled, kMadFloor);
  r.zscores.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) r.zscores[i] = (values[i] - r.median) / denom;
  return r;
}

double normalized_entropy(std::span<const double> counts) {
  if (counts.size() < 2) fail(ErrorCode::parameter, "normalized_entropy needs at least 2 bins");
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) fail(ErrorCode::parameter, "negative count");
    total += c;
  }
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return std::clamp(h / std::log(double(counts.size())), 0.0, 1.0);
}

double gini(std::span<const double> rates) {
  if (rates.size() < 2) fail(ErrorCode::parameter, "gini needs at least 2 rates");
  double total = 0.0;
  for (double r : rates) {
    if (r < 0.0) fail(ErrorCode::parameter, "negative rate");
    total += r;
  }
  if (total == 0.0) return 0.0;
  std::vector<double> p(rates.begin(), rates.end());
  std::sort(p.begin(), p.end());
  const double n = double(p.size());
  double cum = 0.0, acc = 0.0;
  for (double x : p) {
    cum += x / total;
    acc += cum;
  }
  return std::max(0.0, (n + 1.0 - 2.0 * acc) / n);
}

double percentile_value(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorCode::parameter, "percentile of empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::size_t rank = static_cast<std::size_t>(std::floor(p * double(n) / 100.0 + 1e-9)) + 1;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return v[rank - 1];
}

}  // namespace hubscan
