#pragma once

#include <span>
#include <vector>

namespace hubscan {

inline constexpr double kMadScale = 1.4826;
inline constexpr double kMadFloor = 1e-12;

struct RobustZ {
  std::vector<double> zscores;
  double median = 0.0;
  double mad_scaled = 0.0;  // 1.4826 * MAD
  bool degenerate = false;  // MAD == 0
};

RobustZ robust_zscore(std::span<const double> values);

double median(std::span<const double> values);

// Shannon entropy of counts/sum divided by log(n). All-zero input returns 0.
double normalized_entropy(std::span<const double> counts);

// Concentration of normalized rates; 0 for uniform, (n-1)/n for one-hot.
double gini(std::span<const double> rates);

// Order statistic at ascending rank floor(p*N/100)+1, clamped to [1, N].
double percentile_value(std::span<const double> values, double p);

}  // namespace hubscan
