#pragma once
// Independent reference implementations used by the tests. Deliberately naive:
// full sorts, pairwise enumeration, double accumulation, no shared code with core.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hubscan/matrix.hpp"

namespace oracle {

inline double dot(const hubscan::Matrix& a, std::size_t i, const hubscan::Matrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.cols(); ++d) s += double(a(i, d)) * double(b(j, d));
  return s;
}

struct Neighbors {
  std::vector<std::size_t> idx;
  std::vector<double> sim;
};

// Exhaustive scoring + stable argsort (descending similarity, ascending index).
inline Neighbors knn(const hubscan::Matrix& docs, const hubscan::Matrix& queries, std::size_t q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < docs.rows(); ++i) all.emplace_back(dot(queries, q, docs, i), i);
  std::stable_sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.first > y.first; });
  Neighbors out;
  for (std::size_t r = 0; r < std::min(k, all.size()); ++r) {
    out.idx.push_back(all[r].second);
    out.sim.push_back(all[r].first);
  }
  return out;
}

struct ReverseKnn {
  std::vector<std::uint64_t> counts;
  std::vector<double> weighted;
};

// rank_log: weight 1/log2(r+1); sim_weight: clamp(sim, 1e-6, 1).
inline ReverseKnn reverse_knn(const hubscan::Matrix& docs, const hubscan::Matrix& queries, std::size_t k,
                              bool rank_log, bool sim_weight) {
  ReverseKnn out{std::vector<std::uint64_t>(docs.rows(), 0), std::vector<double>(docs.rows(), 0.0)};
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto nn = knn(docs, queries, q, k);
    for (std::size_t r = 0; r < nn.idx.size(); ++r) {
      double w = rank_log ? 1.0 / std::log2(double(r + 2)) : 1.0;
      if (sim_weight) w *= std::min(1.0, std::max(1e-6, nn.sim[r]));
      out.counts[nn.idx[r]] += 1;
      out.weighted[nn.idx[r]] += w;
    }
  }
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<double> robust_z(const std::vector<double>& x) {
  const double m = median(x);
  std::vector<double> dev;
  for (double v : x) dev.push_back(std::fabs(v - m));
  const double s = std::max(1.4826 * median(dev), 1e-12);
  std::vector<double> z;
  for (double v : x) z.push_back((v - m) / s);
  return z;
}

// Base-2 entropy over log2(n).
inline double entropy(const std::vector<double>& c) {
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (double v : c)
    if (v > 0) h -= (v / total) * std::log2(v / total);
  return h / std::log2(double(c.size()));
}

// Mean-absolute-difference form of the Gini coefficient.
inline double gini(const std::vector<double>& x) {
  const double n = double(x.size());
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  if (total == 0.0) return 0.0;
  double diff = 0.0;
  for (double a : x)
    for (double b : x) diff += std::fabs(a - b);
  return diff / (2.0 * n * total);
}

// AUC by enumerating every positive/negative pair.
inline double auc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

struct Lloyd {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
};

// Full-batch Lloyd iterations from the given initial centroids (Euclidean).
inline Lloyd lloyd(const hubscan::Matrix& pts, std::vector<std::vector<double>> c, int iters = 300) {
  const std::size_t n = pts.rows(), d = pts.cols(), k = c.size();
  Lloyd out;
  out.labels.assign(n, 0);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = INFINITY;
      for (std::size_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < d; ++t) s += (pts(i, t) - c[j][t]) * (pts(i, t) - c[j][t]);
        if (s < best) {
          best = s;
          out.labels[i] = j;
        }
      }
    }
    std::vector<std::vector<double>> sum(k, std::vector<double>(d, 0.0));
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++cnt[out.labels[i]];
      for (std::size_t t = 0; t < d; ++t) sum[out.labels[i]][t] += pts(i, t);
    }
    for (std::size_t j = 0; j < k; ++j)
      if (cnt[j])
        for (std::size_t t = 0; t < d; ++t) c[j][t] = sum[j][t] / double(cnt[j]);
  }
  out.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < d; ++t) out.inertia += (pts(i, t) - c[out.labels[i]][t]) * (pts(i, t) - c[out.labels[i]][t]);
  out.centroids = std::move(c);
  return out;
}

// Random unit rows; `grid` > 0 snaps coordinates to multiples of 1/grid before
// normalizing, which manufactures exact similarity ties.
inline hubscan::Matrix random_unit_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, int grid = 0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> u(-2, 2);
  hubscan::Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    std::vector<double> row(d);
    do {
      norm = 0.0;
      for (auto& v : row) {
        v = grid > 0 ? double(u(rng)) / grid : g(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::size_t t = 0; t < d; ++t) m(i, t) = float(row[t] / norm);
  }
  return m;
}

}  // namespace oracle
