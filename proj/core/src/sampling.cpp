#include "hubscan/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hubscan/error.hpp"
#include "hubscan/rng.hpp"

namespace hubscan {

std::size_t default_centroid_clusters(std::size_t n_docs) noexcept {
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(double(n_docs))));
  return std::max<std::size_t>(1, std::min<std::size_t>(256, root * 4));
}

std::array<std::size_t, 3> split_counts(std::size_t total, double frac_centroid, double frac_random,
                                        double frac_real) {
  const std::array<double, 3> f = {frac_centroid, frac_random, frac_real};
  for (double x : f)
    if (!(x >= 0.0)) fail(ErrorCode::parameter, "sampling fractions must be non-negative");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) fail(ErrorCode::parameter, "sampling fractions must sum to 1");
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = f[i] * double(total);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - double(out[i]);
    assigned += out[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; assigned < total; i = (i + 1) % 3, ++assigned) ++out[order[i]];
  return out;
}

std::optional<std::string> majority_label(const std::vector<std::optional<std::string>>& labels,
                                          std::span<const std::size_t> members) {
  std::map<std::string, std::size_t> counts;
  for (std::size_t m : members)
    if (m < labels.size() && labels[m]) ++counts[*labels[m]];
  std::optional<std::string> best;
  std::size_t best_n = 0;
  for (const auto& [label, n] : counts)
    if (n > best_n) {
      best = label;
      best_n = n;
    }
  return best;
}

QuerySet sample_queries(const Corpus& corpus, const QuerySet* real, const SamplingConfig& cfg) {
  if (cfg.total < 1) fail(ErrorCode::parameter, "total must be at least 1");
  if (cfg.frac_real > 0.0 && real == nullptr)
    fail(ErrorCode::parameter, "frac_real > 0 requires real queries");
  const std::size_t n = corpus.size();
  if (n == 0) fail(ErrorCode::parameter, "cannot sample queries from an empty corpus");
  if (real && real->embeddings.cols() != corpus.dim() && real->size() > 0)
    fail(ErrorCode::shape, "real queries do not match the corpus dimension");

  auto [n_centroid, n_random, n_real] = split_counts(cfg.total, cfg.frac_centroid, cfg.frac_random, cfg.frac_real);
  const std::size_t real_avail = real ? real->size() : 0;
  if (n_real > real_avail) {
    n_random += n_real - real_avail;
    n_real = real_avail;
  }

  std::vector<std::optional<std::string>> doc_domain(n), doc_modality(n);
  for (std::size_t i = 0; i < n; ++i) {
    doc_domain[i] = corpus.metadata[i].domain;
    doc_modality[i] = corpus.metadata[i].modality;
  }

  QuerySet qs;
  qs.embeddings = Matrix(0, corpus.dim());

  if (n_centroid > 0) {
    const std::size_t k = std::min(n, cfg.n_centroid_clusters.value_or(default_centroid_clusters(n)));
    if (k < 1) fail(ErrorCode::parameter, "n_centroid_clusters must be at least 1");
    KMeansParams kp;
    kp.batch_size = cfg.kmeans_batch_size;
    kp.max_iters = cfg.kmeans_max_iters;
    kp.seed = derive_seed(cfg.seed, "sampling/kmeans");
    kp.spherical = corpus.metric == Metric::cosine;
    const ClusterModel model = fit_minibatch_kmeans(corpus.embeddings, k, kp);
    const auto labels = assign_all(model, corpus.embeddings);
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
    std::vector<std::optional<std::string>> cdom(k), cmod(k);
    for (std::size_t c = 0; c < k; ++c) {
      cdom[c] = majority_label(doc_domain, members[c]);
      cmod[c] = majority_label(doc_modality, members[c]);
    }

    Rng rng = make_rng(cfg.seed, "sampling/centroid");
    std::vector<std::size_t> picks;
    if (n_centroid > k) {
      for (std::size_t i = 0; i < n_centroid; ++i) picks.push_back(uniform_index(rng, k));
    } else {
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < n_centroid; ++i) {
        std::swap(perm[i], perm[i + uniform_index(rng, k - i)]);
        picks.push_back(perm[i]);
      }
    }
    std::vector<float> row(corpus.dim());
    for (std::size_t c : picks) {
      auto src = model.centroids.row(c);
      std::copy(src.begin(), src.end(), row.begin());
      if (corpus.metric == Metric::cosine) normalize(row);
      qs.append(row, QueryProvenance::centroid, cdom[c], cmod[c]);
    }
  }

  if (n_random > 0) {
    Rng rng = make_rng(cfg.seed, "sampling/random");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < n_random; ++i) {
      std::size_t doc;
      if (i < n) {
        std::swap(perm[i], perm[i + uniform_index(rng, n - i)]);
        doc = perm[i];
      } else {
        doc = uniform_index(rng, n);
      }
      qs.append(corpus.embeddings.row(doc), QueryProvenance::random_doc, doc_domain[doc], doc_modality[doc]);
    }
  }

  if (n_real > 0) {
    Rng rng = make_rng(cfg.seed, "sampling/real");
    std::vector<std::size_t> perm(real_avail);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> chosen;
    if (n_real < real_avail) {
      for (std::size_t i = 0; i < n_real; ++i) {
        std::swap(perm[i], perm[i + uniform_index(rng, real_avail - i)]);
        chosen.push_back(perm[i]);
      }
      std::sort(chosen.begin(), chosen.end());
    } else {
      chosen = perm;
    }
    std::vector<float> row(corpus.dim());
    for (std::size_t q : chosen) {
      auto src = real->embeddings.row(q);
      std::copy(src.begin(), src.end(), row.begin());
      if (corpus.metric == Metric::cosine) normalize(row);
      qs.append(row, QueryProvenance::real, q < real->domains.size() ? real->domains[q] : std::nullopt,
                q < real->modalities.size() ? real->modalities[q] : std::nullopt);
    }
  }
  return qs;
}

}  // namespace hubscan
