#include "hubscan/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hubscan/error.hpp"
#include "hubscan/rng.hpp"
#include "hubscan/stats.hpp"

namespace hubscan {
namespace {

constexpr std::size_t kNoiseBlock = 256;

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // The smaller index becomes the root, so roots are component minima.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::string_view to_string(DetectorId id) noexcept {
  switch (id) {
    case DetectorId::hubness: return "hubness";
    case DetectorId::cluster_spread: return "cluster_spread";
    case DetectorId::stability: return "stability";
    case DetectorId::dedup: return "dedup";
    case DetectorId::domain_hub: return "domain_hub";
    case DetectorId::cross_modal: return "cross_modal";
  }
  return "hubness";
}

std::optional<DetectorId> parse_detector(std::string_view name) noexcept {
  for (auto id : kAllDetectors)
    if (to_string(id) == name) return id;
  if (name == "domain") return DetectorId::domain_hub;
  if (name == "crossmodal") return DetectorId::cross_modal;
  return std::nullopt;
}

std::string_view to_string(RetrievalMethod m) noexcept {
  switch (m) {
    case RetrievalMethod::vector: return "vector";
    case RetrievalMethod::hybrid: return "hybrid";
    case RetrievalMethod::lexical: return "lexical";
  }
  return "vector";
}

RetrievalMethod parse_retrieval_method(std::string_view name) {
  if (name == "vector") return RetrievalMethod::vector;
  if (name == "hybrid") return RetrievalMethod::hybrid;
  if (name == "lexical") return RetrievalMethod::lexical;
  fail(ErrorCode::parameter, "unknown retrieval method '" + std::string(name) + "'");
}

DetectorOutput skipped_output(DetectorId id, std::size_t n_docs, std::string reason) {
  DetectorOutput out;
  out.id = id;
  out.raw_scores.assign(n_docs, 0.0);
  out.skipped = true;
  out.skip_reason = std::move(reason);
  return out;
}

DetectorOutput hubness_detect(std::span<const double> rates, std::span<const std::size_t> population) {
  DetectorOutput out;
  out.id = DetectorId::hubness;
  RobustZ rz;
  if (population.size() >= 2) {
    std::vector<double> sub;
    sub.reserve(population.size());
    for (std::size_t i : population) sub.push_back(rates[i]);
    rz = robust_zscore(sub);
    const double denom = std::max(rz.mad_scaled, kMadFloor);
    out.raw_scores.resize(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) out.raw_scores[i] = (rates[i] - rz.median) / denom;
  } else {
    rz = robust_zscore(rates);
    out.raw_scores = rz.zscores;
  }
  out.scalars["median"] = rz.median;
  out.scalars["mad_scaled"] = rz.mad_scaled;
  out.scalars["degenerate"] = rz.degenerate ? 1.0 : 0.0;
  out.numeric_aux["hub_rate"].assign(rates.begin(), rates.end());
  return out;
}

ClusterModel fit_query_clusters(const QuerySet& queries, std::size_t n_clusters, std::uint64_t seed,
                                bool spherical) {
  if (queries.size() == 0) fail(ErrorCode::parameter, "cannot cluster an empty query set");
  KMeansParams kp;
  kp.seed = derive_seed(seed, "cluster_spread/kmeans");
  kp.spherical = spherical;
  return fit_minibatch_kmeans(queries.embeddings, std::min(n_clusters, queries.size()), kp);
}

DetectorOutput cluster_spread_from_accumulator(const BucketedAccumulator& acc) {
  const std::size_t c = acc.n_query_clusters;
  if (c == 0) fail(ErrorCode::configuration, "accumulator has no query-cluster buckets");
  DetectorOutput out;
  out.id = DetectorId::cluster_spread;
  out.raw_scores.assign(acc.n_docs, 0.0);
  auto& totals = out.numeric_aux["total_cluster_hits"];
  totals.assign(acc.n_docs, 0.0);
  if (c < 2) return out;  // one cluster: every doc is single-cluster, spread 0
  std::vector<double> hist(c);
  for (std::size_t d = 0; d < acc.n_docs; ++d) {
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += hist[j] = acc.cluster_hits(d, j);
    totals[d] = total;
    if (total > 0.0) out.raw_scores[d] = normalized_entropy(hist);
  }
  return out;
}

DetectorOutput cluster_spread_detect(const FlatIndex& index, const Corpus& corpus, const QuerySet& queries,
                                     std::size_t n_clusters, std::size_t k, std::uint64_t seed,
                                     RetrievalMethod method, const ScanOptions& options) {
  if (method == RetrievalMethod::lexical)
    return skipped_output(DetectorId::cluster_spread, index.size(), "requires semantic query embeddings");
  const ClusterModel model = fit_query_clusters(queries, n_clusters, seed, index.metric() == Metric::cosine);
  Bucketing b;
  b.by_query_cluster = &model;
  const auto acc = execute_scan(index, corpus, queries, k, HitWeighting{}, b, options);
  return cluster_spread_from_accumulator(acc);
}

std::vector<std::uint64_t> candidate_hits(const FlatIndex& index, const Matrix& queries,
                                          std::span<const std::size_t> candidates, std::size_t k,
                                          const ScanOptions& options) {
  std::vector<std::ptrdiff_t> slot(index.size(), -1);
  for (std::size_t i = 0; i < candidates.size(); ++i) slot[candidates[i]] = static_cast<std::ptrdiff_t>(i);
  auto shards = run_sharded<std::vector<std::uint64_t>>(
      queries.rows(), options.shard_size, options.workers, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<std::uint64_t> hits(candidates.size(), 0);
        for (const auto& nl : index.knn_batch(queries, k, b, e))
          for (std::size_t d : nl.doc_indices)
            if (slot[d] >= 0) ++hits[static_cast<std::size_t>(slot[d])];
        return hits;
      });
  std::vector<std::uint64_t> hits(candidates.size(), 0);
  for (const auto& s : shards)
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += s[i];
  return hits;
}

Matrix perturb_queries(const Matrix& queries, double sigma, std::uint64_t seed, std::size_t round,
                       bool renormalize) {
  Matrix out = queries;
  const std::size_t d = queries.cols();
  const double scale = d ? sigma / std::sqrt(double(d)) : 0.0;
  const std::uint64_t round_seed = derive_seed(seed, "stability/round", round);
  for (std::size_t b0 = 0; b0 < queries.rows(); b0 += kNoiseBlock) {
    Rng rng = make_rng(round_seed, "stability/noise", b0 / kNoiseBlock);
    const std::size_t b1 = std::min(queries.rows(), b0 + kNoiseBlock);
    for (std::size_t i = b0; i < b1; ++i) {
      auto row = out.row(i);
      for (auto& x : row) x = static_cast<float>(double(x) + scale * standard_normal(rng));
      if (renormalize) normalize(row);
    }
  }
  return out;
}

DetectorOutput stability_detect(const FlatIndex& index, const QuerySet& queries,
                                std::span<const std::size_t> candidates, const StabilityParams& params,
                                RetrievalMethod method, const ScanOptions& options,
                                std::span<const std::uint64_t> original_hits) {
  const std::size_t n = index.size();
  if (method == RetrievalMethod::lexical)
    return skipped_output(DetectorId::stability, n, "requires semantic query embeddings");
  if (candidates.empty()) fail(ErrorCode::parameter, "stability needs at least one candidate");
  if (params.n_perturbations < 1) fail(ErrorCode::parameter, "n_perturbations must be at least 1");
  if (!(params.sigma >= 0.0)) fail(ErrorCode::parameter, "sigma must be non-negative");
  for (std::size_t c : candidates)
    if (c >= n) fail(ErrorCode::parameter, "candidate index out of range");

  std::vector<std::uint64_t> orig;
  if (original_hits.empty()) {
    orig = candidate_hits(index, queries.embeddings, candidates, params.k, options);
  } else {
    if (original_hits.size() != candidates.size())
      fail(ErrorCode::parameter, "original_hits must align with candidates");
    orig.assign(original_hits.begin(), original_hits.end());
  }

  const bool renorm = index.metric() == Metric::cosine;
  std::vector<double> ratio_sum(candidates.size(), 0.0), pert_sum(candidates.size(), 0.0);
  for (std::size_t r = 0; r < params.n_perturbations; ++r) {
    const Matrix qp = perturb_queries(queries.embeddings, params.sigma, params.seed, r, renorm);
    const auto hits = candidate_hits(index, qp, candidates, params.k, options);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      pert_sum[i] += double(hits[i]);
      if (orig[i] > 0) ratio_sum[i] += double(hits[i]) / double(orig[i]);
    }
  }

  DetectorOutput out;
  out.id = DetectorId::stability;
  out.raw_scores.assign(n, 0.0);
  auto& is_cand = out.numeric_aux["is_candidate"];
  auto& o_hits = out.numeric_aux["original_hits"];
  auto& p_hits = out.numeric_aux["mean_perturbed_hits"];
  auto& ratio = out.numeric_aux["hit_ratio"];
  auto& change = out.numeric_aux["relative_hit_change"];
  for (auto* v : {&is_cand, &o_hits, &p_hits, &ratio, &change}) v->assign(n, 0.0);
  const double rounds = double(params.n_perturbations);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t d = candidates[i];
    is_cand[d] = 1.0;
    o_hits[d] = double(orig[i]);
    p_hits[d] = pert_sum[i] / rounds;
    if (orig[i] == 0) continue;
    const double mean_ratio = ratio_sum[i] / rounds;
    ratio[d] = mean_ratio;
    change[d] = std::abs(p_hits[d] - o_hits[d]) / o_hits[d];
    out.raw_scores[d] = std::min(std::clamp(mean_ratio, 0.0, 1.5), 1.0);
  }
  out.scalars["sigma"] = params.sigma;
  out.scalars["n_perturbations"] = rounds;
  out.scalars["n_candidates"] = double(candidates.size());
  return out;
}

std::vector<std::size_t> top_candidates(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  idx.resize(n);
  return idx;
}

DetectorOutput dedup_detect(const Corpus& corpus, const FlatIndex& index, const DedupParams& params,
                            const ScanOptions& options) {
  if (!(params.near_dup_threshold > 0.0 && params.near_dup_threshold <= 1.0))
    fail(ErrorCode::parameter, "near_dup_threshold must lie in (0, 1]");
  const std::size_t n = corpus.size();
  if (index.size() != n) fail(ErrorCode::shape, "corpus and index disagree in size");
  DisjointSet ds(n);

  std::map<std::uint64_t, std::size_t> first_with_hash;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = corpus.metadata[i].text_hash;
    if (!h) continue;
    auto [it, inserted] = first_with_hash.emplace(*h, i);
    if (!inserted) ds.unite(it->second, i);
  }

  const std::size_t k = std::min(n, params.neighbors + 1);
  auto shards = run_sharded<std::vector<std::pair<std::size_t, std::size_t>>>(
      n, options.shard_size, options.workers, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        const auto lists = index.knn_batch(corpus.embeddings, k, b, e);
        for (std::size_t q = 0; q < lists.size(); ++q)
          for (std::size_t r = 0; r < lists[q].size(); ++r) {
            if (lists[q].similarities[r] < params.near_dup_threshold) break;
            if (lists[q].doc_indices[r] != b + q) edges.emplace_back(b + q, lists[q].doc_indices[r]);
          }
        return edges;
      });
  for (const auto& s : shards)
    for (auto [a, b] : s) ds.unite(a, b);

  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[ds.find(i)];
  DetectorOutput out;
  out.id = DetectorId::dedup;
  out.raw_scores.assign(n, 0.0);
  auto& cid = out.numeric_aux["cluster_id"];
  auto& csize = out.numeric_aux["cluster_size"];
  cid.resize(n);
  csize.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = ds.find(i);
    const double s = double(size[root]);
    cid[i] = double(root);
    csize[i] = s;
    if (size[root] >= 2) {
      double score = std::log2(s);
      if (size[root] >= params.boilerplate_min_cluster) score *= 1.0 / std::log2(s);
      out.raw_scores[i] = score;
    }
  }
  return out;
}

DetectorOutput domain_detect(const BucketedAccumulator& acc, std::span<const std::optional<std::string>> doc_domains,
                             const DomainParams& params) {
  const std::size_t n = acc.n_docs;
  if (!acc.has_domains || acc.per_domain_hits.size() < 2)
    return skipped_output(DetectorId::domain_hub, n, "fewer than 2 domains");

  std::vector<std::string> labels;
  for (const auto& [l, _] : acc.per_domain_hits) labels.push_back(l);
  const std::size_t m = labels.size();
  std::vector<std::vector<double>> rates(m), z(m);
  for (std::size_t j = 0; j < m; ++j) {
    rates[j] = compute_hub_rates(acc, labels[j]);
    std::vector<std::size_t> population;
    for (std::size_t i = 0; i < doc_domains.size() && i < n; ++i)
      if (doc_domains[i] && *doc_domains[i] == labels[j]) population.push_back(i);
    z[j] = hubness_detect(rates[j], population).raw_scores;
  }

  DetectorOutput out;
  out.id = DetectorId::domain_hub;
  out.raw_scores.assign(n, 0.0);
  auto& gini_aux = out.numeric_aux["gini"];
  auto& flag = out.numeric_aux["contrast_flag"];
  gini_aux.assign(n, 0.0);
  flag.assign(n, 0.0);
  auto& dominant = out.label_aux["dominant_domain"];
  dominant.assign(n, labels.front());
  std::vector<double> row(m);
  for (std::size_t i = 0; i < n; ++i) {
    double best_z = z[0][i], best_rate = rates[0][i];
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = rates[j][i];
      best_z = std::max(best_z, z[j][i]);
      if (rates[j][i] > best_rate) {
        best_rate = rates[j][i];
        best_j = j;
      }
    }
    out.raw_scores[i] = best_z;
    gini_aux[i] = gini(row);
    dominant[i] = labels[best_j];
    flag[i] = (best_z >= params.contrast_z && gini_aux[i] >= params.contrast_gini) ? 1.0 : 0.0;
  }
  out.scalars["n_domains"] = double(m);
  return out;
}

DetectorOutput crossmodal_detect(const BucketedAccumulator& acc) {
  const std::size_t n = acc.n_docs;
  if (!acc.has_modalities) return skipped_output(DetectorId::cross_modal, n, "no modality metadata");
  std::vector<double> rates(n, 0.0);
  if (acc.n_queries_processed > 0)
    for (std::size_t i = 0; i < n; ++i) rates[i] = acc.per_modality_cross_hits[i] / double(acc.n_queries_processed);
  const RobustZ rz = robust_zscore(rates);
  DetectorOutput out;
  out.id = DetectorId::cross_modal;
  out.raw_scores = rz.zscores;
  out.scalars["median"] = rz.median;
  out.scalars["mad_scaled"] = rz.mad_scaled;
  out.scalars["degenerate"] = rz.degenerate ? 1.0 : 0.0;
  auto& ratio = out.numeric_aux["cross_modal_ratio"];
  ratio.assign(n, 0.0);
  auto& dominant = out.label_aux["dominant_query_modality"];
  dominant.assign(n, "");
  for (std::size_t i = 0; i < n; ++i) {
    ratio[i] = acc.per_modality_cross_hits[i] / std::max(1.0, double(acc.raw_hit_counts[i]));
    double best = 0.0;
    for (const auto& [label, hits] : acc.per_query_modality_hits)
      if (hits[i] > best) {
        best = hits[i];
        dominant[i] = label;
      }
  }
  return out;
}

std::set<DetectorId> gate_detectors(RetrievalMethod method, const std::set<DetectorId>& requested) {
  std::set<DetectorId> out = requested;
  if (method == RetrievalMethod::lexical) {
    out.erase(DetectorId::cluster_spread);
    out.erase(DetectorId::stability);
  }
  return out;
}

}  // namespace hubscan
