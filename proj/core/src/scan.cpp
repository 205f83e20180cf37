#include "hubscan/scan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hubscan/error.hpp"

namespace hubscan {

double HitWeighting::weight(std::size_t position, double similarity) const noexcept {
  const double wr = rank == RankWeight::uniform ? 1.0 : 1.0 / std::log2(double(position) + 1.0);
  const double wd = dist == DistWeight::uniform ? 1.0 : std::clamp(similarity, 1e-6, 1.0);
  return wr * wd;
}

BucketedAccumulator BucketedAccumulator::empty(std::size_t n_docs, bool by_domain, bool by_modality,
                                               std::size_t n_query_clusters) {
  BucketedAccumulator a;
  a.n_docs = n_docs;
  a.total_weighted_hits.assign(n_docs, 0.0);
  a.raw_hit_counts.assign(n_docs, 0);
  a.has_domains = by_domain;
  a.has_modalities = by_modality;
  if (by_modality) a.per_modality_cross_hits.assign(n_docs, 0.0);
  a.n_query_clusters = n_query_clusters;
  a.per_cluster_hits.assign(n_docs * n_query_clusters, 0);
  return a;
}

BucketedAccumulator execute_scan(const FlatIndex& index, const Corpus& corpus, const QuerySet& queries,
                                 std::size_t k, const HitWeighting& weighting, const Bucketing& bucketing,
                                 const ScanOptions& options) {
  if (k < 1) fail(ErrorCode::parameter, "k must be at least 1");
  const std::size_t n = index.size();
  if (corpus.size() != n) fail(ErrorCode::shape, "corpus and index disagree in size");
  if (queries.size() > 0 && queries.embeddings.cols() != index.dim())
    fail(ErrorCode::shape, "query dimension does not match index");

  if (bucketing.by_domain && !queries.has_domains())
    fail(ErrorCode::configuration, "domain bucketing requested but queries carry no domain labels");
  if (bucketing.by_modality) {
    bool docs_labeled = false;
    for (const auto& m : corpus.metadata) docs_labeled = docs_labeled || m.modality.has_value();
    if (!docs_labeled || !queries.has_modalities())
      fail(ErrorCode::configuration, "modality bucketing requested but modality metadata is missing");
  }
  const std::size_t n_clusters = bucketing.by_query_cluster ? bucketing.by_query_cluster->n_clusters : 0;

  auto acc = BucketedAccumulator::empty(n, bucketing.by_domain, bucketing.by_modality, n_clusters);
  std::vector<std::size_t> qcluster;
  if (bucketing.by_query_cluster && queries.size() > 0)
    qcluster = assign_all(*bucketing.by_query_cluster, queries.embeddings);

  std::vector<double>* domain_slot = nullptr;
  if (bucketing.by_domain) {
    std::set<std::string> labels;
    for (const auto& d : queries.domains)
      if (d) labels.insert(*d);
    for (const auto& l : labels) {
      acc.per_domain_hits[l].assign(n, 0.0);
      acc.n_queries_per_domain[l] = 0;
    }
  }
  if (bucketing.by_modality) {
    for (const auto& m : queries.modalities)
      if (m && !acc.per_query_modality_hits.count(*m)) acc.per_query_modality_hits[*m].assign(n, 0.0);
  }

  auto shards = run_sharded<std::vector<NeighborList>>(
      queries.size(), options.shard_size, options.workers,
      [&](std::size_t b, std::size_t e, std::size_t) { return index.knn_batch(queries.embeddings, k, b, e); });

  // Accumulate on this thread in query order: the sums are identical for any worker count.
  std::size_t q = 0;
  for (const auto& shard : shards) {
    for (const auto& nl : shard) {
      const auto& qdom = queries.domains.size() > q ? queries.domains[q] : std::nullopt;
      const auto& qmod = queries.modalities.size() > q ? queries.modalities[q] : std::nullopt;
      domain_slot = nullptr;
      if (bucketing.by_domain && qdom) {
        domain_slot = &acc.per_domain_hits[*qdom];
        ++acc.n_queries_per_domain[*qdom];
      }
      std::vector<double>* mod_slot =
          bucketing.by_modality && qmod ? &acc.per_query_modality_hits[*qmod] : nullptr;
      for (std::size_t r = 0; r < nl.size(); ++r) {
        const std::size_t doc = nl.doc_indices[r];
        const double w = weighting.weight(r + 1, nl.similarities[r]);
        acc.total_weighted_hits[doc] += w;
        ++acc.raw_hit_counts[doc];
        if (domain_slot) (*domain_slot)[doc] += w;
        if (mod_slot) {
          (*mod_slot)[doc] += 1.0;
          const auto& dmod = corpus.metadata[doc].modality;
          if (dmod && *dmod != *qmod) acc.per_modality_cross_hits[doc] += 1.0;
        }
        if (n_clusters) ++acc.per_cluster_hits[doc * n_clusters + qcluster[q]];
      }
      ++acc.n_queries_processed;
      ++q;
    }
  }
  return acc;
}

BucketedAccumulator merge_accumulators(const BucketedAccumulator& a, const BucketedAccumulator& b) {
  if (a.n_docs != b.n_docs || a.has_domains != b.has_domains || a.has_modalities != b.has_modalities ||
      a.n_query_clusters != b.n_query_clusters)
    fail(ErrorCode::merge, "accumulators have different bucketing schemas");
  BucketedAccumulator out = a;
  for (std::size_t i = 0; i < a.n_docs; ++i) {
    out.total_weighted_hits[i] += b.total_weighted_hits[i];
    out.raw_hit_counts[i] += b.raw_hit_counts[i];
  }
  for (const auto& [label, hits] : b.per_domain_hits) {
    auto& dst = out.per_domain_hits[label];
    if (dst.empty()) dst.assign(a.n_docs, 0.0);
    for (std::size_t i = 0; i < a.n_docs; ++i) dst[i] += hits[i];
  }
  for (const auto& [label, count] : b.n_queries_per_domain) out.n_queries_per_domain[label] += count;
  for (std::size_t i = 0; i < out.per_modality_cross_hits.size(); ++i)
    out.per_modality_cross_hits[i] += b.per_modality_cross_hits[i];
  for (const auto& [label, hits] : b.per_query_modality_hits) {
    auto& dst = out.per_query_modality_hits[label];
    if (dst.empty()) dst.assign(a.n_docs, 0.0);
    for (std::size_t i = 0; i < a.n_docs; ++i) dst[i] += hits[i];
  }
  for (std::size_t i = 0; i < out.per_cluster_hits.size(); ++i) out.per_cluster_hits[i] += b.per_cluster_hits[i];
  out.n_queries_processed += b.n_queries_processed;
  return out;
}

std::vector<double> compute_hub_rates(const BucketedAccumulator& acc, const std::optional<std::string>& domain) {
  std::vector<double> rates(acc.n_docs, 0.0);
  if (!domain) {
    if (acc.n_queries_processed == 0) return rates;
    for (std::size_t i = 0; i < acc.n_docs; ++i)
      rates[i] = acc.total_weighted_hits[i] / double(acc.n_queries_processed);
    return rates;
  }
  auto it = acc.per_domain_hits.find(*domain);
  if (!acc.has_domains || it == acc.per_domain_hits.end())
    fail(ErrorCode::scope, "unknown domain '" + *domain + "'");
  const auto nq = acc.n_queries_per_domain.at(*domain);
  if (nq == 0) return rates;
  for (std::size_t i = 0; i < acc.n_docs; ++i) rates[i] = it->second[i] / double(nq);
  return rates;
}

}  // namespace hubscan
