#include "hubscan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hubscan/error.hpp"
#include "hubscan/index.hpp"
#include "hubscan/rng.hpp"
#include "hubscan/stats.hpp"

namespace hubscan {
namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view rank_name(RankWeight r) { return r == RankWeight::uniform ? "uniform" : "inverse_log_rank"; }
std::string_view dist_name(DistWeight d) { return d == DistWeight::uniform ? "uniform" : "similarity"; }

RankWeight parse_rank(const std::string& s) {
  if (s == "uniform") return RankWeight::uniform;
  if (s == "inverse_log_rank") return RankWeight::inverse_log_rank;
  fail(ErrorCode::configuration, "unknown rank weighting '" + s + "'");
}

DistWeight parse_dist(const std::string& s) {
  if (s == "uniform") return DistWeight::uniform;
  if (s == "similarity") return DistWeight::similarity;
  fail(ErrorCode::configuration, "unknown distance weighting '" + s + "'");
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::size_t> sample_rows(std::span<const std::size_t> pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> perm(pool.begin(), pool.end()), out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i < perm.size()) {
      std::swap(perm[i], perm[i + uniform_index(rng, perm.size() - i)]);
      out.push_back(perm[i]);
    } else {
      out.push_back(pool[uniform_index(rng, pool.size())]);
    }
  }
  return out;
}

}  // namespace

const DetectorOutput& ScanResult::output(DetectorId id) const {
  for (const auto& o : outputs)
    if (o.id == id) return o;
  fail(ErrorCode::configuration, "detector '" + std::string(to_string(id)) + "' was not run");
}

bool ScanResult::has_output(DetectorId id) const noexcept {
  return std::any_of(outputs.begin(), outputs.end(), [&](const DetectorOutput& o) { return o.id == id; });
}

std::string label_domains(const Corpus& corpus, QuerySet& queries, std::uint64_t seed,
                          std::vector<std::optional<std::string>>& doc_domains) {
  doc_domains.assign(corpus.size(), std::nullopt);
  bool any = false;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    doc_domains[i] = corpus.metadata[i].domain;
    any = any || doc_domains[i].has_value();
  }
  if (any) return "metadata";
  if (corpus.size() < 4) return "none";

  const auto n_domains = std::min<std::size_t>(32, static_cast<std::size_t>(std::floor(std::sqrt(double(corpus.size())))));
  KMeansParams kp;
  kp.seed = derive_seed(seed, "domains/kmeans");
  kp.spherical = corpus.metric == Metric::cosine;
  const ClusterModel model = fit_minibatch_kmeans(corpus.embeddings, n_domains, kp);
  auto name = [](std::size_t c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "c%02zu", c);
    return std::string(buf);
  };
  const auto doc_labels = assign_all(model, corpus.embeddings);
  for (std::size_t i = 0; i < corpus.size(); ++i) doc_domains[i] = name(doc_labels[i]);
  if (queries.size() > 0) {
    const auto q_labels = assign_all(model, queries.embeddings);
    for (std::size_t i = 0; i < queries.size(); ++i) queries.domains[i] = name(q_labels[i]);
  }
  return "clustering";
}

ScanResult run_scan(const Corpus& corpus, const QuerySet* real_queries, const ScanConfig& input) {
  ScanResult result;
  ScanConfig& cfg = result.config = input;
  if (cfg.k < 1) fail(ErrorCode::parameter, "k must be at least 1");
  cfg.fusion.validate();
  const std::size_t n = corpus.size();
  if (n == 0) fail(ErrorCode::parameter, "corpus is empty");
  if (!cfg.sampling.n_centroid_clusters) cfg.sampling.n_centroid_clusters = default_centroid_clusters(n);
  cfg.stability.k = cfg.k;

  const ScanOptions opts{std::max<std::size_t>(1, cfg.workers), 256};
  const auto active = gate_detectors(cfg.method, cfg.detectors);
  auto wants = [&](DetectorId id) { return active.count(id) > 0; };

  SamplingConfig sc = cfg.sampling;
  sc.seed = derive_seed(cfg.seed, "sampling");
  QuerySet queries = sample_queries(corpus, real_queries, sc);
  result.n_queries_total = queries.size();

  const bool need_domains = wants(DetectorId::domain_hub) || cfg.domain_scope.has_value();
  if (need_domains) {
    result.domain_source = label_domains(corpus, queries, cfg.seed, result.doc_domains);
  } else {
    result.domain_source = "none";
    result.doc_domains.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) result.doc_domains[i] = corpus.metadata[i].domain;
  }

  std::vector<std::size_t> population;
  if (cfg.domain_scope) {
    QuerySet scoped;
    scoped.embeddings = Matrix(0, corpus.dim());
    for (std::size_t i = 0; i < queries.size(); ++i)
      if (queries.domains[i] && *queries.domains[i] == *cfg.domain_scope)
        scoped.append(queries.embeddings.row(i), queries.provenance[i], queries.domains[i], queries.modalities[i]);
    if (scoped.size() == 0) fail(ErrorCode::scope, "no queries fall in domain '" + *cfg.domain_scope + "'");
    queries = std::move(scoped);
    for (std::size_t i = 0; i < n; ++i)
      if (result.doc_domains[i] && *result.doc_domains[i] == *cfg.domain_scope) population.push_back(i);
  }
  result.n_queries = queries.size();

  const FlatIndex index(corpus);

  std::optional<ClusterModel> qclusters;
  if (wants(DetectorId::cluster_spread))
    qclusters = fit_query_clusters(queries, cfg.spread_clusters, derive_seed(cfg.seed, "cluster_spread"),
                                   corpus.metric == Metric::cosine);

  bool modality_ready = false;
  if (wants(DetectorId::cross_modal)) {
    const bool docs = std::any_of(corpus.metadata.begin(), corpus.metadata.end(),
                                  [](const DocumentMeta& m) { return m.modality.has_value(); });
    modality_ready = docs && queries.has_modalities();
  }
  Bucketing bucketing;
  bucketing.by_domain = wants(DetectorId::domain_hub) && queries.has_domains();
  bucketing.by_modality = modality_ready;
  bucketing.by_query_cluster = qclusters ? &*qclusters : nullptr;
  const BucketedAccumulator acc = execute_scan(index, corpus, queries, cfg.k, cfg.weighting, bucketing, opts);

  const auto rates = compute_hub_rates(acc);
  const DetectorOutput hub = hubness_detect(rates, population);

  for (auto id : kAllDetectors) {
    if (!cfg.detectors.count(id)) continue;
    if (!wants(id)) {
      result.outputs.push_back(
          skipped_output(id, n, "requires semantic query embeddings (" + std::string(to_string(cfg.method)) + " retrieval)"));
      continue;
    }
    switch (id) {
      case DetectorId::hubness:
        result.outputs.push_back(hub);
        break;
      case DetectorId::cluster_spread:
        result.outputs.push_back(cluster_spread_from_accumulator(acc));
        break;
      case DetectorId::stability: {
        const auto cands = top_candidates(hub.raw_scores, cfg.stability_candidates);
        std::vector<std::uint64_t> orig;
        for (std::size_t c : cands) orig.push_back(acc.raw_hit_counts[c]);
        StabilityParams sp = cfg.stability;
        sp.seed = derive_seed(cfg.seed, "stability");
        result.outputs.push_back(stability_detect(index, queries, cands, sp, cfg.method, opts, orig));
        break;
      }
      case DetectorId::dedup:
        result.outputs.push_back(dedup_detect(corpus, index, cfg.dedup, opts));
        break;
      case DetectorId::domain_hub:
        result.outputs.push_back(bucketing.by_domain ? domain_detect(acc, result.doc_domains, cfg.domain)
                                                     : skipped_output(id, n, "no domain labels"));
        break;
      case DetectorId::cross_modal:
        result.outputs.push_back(modality_ready ? crossmodal_detect(acc)
                                                : skipped_output(id, n, "no modality metadata"));
        break;
    }
  }

  const auto combined = fuse_scores(result.outputs, cfg.fusion);
  result.verdicts = assign_verdicts(combined, cfg.fusion);
  return result;
}

std::string scan_config_to_json(const ScanConfig& c) {
  ojson j;
  j["k"] = c.k;
  j["queries"] = c.sampling.total;
  j["frac_centroid"] = c.sampling.frac_centroid;
  j["frac_random"] = c.sampling.frac_random;
  j["frac_real"] = c.sampling.frac_real;
  if (c.sampling.n_centroid_clusters) j["n_centroid_clusters"] = *c.sampling.n_centroid_clusters;
  j["kmeans_batch_size"] = c.sampling.kmeans_batch_size;
  j["kmeans_max_iters"] = c.sampling.kmeans_max_iters;
  j["seed"] = c.seed;
  ojson dets = ojson::array();
  for (auto id : kAllDetectors)
    if (c.detectors.count(id)) dets.push_back(std::string(to_string(id)));
  j["detectors"] = dets;
  j["retrieval_method"] = std::string(to_string(c.method));
  ojson w = ojson::object();
  for (const auto& [name, v] : c.fusion.weights) w[name] = v;
  j["weights"] = w;
  j["z_clip"] = c.fusion.z_clip;
  j["high_percentile"] = c.fusion.high_percentile;
  j["medium_percentile"] = c.fusion.medium_percentile;
  j["rank_weight"] = std::string(rank_name(c.weighting.rank));
  j["dist_weight"] = std::string(dist_name(c.weighting.dist));
  j["spread_clusters"] = c.spread_clusters;
  j["stability_perturbations"] = c.stability.n_perturbations;
  j["stability_sigma"] = c.stability.sigma;
  j["stability_candidates"] = c.stability_candidates;
  j["near_dup_threshold"] = c.dedup.near_dup_threshold;
  j["boilerplate_min_cluster"] = c.dedup.boilerplate_min_cluster;
  j["dedup_neighbors"] = c.dedup.neighbors;
  j["contrast_z"] = c.domain.contrast_z;
  j["contrast_gini"] = c.domain.contrast_gini;
  j["domain_scope"] = c.domain_scope ? ojson(*c.domain_scope) : ojson(nullptr);
  return j.dump();
}

ScanConfig scan_config_from_json(const std::string& text, ScanConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::configuration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::configuration, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "k") c.k = v.get<std::size_t>();
      else if (key == "queries") c.sampling.total = v.get<std::size_t>();
      else if (key == "frac_centroid") c.sampling.frac_centroid = v.get<double>();
      else if (key == "frac_random") c.sampling.frac_random = v.get<double>();
      else if (key == "frac_real") c.sampling.frac_real = v.get<double>();
      else if (key == "n_centroid_clusters") {
        if (v.is_null()) c.sampling.n_centroid_clusters.reset();
        else c.sampling.n_centroid_clusters = v.get<std::size_t>();
      } else if (key == "kmeans_batch_size") c.sampling.kmeans_batch_size = v.get<std::size_t>();
      else if (key == "kmeans_max_iters") c.sampling.kmeans_max_iters = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "detectors") {
        c.detectors.clear();
        for (const auto& name : v) {
          auto id = parse_detector(name.get<std::string>());
          if (!id) fail(ErrorCode::configuration, "unknown detector '" + name.get<std::string>() + "'");
          c.detectors.insert(*id);
        }
      } else if (key == "retrieval_method") c.method = parse_retrieval_method(v.get<std::string>());
      else if (key == "weights") {
        c.fusion.weights.clear();
        for (const auto& [name, w] : v.items()) c.fusion.weights[name] = w.get<double>();
      } else if (key == "z_clip") c.fusion.z_clip = v.get<double>();
      else if (key == "high_percentile") c.fusion.high_percentile = v.get<double>();
      else if (key == "medium_percentile") c.fusion.medium_percentile = v.get<double>();
      else if (key == "rank_weight") c.weighting.rank = parse_rank(v.get<std::string>());
      else if (key == "dist_weight") c.weighting.dist = parse_dist(v.get<std::string>());
      else if (key == "spread_clusters") c.spread_clusters = v.get<std::size_t>();
      else if (key == "stability_perturbations") c.stability.n_perturbations = v.get<std::size_t>();
      else if (key == "stability_sigma") c.stability.sigma = v.get<double>();
      else if (key == "stability_candidates") c.stability_candidates = v.get<std::size_t>();
      else if (key == "near_dup_threshold") c.dedup.near_dup_threshold = v.get<double>();
      else if (key == "boilerplate_min_cluster") c.dedup.boilerplate_min_cluster = v.get<std::size_t>();
      else if (key == "dedup_neighbors") c.dedup.neighbors = v.get<std::size_t>();
      else if (key == "contrast_z") c.domain.contrast_z = v.get<double>();
      else if (key == "contrast_gini") c.domain.contrast_gini = v.get<double>();
      else if (key == "domain_scope") {
        if (v.is_null()) c.domain_scope.reset();
        else c.domain_scope = v.get<std::string>();
      } else if (key == "workers") c.workers = v.get<std::size_t>();
      else fail(ErrorCode::configuration, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::configuration, std::string("bad config value: ") + e.what());
  }
  c.fusion.validate();
  return c;
}

std::string report_json(const ScanResult& r, const Corpus& corpus) {
  const auto& c = r.config;
  const std::size_t n = corpus.size();
  ojson rep;
  rep["schema_version"] = 1;
  rep["config"] = ojson::parse(scan_config_to_json(c));
  rep["corpus_fingerprint"] = corpus_fingerprint(corpus);
  rep["n_docs"] = n;
  rep["n_queries"] = r.n_queries;
  rep["domain_source"] = r.domain_source;

  std::vector<std::vector<double>> norm;
  for (const auto& o : r.outputs) norm.push_back(normalized_scores(o, c.fusion));

  ojson docs = ojson::array();
  for (std::size_t i = 0; i < n; ++i) {
    ojson d;
    d["doc_id"] = corpus.metadata[i].doc_id;
    d["combined"] = r.verdicts.combined[i];
    d["verdict"] = std::string(to_string(r.verdicts.verdicts[i]));
    ojson dets = ojson::object();
    ojson aux = ojson::object();
    for (std::size_t k = 0; k < r.outputs.size(); ++k) {
      const auto& o = r.outputs[k];
      if (o.skipped) continue;
      ojson e;
      e["raw"] = o.raw_scores[i];
      e["normalized"] = norm[k][i];
      const bool stability_noncandidate =
          o.id == DetectorId::stability && o.numeric_aux.at("is_candidate")[i] == 0.0;
      if (!stability_noncandidate) {
        for (const auto& [key, vals] : o.numeric_aux)
          if (key != "is_candidate") e[key] = vals[i];
        for (const auto& [key, vals] : o.label_aux) e[key] = vals[i];
      }
      dets[std::string(to_string(o.id))] = e;
      if (o.id == DetectorId::domain_hub) {
        aux["dominant_domain"] = o.label_aux.at("dominant_domain")[i];
        aux["gini"] = o.numeric_aux.at("gini")[i];
      } else if (o.id == DetectorId::cross_modal) {
        aux["cross_modal_ratio"] = o.numeric_aux.at("cross_modal_ratio")[i];
      } else if (o.id == DetectorId::dedup) {
        aux["dedup_cluster_id"] = o.numeric_aux.at("cluster_id")[i];
      }
    }
    d["detectors"] = dets;
    d["aux"] = aux;
    docs.push_back(std::move(d));
  }
  rep["per_doc"] = std::move(docs);

  ojson summary;
  ojson counts;
  for (auto v : {Verdict::HIGH, Verdict::MEDIUM, Verdict::LOW})
    counts[std::string(to_string(v))] = r.verdicts.counts.count(v) ? r.verdicts.counts.at(v) : 0;
  summary["counts"] = counts;
  summary["thresholds"] = {{"high", r.verdicts.high_threshold}, {"medium", r.verdicts.medium_threshold}};
  const auto& comb = r.verdicts.combined;
  ojson pct;
  pct["p50"] = percentile_value(comb, 50.0);
  pct["p99"] = percentile_value(comb, 99.0);
  pct["p99_9"] = percentile_value(comb, 99.9);
  pct["max"] = *std::max_element(comb.begin(), comb.end());
  summary["percentiles"] = pct;
  ojson dsum = ojson::object();
  for (const auto& o : r.outputs) {
    ojson e;
    e["skipped"] = o.skipped;
    if (o.skipped) e["reason"] = o.skip_reason;
    e["weight"] = c.fusion.weight(o.id);
    for (const auto& [key, v] : o.scalars) e[key] = v;
    dsum[std::string(to_string(o.id))] = e;
  }
  summary["detectors"] = dsum;
  rep["summary"] = summary;
  return rep.dump(1) + "\n";
}

std::string report_csv(const ScanResult& r, const Corpus& corpus) {
  std::ostringstream out;
  out << "doc_id,combined,verdict";
  for (auto id : kAllDetectors) out << ',' << to_string(id) << "_raw," << to_string(id) << "_normalized";
  out << ",dominant_domain,gini,cross_modal_ratio,dedup_cluster_id\n";
  std::vector<const DetectorOutput*> by_id(kAllDetectors.size(), nullptr);
  std::vector<std::vector<double>> norm(kAllDetectors.size());
  for (const auto& o : r.outputs) {
    const auto slot = static_cast<std::size_t>(o.id);
    by_id[slot] = &o;
    norm[slot] = normalized_scores(o, r.config.fusion);
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out << csv_field(corpus.metadata[i].doc_id) << ',' << fmt_double(r.verdicts.combined[i]) << ','
        << to_string(r.verdicts.verdicts[i]);
    for (std::size_t s = 0; s < by_id.size(); ++s) {
      if (by_id[s] && !by_id[s]->skipped)
        out << ',' << fmt_double(by_id[s]->raw_scores[i]) << ',' << fmt_double(norm[s][i]);
      else
        out << ",,";
    }
    const auto* dom = by_id[static_cast<std::size_t>(DetectorId::domain_hub)];
    const auto* cm = by_id[static_cast<std::size_t>(DetectorId::cross_modal)];
    const auto* dd = by_id[static_cast<std::size_t>(DetectorId::dedup)];
    out << ',' << (dom && !dom->skipped ? csv_field(dom->label_aux.at("dominant_domain")[i]) : "");
    out << ',' << (dom && !dom->skipped ? fmt_double(dom->numeric_aux.at("gini")[i]) : "");
    out << ',' << (cm && !cm->skipped ? fmt_double(cm->numeric_aux.at("cross_modal_ratio")[i]) : "");
    out << ',' << (dd && !dd->skipped ? fmt_double(dd->numeric_aux.at("cluster_id")[i]) : "");
    out << '\n';
  }
  return out.str();
}

Corpus build_benchmark(const Corpus& base, const BenchConfig& cfg) {
  const std::size_t n = base.size();
  if (n < 2) fail(ErrorCode::parameter, "base corpus needs at least two docs");
  std::size_t n_hubs = cfg.n_hubs;
  if (cfg.fraction) {
    const double f = *cfg.fraction;
    if (!(f >= 0.0 && f < 1.0)) fail(ErrorCode::parameter, "hub fraction must lie in [0, 1)");
    n_hubs = static_cast<std::size_t>(std::llround(f * double(n) / (1.0 - f)));
  }
  if (cfg.n_targets < 1) fail(ErrorCode::parameter, "n_targets must be at least 1");

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<std::size_t> in_domain, out_domain;
  if (cfg.variant == HubVariant::domain_targeted) {
    if (!cfg.target_domain) fail(ErrorCode::parameter, "domain-targeted hubs need a target domain");
    for (std::size_t i = 0; i < n; ++i)
      (base.metadata[i].domain == cfg.target_domain ? in_domain : out_domain).push_back(i);
    if (in_domain.empty()) fail(ErrorCode::parameter, "target domain '" + *cfg.target_domain + "' has no docs");
    if (out_domain.empty()) fail(ErrorCode::parameter, "no out-of-domain docs to repel");
  }

  std::vector<double> margins;  // k-th clean-neighbor similarity of every doc
  if (cfg.variant == HubVariant::domain_targeted && cfg.hinge_repulsion && cfg.lambda_neg != 0.0) {
    const FlatIndex index(base);
    const auto lists = index.knn_batch(base.embeddings, std::max<std::size_t>(1, cfg.margin_k));
    margins.resize(n);
    for (std::size_t i = 0; i < n; ++i) margins[i] = lists[i].similarities.back();
  }

  auto make_universal = [&](std::uint64_t seed, std::string_view stream, std::size_t i) {
    Rng rng = make_rng(seed, stream, i);
    HubRecipe r;
    r.variant = HubVariant::universal;
    r.target_queries = base.embeddings.select_rows(sample_rows(all, cfg.n_targets, rng));
    r.momentum = cfg.momentum;
    r.learning_rate = cfg.learning_rate;
    r.steps = cfg.steps;
    r.seed = derive_seed(seed, stream, i);
    return r;
  };

  std::vector<PlantedHub> hubs(n_hubs + cfg.n_benign);
  auto build = [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      PlantedHub& out = hubs[i];
      if (i >= n_hubs) {
        const HubRecipe r = make_universal(cfg.seed, "bench/benign", i - n_hubs);
        out.embedding = optimize_hub(r).embedding;
        out.adversarial = false;
        out.recipe_json = recipe_summary_json(r, R"({"role":"benign_popular"})");
        continue;
      }
      switch (cfg.variant) {
        case HubVariant::universal: {
          const HubRecipe r = make_universal(cfg.seed, "bench/universal", i);
          out.embedding = optimize_hub(r).embedding;
          out.recipe_json = recipe_summary_json(r);
          break;
        }
        case HubVariant::domain_targeted: {
          Rng rng = make_rng(cfg.seed, "bench/domain", i);
          HubRecipe r;
          r.variant = HubVariant::domain_targeted;
          r.target_queries = base.embeddings.select_rows(sample_rows(in_domain, cfg.n_targets, rng));
          const auto neg = sample_rows(out_domain, cfg.n_targets, rng);
          r.negative_queries = base.embeddings.select_rows(neg);
          if (!margins.empty())
            for (std::size_t q : neg) r.negative_margins.push_back(margins[q]);
          r.lambda_neg = cfg.lambda_neg;
          r.momentum = cfg.momentum;
          r.learning_rate = cfg.learning_rate;
          r.steps = cfg.steps;
          r.seed = derive_seed(cfg.seed, "bench/domain/opt", i);
          out.embedding = optimize_hub(r).embedding;
          out.domain = cfg.target_domain;
          json extra = {{"target_domain", *cfg.target_domain}};
          out.recipe_json = recipe_summary_json(r, extra.dump());
          break;
        }
        case HubVariant::centroid: {
          Rng rng = make_rng(cfg.seed, "bench/centroid", i);
          const std::size_t m = std::max<std::size_t>(2, cfg.centroid_docs);
          // Prefer sources from distinct domains so the mean sits between topics.
          std::map<std::string, std::vector<std::size_t>> by_domain;
          for (std::size_t d = 0; d < n; ++d)
            if (base.metadata[d].domain) by_domain[*base.metadata[d].domain].push_back(d);
          std::vector<std::size_t> picks;
          if (by_domain.size() >= m) {
            std::vector<std::string> names;
            for (const auto& [k, _] : by_domain) names.push_back(k);
            std::vector<std::size_t> name_idx(names.size());
            for (std::size_t t = 0; t < name_idx.size(); ++t) name_idx[t] = t;
            for (std::size_t t : sample_rows(name_idx, m, rng)) {
              const auto& pool = by_domain[names[t]];
              picks.push_back(pool[uniform_index(rng, pool.size())]);
            }
          } else {
            picks = sample_rows(all, m, rng);
          }
          out.embedding = centroid_hub(base.embeddings.select_rows(picks));
          HubRecipe r;
          r.variant = HubVariant::centroid;
          json extra = {{"source_docs", json::array()}};
          for (std::size_t p : picks) extra["source_docs"].push_back(base.metadata[p].doc_id);
          out.recipe_json = recipe_summary_json(r, extra.dump());
          break;
        }
      }
    }
    return 0;
  };
  run_sharded<int>(hubs.size(), 1, std::max<std::size_t>(1, cfg.workers), build);
  return plant_hubs(base, hubs, cfg.allow_override);
}

SyntheticCorpusSpec parse_synthetic_spec(const std::string& text, std::uint64_t default_seed) {
  SyntheticCorpusSpec s;
  s.seed = default_seed;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::parameter, "synthetic spec item '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "n" || key == "n_docs") s.n_docs = std::stoull(val);
      else if (key == "dim" || key == "d") s.dim = std::stoull(val);
      else if (key == "clusters" || key == "n_clusters") s.n_clusters = std::stoull(val);
      else if (key == "kappa" || key == "concentration") s.intra_cluster_concentration = std::stod(val);
      else if (key == "shared" || key == "shared_direction") s.shared_direction = std::stod(val);
      else if (key == "seed") s.seed = std::stoull(val);
      else fail(ErrorCode::parameter, "unknown synthetic spec key '" + key + "'");
    } catch (const std::logic_error&) {
      fail(ErrorCode::parameter, "bad value in synthetic spec item '" + item + "'");
    }
  }
  return s;
}

}  // namespace hubscan
