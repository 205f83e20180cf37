// hubscan: scan a vector index for adversarial hubs, build attack benchmarks, score reports.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hubscan/error.hpp"
#include "hubscan/evalharness.hpp"
#include "hubscan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hubscan;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAlarm = 2;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed for " + p.string());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) {
    try {
      out.push_back(std::stod(t));
    } catch (const std::logic_error&) {
      fail(ErrorCode::parameter, "not a number: '" + t + "'");
    }
  }
  return out;
}

struct ScanArgs {
  std::string corpus, out = "report.json", csv, config, real_queries;
  std::optional<std::size_t> k, queries, spread_clusters, stability_perturbations, stability_candidates,
      n_centroid_clusters, workers;
  std::optional<double> frac_centroid, frac_random, frac_real, z_clip, high_pct, medium_pct, stability_sigma,
      near_dup_threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> detectors, method, domain_scope;
  std::vector<std::string> weights;
};

int cmd_scan(const ScanArgs& a) {
  ScanConfig cfg;
  bool fracs_from_file = false;
  if (!a.config.empty()) {
    const std::string text = read_file(a.config);
    cfg = scan_config_from_json(text);
    const json j = json::parse(text);
    fracs_from_file = j.contains("frac_centroid") || j.contains("frac_random") || j.contains("frac_real");
  }
  if (a.k) cfg.k = *a.k;
  if (a.queries) cfg.sampling.total = *a.queries;
  if (a.n_centroid_clusters) cfg.sampling.n_centroid_clusters = *a.n_centroid_clusters;
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (a.spread_clusters) cfg.spread_clusters = *a.spread_clusters;
  if (a.stability_perturbations) cfg.stability.n_perturbations = *a.stability_perturbations;
  if (a.stability_sigma) cfg.stability.sigma = *a.stability_sigma;
  if (a.stability_candidates) cfg.stability_candidates = *a.stability_candidates;
  if (a.near_dup_threshold) cfg.dedup.near_dup_threshold = *a.near_dup_threshold;
  if (a.z_clip) cfg.fusion.z_clip = *a.z_clip;
  if (a.high_pct) cfg.fusion.high_percentile = *a.high_pct;
  if (a.medium_pct) cfg.fusion.medium_percentile = *a.medium_pct;
  if (a.method) cfg.method = parse_retrieval_method(*a.method);
  if (a.domain_scope) cfg.domain_scope = *a.domain_scope;
  if (a.detectors) {
    cfg.detectors.clear();
    for (const auto& name : split(*a.detectors, ',')) {
      auto id = parse_detector(name);
      if (!id) fail(ErrorCode::configuration, "unknown detector '" + name + "'");
      cfg.detectors.insert(*id);
    }
  }
  for (const auto& w : a.weights) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) fail(ErrorCode::configuration, "--weight expects name=value, got '" + w + "'");
    cfg.fusion.weights[w.substr(0, eq)] = parse_doubles(w.substr(eq + 1)).at(0);
  }

  const Corpus corpus = load_corpus(a.corpus);
  std::optional<QuerySet> real;
  if (!a.real_queries.empty()) {
    real = load_queries(a.real_queries, corpus);
    if (!fracs_from_file && !a.frac_centroid && !a.frac_random && !a.frac_real) {
      cfg.sampling.frac_centroid = 0.4;
      cfg.sampling.frac_random = 0.4;
      cfg.sampling.frac_real = 0.2;
    }
  }
  if (a.frac_centroid) cfg.sampling.frac_centroid = *a.frac_centroid;
  if (a.frac_random) cfg.sampling.frac_random = *a.frac_random;
  if (a.frac_real) cfg.sampling.frac_real = *a.frac_real;

  const ScanResult result = run_scan(corpus, real ? &*real : nullptr, cfg);
  write_file(a.out, report_json(result, corpus));
  if (!a.csv.empty()) write_file(a.csv, report_csv(result, corpus));

  const auto high = result.verdicts.counts.count(Verdict::HIGH) ? result.verdicts.counts.at(Verdict::HIGH) : 0;
  std::fprintf(stderr, "scanned %zu docs with %zu queries: %zu HIGH\n", corpus.size(), result.n_queries, high);
  return high > 0 ? kExitAlarm : kExitOk;
}

struct BenchArgs {
  std::string corpus, synthetic, out;
  std::string variant = "universal";
  std::optional<std::size_t> hubs, benign, targets, steps, centroid_docs, workers;
  std::optional<double> fraction, lambda_neg, momentum, lr;
  std::optional<std::string> target_domain;
  std::uint64_t seed = 7;
  bool no_hinge = false, allow_override = false;
};

int cmd_bench(const BenchArgs& a) {
  if (a.corpus.empty() == a.synthetic.empty())
    fail(ErrorCode::parameter, "give exactly one of --corpus or --synthetic");
  const Corpus base = a.corpus.empty() ? generate_synthetic_corpus(parse_synthetic_spec(a.synthetic, a.seed))
                                       : load_corpus(a.corpus);
  BenchConfig cfg;
  cfg.variant = parse_hub_variant(a.variant);
  cfg.seed = a.seed;
  cfg.fraction = a.fraction;
  cfg.target_domain = a.target_domain;
  cfg.hinge_repulsion = !a.no_hinge;
  cfg.allow_override = a.allow_override;
  if (a.hubs) cfg.n_hubs = *a.hubs;
  if (a.benign) cfg.n_benign = *a.benign;
  if (a.targets) cfg.n_targets = *a.targets;
  if (a.steps) cfg.steps = *a.steps;
  if (a.centroid_docs) cfg.centroid_docs = *a.centroid_docs;
  if (a.workers) cfg.workers = *a.workers;
  if (a.lambda_neg) cfg.lambda_neg = *a.lambda_neg;
  if (a.momentum) cfg.momentum = *a.momentum;
  if (a.lr) cfg.learning_rate = *a.lr;

  const Corpus bench = build_benchmark(base, cfg);
  const auto report = validate_corpus(bench);
  if (!report.ok()) fail(ErrorCode::integrity, "benchmark bundle failed validation");
  save_corpus(bench, a.out);
  std::fprintf(stderr, "wrote %zu docs (%zu planted hubs) to %s\n", bench.size(), bench.planted_hub_count(),
               a.out.c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string report, bundle, out, csv, sweep, synthetic, score = "combined";
  std::string budgets = "0.001,0.002,0.005,0.01";
  std::string k_list;
  std::optional<std::size_t> workers;
  std::uint64_t seed = 7;
};

std::vector<double> report_scores(const json& rep, const Corpus& bundle, const std::string& score) {
  const auto& docs = rep.at("per_doc");
  if (docs.size() != bundle.size()) fail(ErrorCode::evaluation, "report and bundle have different doc counts");
  if (rep.at("corpus_fingerprint").get<std::string>() != corpus_fingerprint(bundle))
    fail(ErrorCode::evaluation, "report was produced from a different bundle");
  std::vector<double> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    if (d.at("doc_id").get<std::string>() != bundle.metadata[i].doc_id)
      fail(ErrorCode::evaluation, "doc order differs between report and bundle");
    if (score == "combined") {
      out[i] = d.at("combined").get<double>();
    } else {
      const auto& dets = d.at("detectors");
      if (!dets.contains(score)) fail(ErrorCode::evaluation, "report has no scores for detector '" + score + "'");
      out[i] = dets.at(score).at("raw").get<double>();
    }
  }
  return out;
}

ojson budget_json(const BudgetEval& e) {
  ojson j;
  j["budget_fraction"] = e.budget_fraction;
  j["K"] = e.K;
  j["n_true"] = e.n_true;
  j["true_in_top_k"] = e.true_in_top_k;
  j["precision"] = e.precision;
  j["recall"] = e.recall;
  return j;
}

int cmd_eval(const EvalArgs& a) {
  ojson metrics;
  std::ostringstream csv;
  if (!a.sweep.empty()) {
    if (a.bundle.empty() == a.synthetic.empty())
      fail(ErrorCode::parameter, "--sweep needs exactly one of --bundle (clean base) or --synthetic");
    const Corpus base = a.bundle.empty() ? generate_synthetic_corpus(parse_synthetic_spec(a.synthetic, a.seed))
                                         : load_corpus(a.bundle);
    SweepConfig sc;
    sc.bench.seed = a.seed;
    if (a.workers) sc.bench.workers = sc.scan.workers = *a.workers;
    const auto rows = fraction_sweep(base, parse_doubles(a.sweep), sc);
    ojson arr = ojson::array();
    csv << "fraction,n_hubs,n_docs,auc\n";
    for (const auto& r : rows) {
      arr.push_back({{"fraction", r.fraction}, {"n_hubs", r.n_hubs}, {"n_docs", r.n_docs}, {"auc", r.auc}});
      csv << r.fraction << ',' << r.n_hubs << ',' << r.n_docs << ',' << r.auc << '\n';
    }
    metrics["sweep"] = arr;
  } else {
    if (a.report.empty() || a.bundle.empty()) fail(ErrorCode::parameter, "eval needs --report and --bundle");
    const Corpus bundle = load_corpus(a.bundle);
    json rep;
    try {
      rep = json::parse(read_file(a.report));
    } catch (const json::exception& e) {
      fail(ErrorCode::evaluation, std::string("report is not valid JSON: ") + e.what());
    }
    const auto scores = report_scores(rep, bundle, a.score);
    const auto truth = bundle.planted_hub_truth();
    const bool has_truth = bundle.planted_hub_count() > 0;
    metrics["score"] = a.score;
    metrics["n_docs"] = bundle.size();
    metrics["n_planted"] = bundle.planted_hub_count();
    csv << "budget_fraction,K,n_true,true_in_top_k,precision,recall\n";
    ojson evals = ojson::array();
    auto add = [&](const BudgetEval& e) {
      evals.push_back(budget_json(e));
      csv << e.budget_fraction << ',' << e.K << ',' << e.n_true << ',' << e.true_in_top_k << ',' << e.precision
          << ',' << e.recall << '\n';
    };
    if (has_truth) {
      for (double b : parse_doubles(a.budgets)) add(alert_budget_eval(scores, truth, Budget::of_fraction(b)));
      for (double k : parse_doubles(a.k_list))
        add(alert_budget_eval(scores, truth, Budget::of_k(static_cast<std::size_t>(k))));
      metrics["budgets"] = evals;
      metrics["auc"] = auc_roc(scores, truth);
    }
    const auto s = score_distribution_summary(scores, has_truth ? &truth : nullptr);
    ojson dist;
    dist["p99"] = s.p99;
    dist["p99_9"] = s.p999;
    dist["max"] = s.max;
    if (s.max_clean) dist["max_clean"] = *s.max_clean;
    if (s.min_adversarial) dist["min_adversarial"] = *s.min_adversarial;
    if (s.separation_factor) dist["separation_factor"] = *s.separation_factor;
    metrics["distribution"] = dist;
  }
  const std::string text = metrics.dump(1) + "\n";
  if (a.out.empty()) std::cout << text;
  else write_file(a.out, text);
  if (!a.csv.empty()) write_file(a.csv, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hubscan - adversarial hub scanner for vector indices"};
  app.require_subcommand(1);

  ScanArgs sa;
  auto* scan = app.add_subcommand("scan", "scan a corpus bundle and write a verdict report");
  scan->add_option("--corpus", sa.corpus, "corpus bundle directory")->required();
  scan->add_option("--config", sa.config, "JSON config; flags override its values");
  scan->add_option("--real-queries", sa.real_queries, "real query log (.bin with sibling .jsonl, or a directory)");
  scan->add_option("--out", sa.out, "report JSON path");
  scan->add_option("--csv", sa.csv, "per-doc CSV summary path");
  scan->add_option("--k", sa.k, "neighbors per query");
  scan->add_option("--queries", sa.queries, "number of scan queries");
  scan->add_option("--frac-centroid", sa.frac_centroid);
  scan->add_option("--frac-random", sa.frac_random);
  scan->add_option("--frac-real", sa.frac_real);
  scan->add_option("--centroid-clusters", sa.n_centroid_clusters, "k-means clusters for centroid queries");
  scan->add_option("--seed", sa.seed, "master seed");
  scan->add_option("--workers", sa.workers, "worker threads (results do not depend on it)");
  scan->add_option("--detectors", sa.detectors, "comma-separated detector list");
  scan->add_option("--method", sa.method, "retrieval method: vector, hybrid or lexical");
  scan->add_option("--domain-scope", sa.domain_scope, "restrict queries to one domain");
  scan->add_option("--weight", sa.weights, "fusion weight override, name=value (repeatable)");
  scan->add_option("--z-clip", sa.z_clip);
  scan->add_option("--high-percentile", sa.high_pct);
  scan->add_option("--medium-percentile", sa.medium_pct);
  scan->add_option("--spread-clusters", sa.spread_clusters);
  scan->add_option("--stability-perturbations", sa.stability_perturbations);
  scan->add_option("--stability-sigma", sa.stability_sigma);
  scan->add_option("--stability-candidates", sa.stability_candidates);
  scan->add_option("--near-dup-threshold", sa.near_dup_threshold);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "plant optimized hubs into a corpus and write a benchmark bundle");
  bench->add_option("--corpus", ba.corpus, "base corpus bundle");
  bench->add_option("--synthetic", ba.synthetic, "synthetic base, e.g. n=5000,dim=128,clusters=20");
  bench->add_option("--out", ba.out, "output bundle directory")->required();
  bench->add_option("--variant", ba.variant, "universal, domain or centroid");
  bench->add_option("--hubs", ba.hubs, "number of adversarial hubs");
  bench->add_option("--fraction", ba.fraction, "adversarial fraction of the final corpus (overrides --hubs)");
  bench->add_option("--benign", ba.benign, "benign high-popularity docs to add");
  bench->add_option("--target-domain", ba.target_domain);
  bench->add_option("--lambda-neg", ba.lambda_neg);
  bench->add_flag("--no-hinge", ba.no_hinge, "plain (unmargined) repulsion for domain hubs");
  bench->add_option("--targets", ba.targets, "target queries per hub");
  bench->add_option("--steps", ba.steps);
  bench->add_option("--momentum", ba.momentum);
  bench->add_option("--lr", ba.lr);
  bench->add_option("--centroid-docs", ba.centroid_docs);
  bench->add_option("--seed", ba.seed);
  bench->add_option("--workers", ba.workers);
  bench->add_flag("--allow-override", ba.allow_override, "allow planting into a non-benchmark bundle");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score a report against benchmark ground truth");
  eval->add_option("--report", ea.report);
  eval->add_option("--bundle", ea.bundle);
  eval->add_option("--score", ea.score, "'combined' or a detector name (raw score)");
  eval->add_option("--budgets", ea.budgets, "comma-separated alert budget fractions");
  eval->add_option("--k-list", ea.k_list, "comma-separated explicit K values");
  eval->add_option("--sweep", ea.sweep, "comma-separated adversarial fractions for an AUC sweep");
  eval->add_option("--synthetic", ea.synthetic, "synthetic clean base for --sweep");
  eval->add_option("--seed", ea.seed);
  eval->add_option("--workers", ea.workers);
  eval->add_option("--out", ea.out, "metrics JSON path (stdout when omitted)");
  eval->add_option("--csv", ea.csv, "metrics CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (scan->parsed()) return cmd_scan(sa);
    if (bench->parsed()) return cmd_bench(ba);
    if (eval->parsed()) return cmd_eval(ea);
  } catch (const Error& e) {
    json err = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    json err = {{"error", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return kExitError;
  }
  return kExitError;
}
