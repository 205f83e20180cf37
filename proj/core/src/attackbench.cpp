#include "hubscan/attackbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "hubscan/error.hpp"
#include "hubscan/rng.hpp"

namespace hubscan {
namespace {

using Vec = std::vector<double>;

double vdot(const Vec& a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * double(b[i]);
  return s;
}

void vnormalize(Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& x : v) x /= s;
}

void check_unit_rows(const Matrix& m, const char* what) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (std::abs(l2_norm(m.row(i)) - 1.0) > kNormTolerance)
      fail(ErrorCode::parameter, std::string(what) + " row " + std::to_string(i) + " is not unit norm");
}

bool uses_negatives(const HubRecipe& r) {
  return r.variant == HubVariant::domain_targeted && r.lambda_neg != 0.0 && r.negative_queries &&
         r.negative_queries->rows() > 0;
}

double objective_of(const HubRecipe& r, const Vec& h) {
  double obj = 0.0;
  for (std::size_t i = 0; i < r.target_queries.rows(); ++i) obj += vdot(h, r.target_queries.row(i));
  if (uses_negatives(r)) {
    const Matrix& neg = *r.negative_queries;
    double rep = 0.0;
    for (std::size_t i = 0; i < neg.rows(); ++i) {
      const double s = vdot(h, neg.row(i));
      rep += r.negative_margins.empty() ? s : std::max(0.0, s - r.negative_margins[i]);
    }
    obj -= r.lambda_neg * rep;
  }
  return obj;
}

// Gradient of the objective scaled by 1/|T|, before projection.
Vec gradient_of(const HubRecipe& r, const Vec& h) {
  const std::size_t d = h.size();
  const double inv = 1.0 / double(r.target_queries.rows());
  Vec g(d, 0.0);
  for (std::size_t i = 0; i < r.target_queries.rows(); ++i) {
    auto q = r.target_queries.row(i);
    for (std::size_t j = 0; j < d; ++j) g[j] += q[j];
  }
  for (double& x : g) x *= inv;
  if (uses_negatives(r)) {
    const Matrix& neg = *r.negative_queries;
    Vec rep(d, 0.0);
    for (std::size_t i = 0; i < neg.rows(); ++i) {
      auto q = neg.row(i);
      if (!r.negative_margins.empty() && vdot(h, q) <= r.negative_margins[i]) continue;
      for (std::size_t j = 0; j < d; ++j) rep[j] += q[j];
    }
    for (std::size_t j = 0; j < d; ++j) g[j] -= r.lambda_neg * inv * rep[j];
  }
  return g;
}

void project_tangent(Vec& g, const Vec& h) {
  double s = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) s += g[j] * h[j];
  for (std::size_t j = 0; j < h.size(); ++j) g[j] -= s * h[j];
}

}  // namespace

std::string_view to_string(HubVariant v) noexcept {
  switch (v) {
    case HubVariant::universal: return "universal";
    case HubVariant::domain_targeted: return "domain_targeted";
    case HubVariant::centroid: return "centroid";
  }
  return "universal";
}

HubVariant parse_hub_variant(std::string_view name) {
  if (name == "universal") return HubVariant::universal;
  if (name == "domain" || name == "domain_targeted") return HubVariant::domain_targeted;
  if (name == "centroid") return HubVariant::centroid;
  fail(ErrorCode::parameter, "unknown hub variant '" + std::string(name) + "'");
}

double hub_objective(const HubRecipe& recipe, std::span<const float> h) {
  Vec v(h.begin(), h.end());
  return objective_of(recipe, v);
}

OptimizedHub optimize_hub(const HubRecipe& r) {
  const std::size_t nt = r.target_queries.rows(), d = r.target_queries.cols();
  if (nt == 0) fail(ErrorCode::parameter, "optimize_hub needs at least one target query");
  check_unit_rows(r.target_queries, "target query");
  if (uses_negatives(r)) {
    if (r.negative_queries->cols() != d) fail(ErrorCode::shape, "negative queries have the wrong dimension");
    check_unit_rows(*r.negative_queries, "negative query");
    if (!r.negative_margins.empty() && r.negative_margins.size() != r.negative_queries->rows())
      fail(ErrorCode::parameter, "negative_margins must align with negative queries");
  }
  if (!(r.momentum >= 0.0 && r.momentum < 1.0)) fail(ErrorCode::parameter, "momentum must lie in [0, 1)");
  if (!(r.learning_rate > 0.0)) fail(ErrorCode::parameter, "learning_rate must be positive");

  Vec h(d, 0.0);
  if (r.initial) {
    if (r.initial->size() != d) fail(ErrorCode::shape, "initial hub has the wrong dimension");
    h.assign(r.initial->begin(), r.initial->end());
  } else {
    for (std::size_t i = 0; i < nt; ++i) {
      auto q = r.target_queries.row(i);
      for (std::size_t j = 0; j < d; ++j) h[j] += q[j];
    }
  }
  vnormalize(h);
  Rng rng = make_rng(r.seed, "optimize_hub");
  auto jitter = [&] {
    for (double& x : h) x += 1e-3 * standard_normal(rng);
    vnormalize(h);
  };
  if (std::all_of(h.begin(), h.end(), [](double x) { return x == 0.0; })) {
    for (double& x : h) x = standard_normal(rng);
    vnormalize(h);
  }
  {
    // Starting at a stationary point that is not a maximum (e.g. antipodal): nudge off it.
    Vec g = gradient_of(r, h);
    double along = 0.0;
    for (std::size_t j = 0; j < d; ++j) along += g[j] * h[j];
    project_tangent(g, h);
    double gn = 0.0;
    for (double x : g) gn += x * x;
    if (std::sqrt(gn) < 1e-12 && along < 0.0) jitter();
  }

  OptimizedHub out;
  out.objective_trace.reserve(r.steps);
  Vec v(d, 0.0);
  for (std::size_t t = 0; t < r.steps; ++t) {
    Vec g = gradient_of(r, h);
    project_tangent(g, h);
    const double eta = r.schedule == LrSchedule::cosine
                           ? r.learning_rate * (1.0 + std::cos(std::numbers::pi * double(t) / double(r.steps))) / 2.0
                           : r.learning_rate;
    for (std::size_t j = 0; j < d; ++j) {
      v[j] = r.momentum * v[j] + g[j];
      h[j] += eta * v[j];
    }
    vnormalize(h);
    out.objective_trace.push_back(objective_of(r, h));
  }

  const std::size_t tail = r.steps / 10;
  for (std::size_t t = r.steps - tail; t + 1 < r.steps && t > 0; ++t) {
    const double prev = out.objective_trace[t - 1], cur = out.objective_trace[t];
    if (cur < prev - 1e-9 * (1.0 + std::abs(prev))) out.tail_non_decreasing = false;
  }
  out.embedding.assign(h.begin(), h.end());
  normalize(out.embedding);
  return out;
}

std::vector<float> centroid_hub(const Matrix& docs, std::span<const double> weights) {
  if (docs.rows() < 2) fail(ErrorCode::parameter, "centroid hub needs at least two docs");
  if (!weights.empty() && weights.size() != docs.rows())
    fail(ErrorCode::parameter, "weights must align with the doc rows");
  Vec m(docs.cols(), 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < docs.rows(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0)) fail(ErrorCode::parameter, "centroid weights must be non-negative");
    wsum += w;
    auto row = docs.row(i);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += w * double(row[j]);
  }
  if (!(wsum > 0.0)) fail(ErrorCode::parameter, "centroid weights sum to zero");
  double norm = 0.0;
  for (double& x : m) {
    x /= wsum;
    norm += x * x;
  }
  if (std::sqrt(norm) < 1e-9) fail(ErrorCode::degenerate_hub, "weighted mean has zero norm");
  vnormalize(m);
  std::vector<float> out(m.begin(), m.end());
  normalize(out);
  return out;
}

Corpus plant_hubs(const Corpus& corpus, const std::vector<PlantedHub>& hubs, bool allow_override) {
  if (!corpus.is_benchmark && !allow_override)
    fail(ErrorCode::safety, "refusing to plant hubs into a bundle not marked as a benchmark");
  Corpus out = corpus;
  out.is_benchmark = true;
  for (auto& m : out.metadata)
    if (!m.is_planted_hub) m.is_planted_hub = false;
  std::set<std::string> ids;
  for (const auto& m : out.metadata) ids.insert(m.doc_id);
  std::size_t counter = 0;
  for (const auto& hub : hubs) {
    if (hub.embedding.size() != corpus.dim()) fail(ErrorCode::shape, "hub embedding has the wrong dimension");
    std::vector<float> row = hub.embedding;
    if (corpus.metric == Metric::cosine && std::abs(l2_norm(row) - 1.0) > 1e-6) normalize(row);
    DocumentMeta m;
    do {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%06zu", hub.adversarial ? "hub" : "popular", counter++);
      m.doc_id = buf;
    } while (ids.count(m.doc_id));
    ids.insert(m.doc_id);
    m.domain = hub.domain;
    m.modality = hub.modality;
    m.is_planted_hub = hub.adversarial;
    m.recipe = nlohmann::json::parse(hub.recipe_json).dump();
    out.embeddings.append_row(row);
    out.metadata.push_back(std::move(m));
  }
  return out;
}

Corpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.dim < 2) fail(ErrorCode::parameter, "dim must be at least 2");
  if (spec.n_clusters < 1 || spec.n_clusters > spec.n_docs)
    fail(ErrorCode::parameter, "n_clusters must lie in [1, n_docs]");
  if (!(spec.shared_direction >= 0.0 && spec.shared_direction <= 1.0))
    fail(ErrorCode::parameter, "shared_direction must lie in [0, 1]");
  if (!(spec.intra_cluster_concentration >= 0.0)) fail(ErrorCode::parameter, "concentration must be non-negative");
  const std::size_t d = spec.dim, c = spec.n_clusters;
  Rng rng = make_rng(spec.seed, "synthetic");
  auto random_unit = [&] {
    Vec v(d);
    for (double& x : v) x = standard_normal(rng);
    vnormalize(v);
    return v;
  };
  const Vec g = random_unit();
  std::vector<Vec> mu(c);
  const double a = std::sqrt(spec.shared_direction), b = std::sqrt(1.0 - spec.shared_direction);
  for (auto& m : mu) {
    const Vec r = random_unit();
    m.resize(d);
    for (std::size_t j = 0; j < d; ++j) m[j] = a * g[j] + b * r[j];
    vnormalize(m);
  }
  std::vector<std::size_t> label(spec.n_docs);
  for (std::size_t i = 0; i < spec.n_docs; ++i) label[i] = i % c;
  for (std::size_t i = spec.n_docs; i > 1; --i) std::swap(label[i - 1], label[uniform_index(rng, i)]);

  Corpus corpus;
  corpus.metric = Metric::cosine;
  corpus.is_benchmark = true;
  corpus.embeddings = Matrix(spec.n_docs, d);
  const double noise = 1.0 / std::sqrt(double(d));
  Vec x(d);
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      x[j] = spec.intra_cluster_concentration * mu[label[i]][j] + noise * standard_normal(rng);
    vnormalize(x);
    auto row = corpus.embeddings.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] = static_cast<float>(x[j]);
    normalize(row);
    char buf[32];
    std::snprintf(buf, sizeof buf, "doc-%06zu", i);
    DocumentMeta m;
    m.doc_id = buf;
    m.domain = std::to_string(label[i]);
    m.text_hash = derive_seed(spec.seed, "synthetic/text", i);
    corpus.metadata.push_back(std::move(m));
  }
  return corpus;
}

std::string recipe_summary_json(const HubRecipe& r, std::string_view extra_json) {
  nlohmann::json j = nlohmann::json::parse(extra_json);
  j["variant"] = std::string(to_string(r.variant));
  if (r.variant != HubVariant::centroid) {
    j["n_targets"] = r.target_queries.rows();
    j["momentum"] = r.momentum;
    j["learning_rate"] = r.learning_rate;
    j["steps"] = r.steps;
    j["schedule"] = r.schedule == LrSchedule::cosine ? "cosine_lr" : "constant";
    j["seed"] = r.seed;
  }
  if (r.variant == HubVariant::domain_targeted) {
    j["lambda_neg"] = r.lambda_neg;
    j["n_negatives"] = r.negative_queries ? r.negative_queries->rows() : 0;
    j["repulsion"] = r.negative_margins.empty() ? "linear" : "hinge";
  }
  return j.dump();
}

}  // namespace hubscan
