#include "hubscan/corpus.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hubscan/error.hpp"

namespace hubscan {
namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "embedding blobs are little-endian f32");

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cosine ? "cosine" : "inner_product";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "inner_product" || name == "ip") return Metric::inner_product;
  fail(ErrorCode::parameter, "unknown metric '" + std::string(name) + "'");
}

std::string_view to_string(QueryProvenance p) noexcept {
  switch (p) {
    case QueryProvenance::centroid: return "centroid";
    case QueryProvenance::random_doc: return "random_doc";
    case QueryProvenance::real: return "real";
  }
  return "real";
}

std::size_t Corpus::planted_hub_count() const noexcept {
  std::size_t n = 0;
  for (const auto& m : metadata) n += m.is_planted_hub.value_or(false) ? 1 : 0;
  return n;
}

std::vector<bool> Corpus::planted_hub_truth() const {
  std::vector<bool> truth(metadata.size());
  for (std::size_t i = 0; i < metadata.size(); ++i) truth[i] = metadata[i].is_planted_hub.value_or(false);
  return truth;
}

bool QuerySet::has_domains() const noexcept {
  for (const auto& d : domains)
    if (d) return true;
  return false;
}

bool QuerySet::has_modalities() const noexcept {
  for (const auto& m : modalities)
    if (m) return true;
  return false;
}

void QuerySet::append(std::span<const float> row, QueryProvenance tag,
                      std::optional<std::string> domain, std::optional<std::string> modality) {
  embeddings.append_row(row);
  provenance.push_back(tag);
  domains.push_back(std::move(domain));
  modalities.push_back(std::move(modality));
}

std::string format_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::uint64_t parse_hash(const json& v) {
  if (v.is_number_unsigned() || v.is_number_integer()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t pos = 0;
    std::uint64_t h = std::stoull(s, &pos, 16);
    if (pos != s.size()) fail(ErrorCode::integrity, "malformed text_hash '" + s + "'");
    return h;
  }
  fail(ErrorCode::integrity, "text_hash must be a hex string or integer");
}

json manifest_json(const Corpus& c) {
  json m;
  m["n_docs"] = c.size();
  m["dim"] = c.dim();
  m["metric"] = std::string(to_string(c.metric));
  m["dtype"] = "f32";
  m["normalize_on_load"] = c.normalize_on_load;
  m["is_benchmark"] = c.is_benchmark;
  return m;
}

json meta_json(const DocumentMeta& d) {
  json j;
  j["doc_id"] = d.doc_id;
  if (d.domain) j["domain"] = *d.domain;
  if (d.modality) j["modality"] = *d.modality;
  if (d.text_hash) j["text_hash"] = format_hash(*d.text_hash);
  if (d.is_planted_hub) j["is_planted_hub"] = *d.is_planted_hub;
  if (d.recipe) j["recipe"] = json::parse(*d.recipe);
  return j;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ErrorCode::integrity, std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(ErrorCode::bundle_incomplete, "cannot open " + p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<float> read_blob(const fs::path& p, std::size_t expected_floats) {
  std::error_code ec;
  const auto bytes = fs::file_size(p, ec);
  if (ec) fail(ErrorCode::bundle_incomplete, "cannot stat " + p.string());
  if (bytes != expected_floats * sizeof(float)) {
    fail(ErrorCode::corrupt_blob, p.filename().string() + " has " + std::to_string(bytes) +
                                      " bytes, expected " + std::to_string(expected_floats * 4));
  }
  std::vector<float> data(expected_floats);
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::bundle_incomplete, "cannot open " + p.string());
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in && bytes > 0) fail(ErrorCode::corrupt_blob, "short read on " + p.string());
  return data;
}

void write_blob(const fs::path& p, const std::vector<float>& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) fail(ErrorCode::io, "write failed on " + p.string());
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) fail(ErrorCode::bundle_incomplete, "missing " + p.string());
}

constexpr double kUnitSlack = 1e-6;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto blob_path = dir / "embeddings.bin";
  const auto meta_path = dir / "metadata.jsonl";
  require_file(manifest_path);
  require_file(blob_path);
  require_file(meta_path);

  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, std::string("manifest.json: ") + e.what());
  }

  Corpus c;
  std::size_t n = 0, d = 0;
  try {
    n = manifest.at("n_docs").get<std::size_t>();
    d = manifest.at("dim").get<std::size_t>();
    c.metric = parse_metric(manifest.at("metric").get<std::string>());
    if (manifest.value("dtype", std::string("f32")) != "f32")
      fail(ErrorCode::integrity, "only dtype f32 is supported");
    c.normalize_on_load = manifest.value("normalize_on_load", true);
    c.is_benchmark = manifest.value("is_benchmark", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::integrity, std::string("manifest.json: ") + e.what());
  }
  if (d < 2) fail(ErrorCode::shape, "dim must be at least 2");

  c.embeddings = Matrix(n, d, read_blob(blob_path, n * d));

  const auto lines = read_lines(meta_path);
  if (lines.size() != n) {
    fail(ErrorCode::integrity, "metadata.jsonl has " + std::to_string(lines.size()) +
                                   " records for " + std::to_string(n) + " rows");
  }
  c.metadata.reserve(n);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      fail(ErrorCode::integrity, "metadata line " + std::to_string(i + 1) + ": " + e.what());
    }
    DocumentMeta m;
    auto id = opt_string(j, "doc_id");
    if (!id) fail(ErrorCode::integrity, "metadata line " + std::to_string(i + 1) + " lacks doc_id");
    m.doc_id = *id;
    if (!seen.insert(m.doc_id).second) fail(ErrorCode::integrity, "duplicate doc_id '" + m.doc_id + "'");
    m.domain = opt_string(j, "domain");
    m.modality = opt_string(j, "modality");
    if (auto it = j.find("text_hash"); it != j.end() && !it->is_null()) m.text_hash = parse_hash(*it);
    if (auto it = j.find("is_planted_hub"); it != j.end() && !it->is_null()) {
      if (!c.is_benchmark)
        fail(ErrorCode::integrity, "is_planted_hub present in a bundle not marked as benchmark");
      m.is_planted_hub = it->get<bool>();
    }
    if (auto it = j.find("recipe"); it != j.end() && !it->is_null()) m.recipe = it->dump();
    c.metadata.push_back(std::move(m));
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto row = c.embeddings.row(i);
    for (float x : row)
      if (!std::isfinite(x)) fail(ErrorCode::integrity, "non-finite value in row " + std::to_string(i));
    const double norm = l2_norm(row);
    if (norm == 0.0) fail(ErrorCode::integrity, "zero-norm row " + std::to_string(i));
    if (c.metric == Metric::cosine && std::abs(norm - 1.0) > kNormTolerance) {
      if (!c.normalize_on_load)
        fail(ErrorCode::integrity, "row " + std::to_string(i) +
                                       " is not unit norm and normalize_on_load is false");
      ++c.renormalized_rows;
    }
    // Rows already unit to float precision are left bit-exact so save/load round-trips.
    if (c.metric == Metric::cosine && c.normalize_on_load && std::abs(norm - 1.0) > kUnitSlack)
      normalize(row);
  }
  return c;
}

void save_corpus(const Corpus& c, const fs::path& dir) {
  if (c.metadata.size() != c.size()) fail(ErrorCode::shape, "metadata and embeddings disagree in length");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string());
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write manifest");
    out << manifest_json(c).dump(2) << '\n';
  }
  write_blob(dir / "embeddings.bin", c.embeddings.values());
  std::ofstream out(dir / "metadata.jsonl", std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write metadata");
  for (const auto& m : c.metadata) out << meta_json(m).dump() << '\n';
  if (!out) fail(ErrorCode::io, "write failed on metadata.jsonl");
}

ValidationReport validate_corpus(const Corpus& c) {
  ValidationReport r;
  r.row_count = c.size();
  r.dim = c.dim();
  r.renormalized_on_load = c.renormalized_rows;
  r.shape_ok = c.metadata.size() == c.size() && (c.size() == 0 || c.dim() >= 2);
  if (c.metric == Metric::cosine) {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (std::abs(l2_norm(c.embeddings.row(i)) - 1.0) > kNormTolerance) ++r.norm_violations;
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& m : c.metadata) ++counts[m.doc_id];
  for (const auto& [id, k] : counts)
    if (k > 1) r.duplicate_ids.push_back(id);
  r.missing_field_counts = {{"domain", 0}, {"modality", 0}, {"text_hash", 0}};
  for (const auto& m : c.metadata) {
    r.missing_field_counts["domain"] += m.domain ? 0 : 1;
    r.missing_field_counts["modality"] += m.modality ? 0 : 1;
    r.missing_field_counts["text_hash"] += m.text_hash ? 0 : 1;
    if (m.is_planted_hub && !c.is_benchmark) r.hub_flags_ok = false;
  }
  return r;
}

QuerySet load_queries(const fs::path& path, const Corpus& corpus) {
  fs::path bin = path, meta;
  if (fs::is_directory(path)) {
    bin = path / "queries.bin";
    meta = path / "queries.jsonl";
  } else {
    meta = path;
    meta.replace_extension(".jsonl");
  }
  require_file(bin);
  require_file(meta);
  const auto lines = read_lines(meta);
  const std::size_t q = lines.size();
  std::error_code ec;
  const auto bytes = fs::file_size(bin, ec);
  if (ec) fail(ErrorCode::bundle_incomplete, "cannot stat " + bin.string());

  QuerySet qs;
  const std::size_t d = corpus.dim();
  if (q == 0) {
    if (bytes != 0) fail(ErrorCode::corrupt_blob, "query blob is non-empty but queries.jsonl has no records");
    qs.embeddings = Matrix(0, d);
    return qs;
  }
  if (bytes % (q * sizeof(float)) != 0)
    fail(ErrorCode::corrupt_blob, "query blob size is not a multiple of the record count");
  const std::size_t qd = bytes / (q * sizeof(float));
  if (qd != d) {
    fail(ErrorCode::shape,
         "queries have dimension " + std::to_string(qd) + ", corpus has " + std::to_string(d));
  }
  qs.embeddings = Matrix(q, d, read_blob(bin, q * d));
  qs.provenance.assign(q, QueryProvenance::real);
  qs.domains.resize(q);
  qs.modalities.resize(q);
  for (std::size_t i = 0; i < q; ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      fail(ErrorCode::integrity, "queries.jsonl line " + std::to_string(i + 1) + ": " + e.what());
    }
    qs.domains[i] = opt_string(j, "domain");
    qs.modalities[i] = opt_string(j, "modality");
    auto row = qs.embeddings.row(i);
    const double norm = l2_norm(row);
    if (norm == 0.0) fail(ErrorCode::integrity, "zero-norm query " + std::to_string(i));
    if (corpus.metric == Metric::cosine && std::abs(norm - 1.0) > kUnitSlack) normalize(row);
  }
  return qs;
}

void save_queries(const QuerySet& qs, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_blob(dir / "queries.bin", qs.embeddings.values());
  std::ofstream out(dir / "queries.jsonl", std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write queries.jsonl");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    json j = json::object();
    if (i < qs.domains.size() && qs.domains[i]) j["domain"] = *qs.domains[i];
    if (i < qs.modalities.size() && qs.modalities[i]) j["modality"] = *qs.modalities[i];
    out << j.dump() << '\n';
  }
}

std::string corpus_fingerprint(const Corpus& c) {
  std::uint64_t h = fnv1a(manifest_json(c).dump());
  for (const auto& m : c.metadata) h = fnv1a(meta_json(m).dump() + "\n", h);
  return format_hash(h);
}

}  // namespace hubscan
