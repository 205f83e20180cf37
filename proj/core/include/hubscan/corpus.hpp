#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubscan/matrix.hpp"

namespace hubscan {

enum class Metric { cosine, inner_product };

std::string_view to_string(Metric metric) noexcept;
Metric parse_metric(std::string_view name);

struct DocumentMeta {
  std::string doc_id;
  std::optional<std::string> domain;
  std::optional<std::string> modality;
  std::optional<std::uint64_t> text_hash;
  std::optional<bool> is_planted_hub;
  // Serialized JSON object describing how a planted hub was built.
  std::optional<std::string> recipe;

  friend bool operator==(const DocumentMeta&, const DocumentMeta&) = default;
};

struct Corpus {
  Matrix embeddings;
  std::vector<DocumentMeta> metadata;
  Metric metric = Metric::cosine;
  bool normalize_on_load = true;
  bool is_benchmark = false;
  // Rows that were more than 1e-4 off unit norm and got renormalized by load_corpus.
  std::size_t renormalized_rows = 0;

  std::size_t size() const noexcept { return embeddings.rows(); }
  std::size_t dim() const noexcept { return embeddings.cols(); }
  std::size_t planted_hub_count() const noexcept;
  std::vector<bool> planted_hub_truth() const;
};

struct ValidationReport {
  std::size_t row_count = 0;
  std::size_t dim = 0;
  std::size_t norm_violations = 0;
  std::vector<std::string> duplicate_ids;
  std::map<std::string, std::size_t> missing_field_counts;
  std::size_t renormalized_on_load = 0;
  bool shape_ok = true;
  bool hub_flags_ok = true;

  bool ok() const noexcept {
    return norm_violations == 0 && duplicate_ids.empty() && shape_ok && hub_flags_ok;
  }
};

enum class QueryProvenance { centroid, random_doc, real };

std::string_view to_string(QueryProvenance p) noexcept;

struct QuerySet {
  Matrix embeddings;
  std::vector<std::optional<std::string>> modalities;
  std::vector<std::optional<std::string>> domains;
  std::vector<QueryProvenance> provenance;

  std::size_t size() const noexcept { return embeddings.rows(); }
  bool has_domains() const noexcept;
  bool has_modalities() const noexcept;
  void append(std::span<const float> row, QueryProvenance tag,
              std::optional<std::string> domain = std::nullopt,
              std::optional<std::string> modality = std::nullopt);
};

inline constexpr double kNormTolerance = 1e-4;

Corpus load_corpus(const std::filesystem::path& bundle_dir);
void save_corpus(const Corpus& corpus, const std::filesystem::path& bundle_dir);
ValidationReport validate_corpus(const Corpus& corpus);

// `path` is either a directory holding queries.bin/queries.jsonl or the .bin file itself.
QuerySet load_queries(const std::filesystem::path& path, const Corpus& corpus);
void save_queries(const QuerySet& queries, const std::filesystem::path& dir);

// Stable hash of manifest and metadata contents, hex encoded.
std::string corpus_fingerprint(const Corpus& corpus);

std::string format_hash(std::uint64_t h);

}  // namespace hubscan
