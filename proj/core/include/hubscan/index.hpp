#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hubscan/corpus.hpp"
#include "hubscan/matrix.hpp"

namespace hubscan {

struct NeighborList {
  std::vector<std::size_t> doc_indices;
  std::vector<double> similarities;

  std::size_t size() const noexcept { return doc_indices.size(); }
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

// Exact flat index. Similarity is the dot product (cosine on unit rows).
// Ties on similarity go to the lower row index.
class FlatIndex {
 public:
  FlatIndex(const Matrix& rows, Metric metric);
  explicit FlatIndex(const Corpus& corpus);
  ~FlatIndex();
  FlatIndex(FlatIndex&&) noexcept;
  FlatIndex& operator=(FlatIndex&&) noexcept;

  std::size_t size() const noexcept;
  std::size_t dim() const noexcept;
  Metric metric() const noexcept { return metric_; }

  NeighborList knn(std::span<const float> query, std::size_t k) const;

  // Neighbors of queries [begin, end); same results as calling knn per row.
  std::vector<NeighborList> knn_batch(const Matrix& queries, std::size_t k, std::size_t begin,
                                      std::size_t end) const;
  std::vector<NeighborList> knn_batch(const Matrix& queries, std::size_t k) const {
    return knn_batch(queries, k, 0, queries.rows());
  }

  double similarity(std::size_t doc, std::span<const float> query) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Metric metric_;
};

FlatIndex build_index(const Corpus& corpus);

}  // namespace hubscan
