// Dense dot-product kernel shared by the flat index and k-means.
//
// Rows are widened to double and padded to a multiple of 8 lanes. Every pair is
// reduced with the same lane-wise accumulate + fixed-order horizontal sum, no
// matter which tile path computes it, so duplicate rows produce bit-identical
// similarities and ties stay ties.
#pragma once

#include <cstddef>
#include <vector>

#include "hubscan/matrix.hpp"

namespace hubscan::detail {

inline constexpr std::size_t kLanes = 8;

typedef double v8d __attribute__((vector_size(kLanes * sizeof(double))));

class PackedRows {
 public:
  PackedRows() = default;
  explicit PackedRows(const Matrix& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t blocks() const noexcept { return stride_ / kLanes; }
  const double* row(std::size_t i) const noexcept { return data_.data() + i * stride_; }

  void assign_row(std::size_t i, const float* src);
  void assign_row(std::size_t i, const double* src);
  void resize(std::size_t rows, std::size_t dim);

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::size_t stride_ = 0;
  std::vector<double, std::allocator<double>> data_;
};

double dot_packed(const double* a, const double* b, std::size_t blocks) noexcept;

// out[i * ldo + j] = <A[a0 + i], B[b0 + j]> for i < na, j < nb.
void dot_tile(const PackedRows& A, std::size_t a0, std::size_t na, const PackedRows& B,
              std::size_t b0, std::size_t nb, double* out, std::size_t ldo) noexcept;

}  // namespace hubscan::detail
