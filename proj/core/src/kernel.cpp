#include "kernel.hpp"

#include <cstring>

namespace hubscan::detail {
namespace {

inline v8d load(const double* p) noexcept {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline double hsum(v8d v) noexcept {
  double s = v[0];
  for (std::size_t l = 1; l < kLanes; ++l) s += v[l];
  return s;
}

}  // namespace

PackedRows::PackedRows(const Matrix& m) {
  resize(m.rows(), m.cols());
  for (std::size_t i = 0; i < rows_; ++i) assign_row(i, m.row(i).data());
}

void PackedRows::resize(std::size_t rows, std::size_t dim) {
  rows_ = rows;
  dim_ = dim;
  stride_ = (dim + kLanes - 1) / kLanes * kLanes;
  data_.assign(rows_ * stride_, 0.0);
}

void PackedRows::assign_row(std::size_t i, const float* src) {
  double* dst = data_.data() + i * stride_;
  for (std::size_t d = 0; d < dim_; ++d) dst[d] = src[d];
}

void PackedRows::assign_row(std::size_t i, const double* src) {
  std::memcpy(data_.data() + i * stride_, src, dim_ * sizeof(double));
}

double dot_packed(const double* a, const double* b, std::size_t blocks) noexcept {
  v8d acc = {};
  for (std::size_t t = 0; t < blocks; ++t) acc += load(a + t * kLanes) * load(b + t * kLanes);
  return hsum(acc);
}

void dot_tile(const PackedRows& A, std::size_t a0, std::size_t na, const PackedRows& B,
              std::size_t b0, std::size_t nb, double* out, std::size_t ldo) noexcept {
  const std::size_t blocks = A.blocks();
  std::size_t i = 0;
  for (; i + 4 <= na; i += 4) {
    const double* a[4] = {A.row(a0 + i), A.row(a0 + i + 1), A.row(a0 + i + 2), A.row(a0 + i + 3)};
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      const double* b[4] = {B.row(b0 + j), B.row(b0 + j + 1), B.row(b0 + j + 2), B.row(b0 + j + 3)};
      v8d acc[4][4] = {};
      for (std::size_t t = 0; t < blocks; ++t) {
        const std::size_t o = t * kLanes;
        const v8d y0 = load(b[0] + o), y1 = load(b[1] + o), y2 = load(b[2] + o), y3 = load(b[3] + o);
        for (int r = 0; r < 4; ++r) {
          const v8d x = load(a[r] + o);
          acc[r][0] += x * y0;
          acc[r][1] += x * y1;
          acc[r][2] += x * y2;
          acc[r][3] += x * y3;
        }
      }
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out[(i + r) * ldo + j + c] = hsum(acc[r][c]);
    }
    for (; j < nb; ++j)
      for (int r = 0; r < 4; ++r) out[(i + r) * ldo + j] = dot_packed(a[r], B.row(b0 + j), blocks);
  }
  for (; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      out[i * ldo + j] = dot_packed(A.row(a0 + i), B.row(b0 + j), blocks);
}

}  // namespace hubscan::detail
