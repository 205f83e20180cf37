#include "hubscan/index.hpp"

#include <algorithm>

#include "hubscan/error.hpp"
#include "kernel.hpp"

namespace hubscan {
namespace {

constexpr std::size_t kQueryBlock = 128;
constexpr std::size_t kDocBlock = 512;

// Bounded descending list; scanning docs in ascending index order with a strict
// comparison keeps the lower index ahead on ties.
struct TopK {
  std::size_t k;
  std::vector<std::size_t> idx;
  std::vector<double> sim;

  explicit TopK(std::size_t k_) : k(k_) {
    idx.reserve(k);
    sim.reserve(k);
  }

  void push(std::size_t doc, double s) {
    if (idx.size() == k) {
      if (!(s > sim.back())) return;
      idx.pop_back();
      sim.pop_back();
    }
    std::size_t pos = sim.size();
    while (pos > 0 && sim[pos - 1] < s) --pos;
    idx.insert(idx.begin() + static_cast<std::ptrdiff_t>(pos), doc);
    sim.insert(sim.begin() + static_cast<std::ptrdiff_t>(pos), s);
  }
};

}  // namespace

struct FlatIndex::Impl {
  detail::PackedRows docs;
};

FlatIndex::FlatIndex(const Matrix& rows, Metric metric) : impl_(std::make_unique<Impl>()), metric_(metric) {
  if (rows.rows() == 0) fail(ErrorCode::parameter, "cannot build an index over an empty corpus");
  impl_->docs = detail::PackedRows(rows);
}

FlatIndex::FlatIndex(const Corpus& corpus) : FlatIndex(corpus.embeddings, corpus.metric) {}

FlatIndex::~FlatIndex() = default;
FlatIndex::FlatIndex(FlatIndex&&) noexcept = default;
FlatIndex& FlatIndex::operator=(FlatIndex&&) noexcept = default;

std::size_t FlatIndex::size() const noexcept { return impl_->docs.rows(); }
std::size_t FlatIndex::dim() const noexcept { return impl_->docs.dim(); }

NeighborList FlatIndex::knn(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim()) fail(ErrorCode::shape, "query dimension does not match index");
  Matrix q(1, dim(), std::vector<float>(query.begin(), query.end()));
  return std::move(knn_batch(q, k, 0, 1).front());
}

std::vector<NeighborList> FlatIndex::knn_batch(const Matrix& queries, std::size_t k,
                                               std::size_t begin, std::size_t end) const {
  if (k == 0) fail(ErrorCode::parameter, "k must be at least 1");
  if (queries.cols() != dim()) fail(ErrorCode::shape, "query dimension does not match index");
  if (begin > end || end > queries.rows()) fail(ErrorCode::parameter, "query range out of bounds");

  const auto& docs = impl_->docs;
  const std::size_t n = docs.rows();
  const std::size_t kk = std::min(k, n);
  std::vector<NeighborList> out;
  out.reserve(end - begin);
  std::vector<double> tile(kQueryBlock * kDocBlock);
  detail::PackedRows qblock;

  for (std::size_t q0 = begin; q0 < end; q0 += kQueryBlock) {
    const std::size_t nq = std::min(kQueryBlock, end - q0);
    qblock.resize(nq, dim());
    for (std::size_t i = 0; i < nq; ++i) qblock.assign_row(i, queries.row(q0 + i).data());
    std::vector<TopK> tops(nq, TopK(kk));
    for (std::size_t d0 = 0; d0 < n; d0 += kDocBlock) {
      const std::size_t nd = std::min(kDocBlock, n - d0);
      detail::dot_tile(qblock, 0, nq, docs, d0, nd, tile.data(), kDocBlock);
      for (std::size_t i = 0; i < nq; ++i) {
        const double* row = tile.data() + i * kDocBlock;
        auto& top = tops[i];
        for (std::size_t j = 0; j < nd; ++j) top.push(d0 + j, row[j]);
      }
    }
    for (auto& top : tops) out.push_back({std::move(top.idx), std::move(top.sim)});
  }
  return out;
}

double FlatIndex::similarity(std::size_t doc, std::span<const float> query) const {
  if (query.size() != dim()) fail(ErrorCode::shape, "query dimension does not match index");
  if (doc >= size()) fail(ErrorCode::parameter, "doc index out of range");
  detail::PackedRows q;
  q.resize(1, dim());
  q.assign_row(0, query.data());
  return detail::dot_packed(q.row(0), impl_->docs.row(doc), q.blocks());
}

FlatIndex build_index(const Corpus& corpus) { return FlatIndex(corpus); }

}  // namespace hubscan
