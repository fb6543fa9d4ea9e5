#include "newsgraph/numerics/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace newsgraph::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;
constexpr std::size_t kRowBlock = 8;

// The row kernels are shared by both variants; that is what makes them
// bit-identical.
inline void nn_rows(std::size_t row_begin, std::size_t row_end, std::size_t k, std::size_t n,
                    const double* a, const double* b, double* c) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

inline void tn_rows(std::size_t out_begin, std::size_t out_end, std::size_t m, std::size_t k,
                    std::size_t n, const double* a, const double* g, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = out_begin; p < out_end; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * grow[j];
    }
  }
}

inline void segment_rows(std::size_t seg_begin, std::size_t seg_end, Segments segments,
                         std::size_t cols, const double* src, double* dst, bool mean) {
  for (std::size_t s = seg_begin; s < seg_end; ++s) {
    double* out = dst + s * cols;
    std::fill(out, out + cols, 0.0);
    const std::size_t lo = segments.offsets[s];
    const std::size_t hi = segments.offsets[s + 1];
    for (std::size_t e = lo; e < hi; ++e) {
      const double* in = src + segments.indices[e] * cols;
      for (std::size_t j = 0; j < cols; ++j) out[j] += in[j];
    }
    if (mean && hi > lo) {
      const double count = static_cast<double>(hi - lo);
      for (std::size_t j = 0; j < cols; ++j) out[j] /= count;
    }
  }
}

std::vector<double> transpose(std::size_t rows, std::size_t cols, const double* src) {
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  return out;
}

}  // namespace

namespace serial {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c) {
  nn_rows(0, m, k, n, a, b, c);
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g,
             double* c) {
  tn_rows(0, k, m, k, n, a, g, c);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b,
             double* c) {
  const auto bt = transpose(k, n, b);
  nn_rows(0, m, n, k, g, bt.data(), c);
}

void segment_reduce(Segments segments, std::size_t cols, const double* src, double* dst,
                    bool mean) {
  segment_rows(0, segments.count(), segments, cols, src, dst, mean);
}

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c) {
  const std::size_t blocks = (m + kRowBlock - 1) / kRowBlock;
  const bool big = m * k * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t lo = blk * kRowBlock;
    nn_rows(lo, std::min(m, lo + kRowBlock), k, n, a, b, c);
  }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g,
             double* c) {
  const std::size_t blocks = (k + kRowBlock - 1) / kRowBlock;
  const bool big = m * k * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t lo = blk * kRowBlock;
    tn_rows(lo, std::min(k, lo + kRowBlock), m, k, n, a, g, c);
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b,
             double* c) {
  const auto bt = transpose(k, n, b);
  gemm_nn(m, n, k, g, bt.data(), c);
}

void segment_reduce(Segments segments, std::size_t cols, const double* src, double* dst,
                    bool mean) {
  const std::size_t count = segments.count();
  const std::size_t blocks = (count + kRowBlock - 1) / kRowBlock;
  const bool big = segments.indices.size() * cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t lo = blk * kRowBlock;
    segment_rows(lo, std::min(count, lo + kRowBlock), segments, cols, src, dst, mean);
  }
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace newsgraph::kernels
