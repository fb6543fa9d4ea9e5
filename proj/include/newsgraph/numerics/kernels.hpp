#pragma once

#include <cstddef>
#include <span>

// Dense inner loops behind the tensor primitives. Every kernel exists twice:
// `serial` is the reference, `parallel` splits the same per-row work across
// OpenMP threads. Each output element is produced by one thread with the same
// operation order as the reference, so both variants are bit-identical.
namespace newsgraph::kernels {

// Compressed segment list: segment s covers indices[offsets[s] .. offsets[s+1]).
struct Segments {
  std::span<const std::size_t> offsets;
  std::span<const std::size_t> indices;

  std::size_t count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

namespace serial {

// c[m,n] += a[m,k] * b[k,n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c);
// c[k,n] += a[m,k]^T * g[m,n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g,
             double* c);
// c[m,k] += g[m,n] * b[k,n]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b,
             double* c);
// dst[s,:] = sum (or mean) of src rows listed in segment s; empty segments give zeros.
void segment_reduce(Segments segments, std::size_t cols, const double* src, double* dst,
                    bool mean);

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g,
             double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* g, const double* b,
             double* c);
void segment_reduce(Segments segments, std::size_t cols, const double* src, double* dst,
                    bool mean);

}  // namespace parallel

int max_threads();

}  // namespace newsgraph::kernels
