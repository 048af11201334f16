#pragma once

#include <cstddef>

namespace misreport {

// Data-parallel inner loops shared by the criterion and the likelihood.
// Elementwise kernels are bit-identical across implementations; the
// reduction may differ in the last bits because lanes are summed in a
// different order.
struct KernelTable {
  const char* name;
  // out[i] = sum_k x[k * n + i] * beta[k], k ascending (x column-major).
  void (*linear_index)(const double* x, std::size_t n, std::size_t p, const double* beta,
                       double* out);
  // g1 = idx 1{idx >= 0} (y - up / 2), g2 = idx 1{idx <= 0} (y - lo / 2 - 1 / 2)
  void (*semiparametric_moments)(const double* idx, const double* y, const double* up,
                                 const double* lo, std::size_t n, double* g1, double* g2);
  // g1 = y - f up, g2 = f + lo (1 - f) - y
  void (*parametric_moments)(const double* f, const double* y, const double* up,
                             const double* lo, std::size_t n, double* g1, double* g2);
  // sum and sum of squares of v[0..n)
  void (*sum_and_square)(const double* v, std::size_t n, double* sum, double* sumsq);
};

const KernelTable& scalar_kernels();
// nullptr when the binary or the CPU lacks AVX2.
const KernelTable* avx2_kernels();
// AVX2 when available unless MISREPORT_SIMD=scalar is set.
const KernelTable& active_kernels();

}  // namespace misreport
