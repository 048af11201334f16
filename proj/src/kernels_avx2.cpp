#include "misreport/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace misreport {

#if defined(__AVX2__)

namespace {

void linear_index(const double* x, std::size_t n, std::size_t p, const double* beta,
                  double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < p; ++k)
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + k * n + i),
                                             _mm256_set1_pd(beta[k])));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < p; ++k) acc = acc + x[k * n + i] * beta[k];
    out[i] = acc;
  }
}

void semiparametric_moments(const double* idx, const double* y, const double* up,
                            const double* lo, std::size_t n, double* g1, double* g2) {
  const __m256d half = _mm256_set1_pd(0.5), zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(idx + i), yy = _mm256_loadu_pd(y + i);
    __m256d a = _mm256_mul_pd(v, _mm256_sub_pd(yy, _mm256_mul_pd(half, _mm256_loadu_pd(up + i))));
    __m256d b = _mm256_mul_pd(
        v, _mm256_sub_pd(_mm256_sub_pd(yy, _mm256_mul_pd(half, _mm256_loadu_pd(lo + i))), half));
    __m256d ge = _mm256_cmp_pd(v, zero, _CMP_GE_OQ), le = _mm256_cmp_pd(v, zero, _CMP_LE_OQ);
    _mm256_storeu_pd(g1 + i, _mm256_and_pd(a, ge));
    _mm256_storeu_pd(g2 + i, _mm256_and_pd(b, le));
  }
  for (; i < n; ++i) {
    const double v = idx[i];
    g1[i] = v >= 0.0 ? v * (y[i] - 0.5 * up[i]) : 0.0;
    g2[i] = v <= 0.0 ? v * ((y[i] - 0.5 * lo[i]) - 0.5) : 0.0;
  }
}

void parametric_moments(const double* f, const double* y, const double* up, const double* lo,
                        std::size_t n, double* g1, double* g2) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ff = _mm256_loadu_pd(f + i), yy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(g1 + i, _mm256_sub_pd(yy, _mm256_mul_pd(ff, _mm256_loadu_pd(up + i))));
    __m256d t = _mm256_add_pd(ff, _mm256_mul_pd(_mm256_loadu_pd(lo + i), _mm256_sub_pd(one, ff)));
    _mm256_storeu_pd(g2 + i, _mm256_sub_pd(t, yy));
  }
  for (; i < n; ++i) {
    g1[i] = y[i] - f[i] * up[i];
    g2[i] = (f[i] + lo[i] * (1.0 - f[i])) - y[i];
  }
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void sum_and_square(const double* v, std::size_t n, double* sum, double* sumsq) {
  __m256d s = _mm256_setzero_pd(), q = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v + i);
    s = _mm256_add_pd(s, x);
    q = _mm256_add_pd(q, _mm256_mul_pd(x, x));
  }
  double ss = hsum(s), qq = hsum(q);
  for (; i < n; ++i) {
    ss += v[i];
    qq += v[i] * v[i];
  }
  *sum = ss;
  *sumsq = qq;
}

}  // namespace

const KernelTable* avx2_kernels_compiled() {
  static const KernelTable t{"avx2", linear_index, semiparametric_moments, parametric_moments,
                             sum_and_square};
  return &t;
}

#else

const KernelTable* avx2_kernels_compiled() { return nullptr; }

#endif

}  // namespace misreport
