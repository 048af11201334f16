#include "misreport/kernels.hpp"

namespace misreport {

namespace {

void linear_index(const double* x, std::size_t n, std::size_t p, const double* beta,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double b = beta[k];
    const double* col = x + k * n;
    for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + col[i] * b;
  }
}

void semiparametric_moments(const double* idx, const double* y, const double* up,
                            const double* lo, std::size_t n, double* g1, double* g2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double v = idx[i];
    g1[i] = v >= 0.0 ? v * (y[i] - 0.5 * up[i]) : 0.0;
    g2[i] = v <= 0.0 ? v * ((y[i] - 0.5 * lo[i]) - 0.5) : 0.0;
  }
}

void parametric_moments(const double* f, const double* y, const double* up, const double* lo,
                        std::size_t n, double* g1, double* g2) {
  for (std::size_t i = 0; i < n; ++i) {
    g1[i] = y[i] - f[i] * up[i];
    g2[i] = (f[i] + lo[i] * (1.0 - f[i])) - y[i];
  }
}

void sum_and_square(const double* v, std::size_t n, double* sum, double* sumsq) {
  double s = 0.0, q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += v[i];
    q += v[i] * v[i];
  }
  *sum = s;
  *sumsq = q;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable t{"scalar", linear_index, semiparametric_moments, parametric_moments,
                             sum_and_square};
  return t;
}

}  // namespace misreport
