#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "doctest.h"
#include "misreport/kernels.hpp"

using namespace misreport;

namespace {

struct Inputs {
  std::size_t n, p;
  std::vector<double> x, beta, y, up, lo, f;
};

Inputs random_inputs(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  Inputs in{n, p, std::vector<double>(n * p), std::vector<double>(p), std::vector<double>(n),
            std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (auto& v : in.x) v = g(rng);
  for (auto& v : in.beta) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    in.y[i] = u(rng) < 0.5;
    in.lo[i] = 0.5 * u(rng);
    in.up[i] = 0.5 + 0.5 * u(rng);
    in.f[i] = u(rng);
  }
  // exact zeros of the index exercise both indicator branches
  if (n > 3) in.x[3] = 0.0;
  return in;
}

}  // namespace

TEST_CASE("scalar kernels on a hand example") {
  const auto& k = scalar_kernels();
  const double x[] = {1, 1, 1, 2, -1, 0};  // two columns of three rows
  const double beta[] = {0.5, 2.0};
  double idx[3];
  k.linear_index(x, 3, 2, beta, idx);
  CHECK(idx[0] == 4.5);
  CHECK(idx[1] == -1.5);
  CHECK(idx[2] == 0.5);
  const double y[] = {1, 0, 1}, up[] = {0.6, 0.6, 0.6}, lo[] = {0.3, 0.3, 0.3};
  double g1[3], g2[3];
  const double two[] = {2.0, 0.0, -1.0};
  k.semiparametric_moments(two, y, up, lo, 3, g1, g2);
  CHECK(g1[0] == doctest::Approx(1.4));
  CHECK(g2[0] == 0.0);
  CHECK(g1[1] == 0.0);
  CHECK(g2[1] == 0.0);
  CHECK(g1[2] == 0.0);
  CHECK(g2[2] == doctest::Approx(-(1 - 0.15 - 0.5)));
  const double f[] = {0.5, 0.5, 0.5};
  k.parametric_moments(f, y, up, lo, 3, g1, g2);
  CHECK(g1[0] == doctest::Approx(0.70));
  CHECK(g2[0] == doctest::Approx(-0.35));
  double s, q;
  const double v[] = {1, 2, 3};
  k.sum_and_square(v, 3, &s, &q);
  CHECK(s == 6.0);
  CHECK(q == 14.0);
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  const auto* simd = avx2_kernels();
  if (!simd) {
    MESSAGE("AVX2 unavailable; equivalence test skipped");
    return;
  }
  const auto& ref = scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 1000u, 4097u}) {
    for (std::size_t p : {1u, 2u, 3u, 5u}) {
      auto in = random_inputs(n, p, 1000 * n + p);
      std::vector<double> a(n), b(n);
      ref.linear_index(in.x.data(), n, p, in.beta.data(), a.data());
      simd->linear_index(in.x.data(), n, p, in.beta.data(), b.data());
      CHECK(a == b);
      std::vector<double> a1(n), a2(n), b1(n), b2(n);
      ref.semiparametric_moments(a.data(), in.y.data(), in.up.data(), in.lo.data(), n, a1.data(),
                                 a2.data());
      simd->semiparametric_moments(a.data(), in.y.data(), in.up.data(), in.lo.data(), n,
                                   b1.data(), b2.data());
      CHECK(a1 == b1);
      CHECK(a2 == b2);
      ref.parametric_moments(in.f.data(), in.y.data(), in.up.data(), in.lo.data(), n, a1.data(),
                             a2.data());
      simd->parametric_moments(in.f.data(), in.y.data(), in.up.data(), in.lo.data(), n, b1.data(),
                               b2.data());
      CHECK(a1 == b1);
      CHECK(a2 == b2);
      double s1, q1, s2, q2;
      ref.sum_and_square(a.data(), n, &s1, &q1);
      simd->sum_and_square(a.data(), n, &s2, &q2);
      const double scale = 1e-12 * (1.0 + double(n));
      CHECK(std::abs(s1 - s2) <= scale * (1.0 + std::abs(s1)));
      CHECK(std::abs(q1 - q2) <= scale * (1.0 + q1));
    }
  }
}

TEST_CASE("dispatch honours the scalar override") {
  CHECK(std::string(scalar_kernels().name) == "scalar");
  const char* env = std::getenv("MISREPORT_SIMD");
  if (env && std::string(env) == "scalar") CHECK(std::string(active_kernels().name) == "scalar");
  else if (avx2_kernels()) CHECK(std::string(active_kernels().name) == avx2_kernels()->name);
}
