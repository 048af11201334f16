#include <cmath>
#include <random>

#include "doctest.h"
#include "misreport/errors.hpp"
#include "misreport/has.hpp"

using namespace misreport;

namespace {

struct Data {
  DesignMatrix x;
  std::vector<std::uint8_t> y;
};

// constant misreporting with a normal link
Data mixture(std::size_t n, double a0, double a1, std::vector<double> beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  Data d;
  d.x.n = n;
  d.x.p = beta.size();
  d.x.values.assign(n * d.x.p, 1.0);
  for (std::size_t k = 1; k < d.x.p; ++k)
    for (std::size_t i = 0; i < n; ++i) d.x.values[k * n + i] = g(rng);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (std::size_t k = 0; k < d.x.p; ++k) t += d.x.at(i, k) * beta[k];
    const std::uint8_t ys = t >= g(rng);
    d.y[i] = ys ? u(rng) >= a1 : u(rng) < a0;
  }
  return d;
}

}  // namespace

TEST_CASE("likelihood reductions") {
  DesignMatrix x{1, 1, {1.0}, {"const"}};
  std::vector<std::uint8_t> y = {1};
  const auto f = LinkFunction::normal();
  CHECK(has_loglik({0.0, 0.0, {0.0}}, x, y, f) == doctest::Approx(std::log(0.5)));
  CHECK(has_loglik({0.0, 0.0, {0.7}}, x, y, f) == doctest::Approx(std::log(f(0.7))));
  CHECK(has_loglik({0.2, 0.1, {0.7}}, x, y, f) ==
        doctest::Approx(std::log(0.2 + 0.7 * f(0.7))));
  // floor keeps the log finite
  std::vector<std::uint8_t> y0 = {0};
  CHECK(std::isfinite(has_loglik({0.0, 0.0, {40.0}}, x, y0, f)));
  CHECK_THROWS_AS(has_loglik({0.6, 0.6, {0.0}}, x, y, f), ConfigError);
  CHECK_THROWS_AS(has_loglik({-0.1, 0.0, {0.0}}, x, y, f), ConfigError);
}

TEST_CASE("property: label swap symmetry and continuity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 0.5), t(-3, 3);
  const auto f = LinkFunction::normal();
  for (int rep = 0; rep < 500; ++rep) {
    const double a0 = u(rng), a1 = u(rng), v = t(rng);
    CHECK(has_probability(a0, a1, v, f) ==
          doctest::Approx(has_probability(1 - a1, 1 - a0, -v, f)).epsilon(1e-12));
    CHECK(std::abs(has_probability(a0 + 1e-9, a1, v, f) - has_probability(a0, a1, v, f)) < 1e-8);
  }
}

TEST_CASE("likelihood at the generating parameters beats perturbed coefficients") {
  auto d = mixture(5000, 0.1, 0.05, {0.2, 1.0}, 5);
  const auto f = LinkFunction::normal();
  const double at = has_loglik({0.1, 0.05, {0.2, 1.0}}, d.x, d.y, f);
  for (double h : {-0.3, 0.3}) {
    CHECK(has_loglik({0.1, 0.05, {0.2 + h, 1.0}}, d.x, d.y, f) < at);
    CHECK(has_loglik({0.1, 0.05, {0.2, 1.0 + h}}, d.x, d.y, f) < at);
  }
}

TEST_CASE("fit recovers constant misreporting") {
  auto d = mixture(10000, 0.1, 0.05, {0.2, 1.0}, 7);
  auto e = fit_has(d.x, d.y, LinkFunction::normal());
  CHECK(e.converged);
  CHECK(std::abs(e.alpha0 - 0.1) < 0.05);
  CHECK(std::abs(e.alpha1 - 0.05) < 0.05);
  CHECK(std::abs(e.beta[0] - 0.2) < 0.1);
  CHECK(std::abs(e.beta[1] - 1.0) < 0.1);
  CHECK(e.alpha0 + e.alpha1 <= 1.0 - kHasConstraintEps);
  auto again = fit_has(d.x, d.y, LinkFunction::normal());
  CHECK(again.beta == e.beta);
  CHECK(again.loglik == e.loglik);
}

TEST_CASE("fit without misreporting is close to probit") {
  auto d = mixture(4000, 0.0, 0.0, {-0.3, 0.8}, 9);
  auto e = fit_has(d.x, d.y, LinkFunction::normal());
  CHECK(e.alpha0 < 0.05);
  CHECK(e.alpha1 < 0.05);
  CHECK(std::abs(e.beta[1] - 0.8) < 0.15);
}
