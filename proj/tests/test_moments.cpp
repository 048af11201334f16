#include <cmath>
#include <random>

#include "doctest.h"
#include "misreport/errors.hpp"
#include "misreport/moments.hpp"

using namespace misreport;

namespace {

Observation obs(double y, std::vector<double> x, double upper, double lower) {
  return {y, std::move(x), upper, lower};
}

// y ~ Bernoulli(Phi(b0 + b1 x)), x uniform, z with `nz` levels unrelated to y
Sample probit_sample(std::size_t n, std::size_t nz, std::uint64_t seed, double b0 = 0.0,
                     double b1 = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2, 2), v(0, 1);
  const auto link = LinkFunction::normal();
  SampleColumns c;
  c.x.assign(1, std::vector<double>(n));
  c.z.emplace(n);
  c.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.x[0][i] = u(rng);
    (*c.z)[i] = double(rng() % nz);
    c.y[i] = v(rng) < link(b0 + b1 * c.x[0][i]);
  }
  return build_sample(std::move(c));
}

}  // namespace

TEST_CASE("link functions") {
  auto n = LinkFunction::normal();
  CHECK(n(0.0) == doctest::Approx(0.5));
  CHECK(n(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
  CHECK(LinkFunction::logistic()(0.0) == doctest::Approx(0.5));
  auto c = LinkFunction::cauchy(1.0, 2.0);
  CHECK(c(1.0) == doctest::Approx(0.5));
  CHECK(c(3.0) == doctest::Approx(0.75));
  CHECK(LinkFunction::parse("cauchy(1,2)").scale == 2.0);
  CHECK_THROWS_AS(LinkFunction::parse("gumbel"), ConfigError);
  for (double t = -30; t <= 30; t += 0.25) {
    CHECK(n(t) <= n(t + 0.25));
    CHECK(c(t) < c(t + 0.25));
  }
}

TEST_CASE("model spec validation") {
  ModelSpec m;
  m.norm_index = 3;
  CHECK_THROWS_AS(m.validate(3), ConfigError);
  m.norm_index = 1;
  m.norm_value = 0.0;
  CHECK_THROWS_AS(m.validate(3), ConfigError);
  m.norm_value = 1.0;
  CHECK(m.free_coordinates(3) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("parametric moments") {
  // F(x'b) = 0.5 at x'b = 0
  auto g = moment_parametric(obs(1, {1.0}, 0.6, 0.3), std::vector<double>{0.0},
                             LinkFunction::normal());
  CHECK(g[0] == doctest::Approx(0.70));
  CHECK(g[1] == doctest::Approx(-0.35));
  auto d = moment_parametric(obs(0, {1.0}, 1.0, 0.0), std::vector<double>{0.3},
                             LinkFunction::normal());
  const double f = LinkFunction::normal()(0.3);
  CHECK(d[0] == doctest::Approx(-f));
  CHECK(d[1] == doctest::Approx(f));
}

TEST_CASE("semiparametric moments") {
  auto z = moment_semiparametric(obs(1, {1.0, -1.0}, 0.6, 0.3), std::vector<double>{1.0, 1.0});
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  auto g = moment_semiparametric(obs(1, {2.0}, 0.6, 0.3), std::vector<double>{1.0});
  CHECK(g[0] == doctest::Approx(1.4));
  CHECK(g[1] == 0.0);
}

TEST_CASE("criterion from cube statistics") {
  CHECK(criterion_from_stats(std::vector<double>{-0.2, 0.3}, std::vector<double>{0.1, 0.1}) ==
        doctest::Approx(4.0));
  CHECK(criterion_from_stats(std::vector<double>{0.0, 0.3}, std::vector<double>{0.1, 0.1}) == 0.0);
  CHECK(criterion_from_stats(std::vector<double>{-1e-6}, std::vector<double>{0.0}) ==
        doctest::Approx(1.0));
}

TEST_CASE("property: criterion is invariant to a common positive rescaling") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> m(12), sd(12), m2(12), sd2(12);
    const double c = 0.5 + 10 * u(rng);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = g(rng);
      sd[i] = u(rng);
      m2[i] = c * m[i];
      sd2[i] = c * sd[i];
    }
    const double q = criterion_from_stats(m, sd);
    CHECK(q >= 0.0);
    CHECK(criterion_from_stats(m2, sd2) == doctest::Approx(q).epsilon(1e-12));
    bool negative = false;
    for (double v : m) negative |= v < 0;
    CHECK((q == 0.0) == !negative);
  }
}

TEST_CASE("hypercube factorization") {
  auto s = probit_sample(600, 5, 1);
  auto h = build_hypercubes(s, 30, InstrumentMode::z_only);
  CHECK(h.realized == 30);
  CHECK(h.covariate_bins.cell_count() == 6);
  auto h40 = build_hypercubes(s, 40, InstrumentMode::z_only);
  CHECK(h40.realized == 40);
  CHECK(h40.covariate_bins.cell_count() == 8);
  auto h33 = build_hypercubes(s, 33, InstrumentMode::z_only);
  CHECK(h33.realized <= 33);
  CHECK_THROWS_AS(build_hypercubes(s, 4, InstrumentMode::z_only), ConfigError);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  CHECK(total == s.size());

  SampleColumns c;
  c.y = {0, 1, 0, 1, 1, 0};
  c.z = std::vector<double>{0, 1, 2, 0, 1, 2};
  auto s0 = build_sample(c);
  auto h0 = build_hypercubes(s0, 10, InstrumentMode::z_only);
  CHECK(h0.realized == 3);
  CHECK(h0.cube_of == std::vector<std::size_t>{0, 1, 2, 0, 1, 2});
}

TEST_CASE("design matrix layout") {
  auto s = probit_sample(10, 2, 2);
  auto d = design_matrix(s);
  CHECK(d.p == 3);
  CHECK(d.names == std::vector<std::string>{"const", "x1", "z"});
  for (std::size_t i = 0; i < d.n; ++i) {
    CHECK(d.at(i, 0) == 1.0);
    CHECK(d.at(i, 1) == s.covariate(0)[i]);
    CHECK(d.at(i, 2) == s.z_value(i));
  }
}

namespace {

struct Fixture {
  Sample s;
  CriterionData data;
  Fixture(std::size_t n, std::uint64_t seed) : s(probit_sample(n, 2, seed)) {
    auto b = make_binning(s, 4);
    auto t = estimate_cond_prob(s, b, 1);
    auto env = observation_envelopes(s, b, t, InstrumentMode::z_only);
    auto cubes = build_hypercubes(s, 20, InstrumentMode::z_only);
    data = prepare_criterion(s.y(), design_matrix(s), env, cubes);
  }
};

}  // namespace

TEST_CASE("criterion properties") {
  Fixture fx(3000, 7);
  CriterionWorkspace ws;
  ModelSpec semi;
  ModelSpec par{ModelKind::parametric, LinkFunction::normal(), 1, 1.0};
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> beta = {g(rng), 1.0, g(rng)};
    auto q = criterion(beta, fx.data, semi, ws);
    CHECK(q.q >= 0.0);
    CHECK(criterion(beta, fx.data, par, ws).q >= 0.0);
  }
  // with no misreporting, the true coefficients give a near-zero criterion
  std::vector<double> truth = {0.0, 1.0, 0.0};
  std::vector<double> wrong = {2.0, 1.0, 0.0};
  CHECK(criterion(truth, fx.data, par, ws).q < criterion(wrong, fx.data, par, ws).q);
}

TEST_CASE("criterion is the same under scalar and SIMD kernels") {
  const auto* simd = avx2_kernels();
  if (!simd) return;
  Fixture fx(2000, 9);
  CriterionWorkspace ws;
  ModelSpec semi;
  std::vector<double> beta = {0.3, 1.0, -0.2};
  auto a = criterion(beta, fx.data, semi, ws, scalar_kernels());
  auto b = criterion(beta, fx.data, semi, ws, *simd);
  CHECK(a.q == doctest::Approx(b.q).epsilon(1e-10));
}

TEST_CASE("criterion converges to zero at the truth as n grows") {
  Fixture fx(100000, 11);
  CriterionWorkspace ws;
  ModelSpec par{ModelKind::parametric, LinkFunction::normal(), 1, 1.0};
  std::vector<double> truth = {0.0, 1.0, 0.0};
  auto q = criterion(truth, fx.data, par, ws);
  // standardized violations at the truth are O(1) per cube, so Q/n vanishes
  CHECK(q.q / double(fx.data.n) < 1e-3);
  ModelSpec semi;
  CHECK(criterion(truth, fx.data, semi, ws).q / double(fx.data.n) < 1e-3);
}

TEST_CASE("degenerate envelopes point-identify the parametric model") {
  // with p_upper = 1, p_lower = 0 both moments are y - F and F - y
  Observation o = obs(1, {1.0}, 1.0, 0.0);
  auto g = moment_parametric(o, std::vector<double>{0.4}, LinkFunction::logistic());
  CHECK(g[0] == doctest::Approx(-g[1]));
}
