#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "misreport/errors.hpp"
#include "misreport/setest.hpp"
#include "misreport/sim.hpp"

using namespace misreport;

namespace {

// Probit outcome without misreporting, one continuous covariate and a binary z.
Sample clean_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1), v(0, 1);
  SampleColumns c;
  c.x.assign(1, std::vector<double>(n));
  c.z.emplace(n);
  c.y.resize(n);
  const auto f = LinkFunction::normal();
  for (std::size_t i = 0; i < n; ++i) {
    c.x[0][i] = u(rng);
    (*c.z)[i] = double(rng() % 2);
    c.y[i] = v(rng) < f(0.5 + 1.5 * c.x[0][i] - 1.0 * (*c.z)[i]);
  }
  return build_sample(std::move(c));
}

}  // namespace

TEST_CASE("grid axis and point layout") {
  GridAxis a{-1.0, 1.0, 0.5};
  CHECK(a.size() == 5);
  CHECK(GridAxis{-5, 5, 0.1}.size() == 101);
  ModelSpec m;
  auto g = BetaGrid::uniform(3, m, a);
  CHECK(g.size() == 25);
  auto p = g.point(7);  // second axis fastest
  CHECK(p[0] == 1.0);
  CHECK(p[1] == doctest::Approx(-0.5));
  CHECK(p[2] == doctest::Approx(0.0));
  GridAxis bad{1.0, 0.0, 0.1};
  g.axes[0] = bad;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  auto big = BetaGrid::uniform(4, m, GridAxis{-5, 5, 0.01});
  CHECK_THROWS_AS(big.validate(), ConfigError);
}

TEST_CASE("mc_metrics") {
  std::vector<std::optional<double>> same = {1.5, 1.5, 1.5};
  auto s = mc_metrics(same, 1.5);
  CHECK(s.rmse == 0.0);
  CHECK(s.mad == 0.0);
  std::vector<std::optional<double>> two = {1.4, 1.6};
  auto t = mc_metrics(two, 1.5);
  CHECK(t.rmse == doctest::Approx(0.1));
  CHECK(t.mad == doctest::Approx(0.1));
  std::vector<std::optional<double>> mixed = {1.4, std::nullopt, 1.6};
  auto m = mc_metrics(mixed, 1.5);
  CHECK(m.successes == 2);
  CHECK(m.failures == 1);
  std::vector<std::optional<double>> none = {std::nullopt};
  CHECK_THROWS_AS(mc_metrics(none, 0.0), DataError);
}

TEST_CASE("single-point grid accepts that point") {
  auto s = clean_sample(500, 1);
  auto data = prepare_sample(s, InstrumentMode::z_only, {4, 10, 16});
  ModelSpec m;
  auto g = BetaGrid::uniform(3, m, GridAxis{0.3, 0.3, 0.1});
  auto set = estimate_identified_set(data, m, g);
  CHECK(set.accepted_count == 1);
  CHECK(set.lower == set.upper);
  CHECK(set.lower[1] == doctest::Approx(0.3));
}

TEST_CASE("no-misreporting parametric model: the set brackets the truth") {
  auto s = clean_sample(10000, 2);
  auto data = prepare_sample(s, InstrumentMode::z_only, {5, 10, 40});
  ModelSpec par{ModelKind::parametric, LinkFunction::normal(), 1, 1.5};
  auto g = BetaGrid::uniform(3, par, GridAxis{-3, 3, 0.1});
  auto set = estimate_identified_set(data, par, g);
  CHECK(set.accepted_count >= 1);
  CHECK(set.lower[0] <= 0.5 + 1e-9);
  CHECK(set.upper[0] >= 0.5 - 1e-9);
  CHECK(set.lower[2] <= -1.0 + 1e-9);
  CHECK(set.upper[2] >= -1.0 - 1e-9);
}

TEST_CASE("set estimation properties") {
  auto s = clean_sample(1500, 3);
  auto data = prepare_sample(s, InstrumentMode::z_only, {4, 10, 16});
  ModelSpec m;
  auto coarse = BetaGrid::uniform(3, m, GridAxis{-2, 2, 0.2});
  auto fine = BetaGrid::uniform(3, m, GridAxis{-2, 2, 0.1});
  auto a = estimate_identified_set(data, m, coarse, 0.5);
  auto b = estimate_identified_set(data, m, coarse, 5.0);
  // raising kappa never shrinks the accepted set
  for (std::size_t i = 0; i < a.accepted.size(); ++i)
    if (a.accepted[i]) CHECK(b.accepted[i]);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.lower[k] <= a.upper[k]);
  // halving the step keeps every coarse point, so the minimum cannot rise
  auto f = estimate_identified_set(data, m, fine, 0.5);
  CHECK(f.min_q <= a.min_q + 1e-12);
  // determinism
  auto again = estimate_identified_set(data, m, coarse, 0.5);
  CHECK(again.q == a.q);
  // the scalar and SIMD kernels accept the same points up to ties at the cutoff
  auto sc = estimate_identified_set(data, m, coarse, 0.5, scalar_kernels());
  for (std::size_t i = 0; i < a.q.size(); ++i) CHECK(sc.q[i] == doctest::Approx(a.q[i]).epsilon(1e-9));
}

TEST_CASE("set export") {
  auto s = clean_sample(300, 4);
  auto data = prepare_sample(s, InstrumentMode::z_only, {2, 10, 8});
  ModelSpec m;
  auto g = BetaGrid::uniform(3, m, GridAxis{-1, 1, 1.0});
  auto set = estimate_identified_set(data, m, g);
  std::ostringstream os;
  std::vector<std::string> names = {"const", "x1", "z"};
  write_set_csv(os, g, set, names);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "const,x1,z,q,accepted");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 9);
  auto j = set_to_json(g, set, names);
  CHECK(j["endpoints"].size() == 3);
  CHECK(j["normalized"]["coordinate"] == "const");
}
