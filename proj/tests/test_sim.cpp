#include <cmath>
#include <sstream>

#include "doctest.h"
#include "misreport/errors.hpp"
#include "misreport/sim.hpp"

using namespace misreport;

TEST_CASE("misreporting rates at the support endpoints") {
  CHECK(rates_z(1.0).alpha1 == doctest::Approx(0.0));
  CHECK(rates_z(1.0).alpha0 == doctest::Approx(0.4));
  CHECK(rates_z(-1.0).alpha1 == doctest::Approx(0.2));
  CHECK(rates_z(-1.0).alpha0 == doctest::Approx(0.2));
  CHECK(rates_w(0.0, 1.0).alpha0 == doctest::Approx(0.7692).epsilon(1e-4));
  CHECK(rates_w(0.0, 5.0).alpha0 == doctest::Approx(0.1176).epsilon(1e-3));
  CHECK(rates_w(1.0, 3.0).alpha1 == doctest::Approx(0.0));
  double worst = 0.0;
  for (auto d : {Design::z_design, Design::w_design, Design::two_instruments})
    for (double x = -1.0; x <= 1.0; x += 0.01) {
      const auto& ws = w_support(d);
      for (double w : ws.empty() ? std::vector<double>{0.0} : ws) {
        auto r = design_rates(d, x, w);
        CHECK(r.alpha0 >= 0.0);
        CHECK(r.alpha1 >= 0.0);
        CHECK(r.alpha0 + r.alpha1 <= 1.0);
        if (d == Design::w_design) worst = std::max(worst, r.alpha0 + r.alpha1);
      }
    }
  CHECK(worst == doctest::Approx(0.2 + 1.0 / 1.3).epsilon(1e-6));
  for (double w = 1; w < 5; ++w) CHECK(rates_w(0.0, w + 1).alpha0 < rates_w(0.0, w).alpha0);
}

TEST_CASE("generated samples keep the latent bookkeeping and are seeded") {
  for (auto d : {Design::z_design, Design::w_design, Design::two_instruments}) {
    DgpConfig c{d, 3000, ErrorLaw::cauchy, 42};
    auto s = generate(c);
    REQUIRE(s.latent().has_value());
    const auto& l = *s.latent();
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(s.y()[i] == l.m1[i] * l.y_star[i] + (1 - l.m0[i]) * (1 - l.y_star[i]));
    auto t = generate(c);
    CHECK(std::equal(s.y().begin(), s.y().end(), t.y().begin()));
    CHECK(s.has_z() == (d != Design::w_design));
    CHECK(s.has_w() == (d != Design::z_design));
  }
  CHECK_THROWS_AS(dgp_z({Design::w_design, 10, ErrorLaw::normal, 1}), ConfigError);
  CHECK(dgp_w({Design::w_design, 10, ErrorLaw::normal, 1}).w_levels() ==
        std::vector<double>{1, 2, 3, 4, 5});
}

TEST_CASE("empirical frequencies match the population table") {
  for (auto d : {Design::z_design, Design::w_design}) {
    auto s = generate({d, 1000000, ErrorLaw::normal, 7});
    auto pop = population_table(d, ErrorLaw::normal, 4, 200);
    auto t = estimate_cond_prob(s, pop.table.binning(), 1);
    double worst = 0.0;
    for (std::size_t c = 0; c < t.cell_count(); ++c)
      for (std::size_t z = 0; z < t.z_count(); ++z)
        for (std::size_t w = 0; w < t.w_count(); ++w)
          worst = std::max(worst, std::abs(t.at(c, z, w).p - pop.table.at(c, z, w).p));
    CHECK(worst < 0.005);
  }
}

TEST_CASE("population bounds contain the true probability") {
  for (auto e : {ErrorLaw::normal, ErrorLaw::cauchy}) {
    auto check = [&](const PopulationTable& pt, const ProbBounds& b) {
      for (const auto& r : b.rows) {
        REQUIRE(r.defined);
        CHECK(r.lower <= pt.p_star[r.cell][r.z] + 1e-6);
        CHECK(pt.p_star[r.cell][r.z] <= r.upper + 1e-6);
      }
    };
    auto z = population_table(Design::z_design, e);
    check(z, apply_restriction(z.table, {InstrumentMode::z_only, Unrestricted{}}));
    auto w = population_table(Design::w_design, e);
    check(w, apply_restriction(w.table, {InstrumentMode::w_only, Unrestricted{}}));
    auto zw = population_table(Design::two_instruments, e);
    auto b3 = bounds_two_instruments(two_instrument_diagnostics(zw.table), zw.table);
    check(zw, b3);
    auto b1 = apply_restriction(zw.table, {InstrumentMode::z_only, Unrestricted{}});
    auto b2 = apply_restriction(zw.table, {InstrumentMode::w_only, Unrestricted{}});
    for (std::size_t i = 0; i < b3.rows.size(); ++i) {
      CHECK(b3.rows[i].lower >= std::max(b1.rows[i].lower, b2.rows[i].lower) - 1e-9);
      CHECK(b3.rows[i].upper <= std::min(b1.rows[i].upper, b2.rows[i].upper) + 1e-9);
    }
  }
}

TEST_CASE("population moments are nonnegative at the truth") {
  for (auto d : {Design::z_design, Design::w_design})
    for (auto e : {ErrorLaw::normal, ErrorLaw::cauchy}) {
      const auto b = true_beta(d);
      ModelSpec semi;
      ModelSpec par{ModelKind::parametric, error_link(e), 0, 1.0};
      CHECK(population_moments(d, e, semi, b).min_value() >= -1e-8);
      CHECK(population_moments(d, e, par, b).min_value() >= -1e-8);
    }
  // a wrong coefficient produces a violated cell
  ModelSpec par{ModelKind::parametric, LinkFunction::normal(), 0, 1.0};
  std::vector<double> wrong = {1.0, -1.5, 1.5};
  CHECK(population_moments(Design::z_design, ErrorLaw::normal, par, wrong).min_value() < -1e-3);
}

TEST_CASE("hypercube mapping") {
  auto m = default_hypercube_mapping();
  CHECK(hypercubes_for(500, m) == 30);
  CHECK(hypercubes_for(1000, m) == 40);
  CHECK(hypercubes_for(2000, m) == 50);
  CHECK(hypercubes_for(1900, m) == 50);
}

TEST_CASE("Monte Carlo smoke run") {
  McConfig c;
  c.replications = 1;
  c.sizes = {500};
  c.errors = {ErrorLaw::normal};
  c.axis = GridAxis{-3, 3, 0.5};
  auto r = run_monte_carlo(c);
  // Z design: beta2, beta3; W design: beta2; three estimators each
  CHECK(r.rows.size() == 9);
  std::ostringstream os;
  format_mc_tables(os, r);
  CHECK(os.str().find("Performance for beta2 (z_design") != std::string::npos);
  std::ostringstream csv;
  write_mc_csv(csv, r);
  CHECK(csv.str().rfind("design,error,n,coefficient", 0) == 0);
  CHECK(mc_to_json(r)["rows"].size() == 9);
  auto again = run_monte_carlo(c);
  for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(again.rows[i].stat.rmse == r.rows[i].stat.rmse);
}
