#include <random>

#include "doctest.h"
#include "misreport/bounds.hpp"
#include "misreport/bounds_io.hpp"
#include "misreport/errors.hpp"

using namespace misreport;

namespace {

CondProbTable z_table(const std::vector<double>& p) {
  std::vector<double> z(p.size()), mass(p.size(), 1.0);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = double(i + 1);
  return CondProbTable::from_probabilities(Binning{}, z, {}, true, false, p, mass);
}

CondProbTable w_table(const std::vector<double>& p) {
  std::vector<double> w(p.size()), mass(p.size(), 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = double(i + 1);
  return CondProbTable::from_probabilities(Binning{}, {}, w, false, true, p, mass);
}

// p laid out [z * n_w + w]
CondProbTable zw_table(std::size_t nz, std::size_t nw, const std::vector<double>& p) {
  std::vector<double> z(nz), w(nw), mass(p.size(), 1.0);
  for (std::size_t i = 0; i < nz; ++i) z[i] = double(i + 1);
  for (std::size_t i = 0; i < nw; ++i) w[i] = double(i + 1);
  return CondProbTable::from_probabilities(Binning{}, z, w, true, true, p, mass);
}

ProbBounds run(const CondProbTable& t, InstrumentMode mode, Restriction r = Unrestricted{}) {
  return apply_restriction(t, AssumptionSet{mode, r});
}

// the two-instrument example: z1 row (w, w_m) = (0.52, 0.56), z2 row (0.31, 0.305)
CondProbTable two_instrument_example() { return zw_table(2, 2, {0.52, 0.56, 0.31, 0.305}); }

}  // namespace

TEST_CASE("cap formulas") {
  CHECK(lower_from_cap(0.6, 0.3) == doctest::Approx(0.3 / 0.7));
  CHECK(upper_from_cap(0.3, 0.4) == doctest::Approx(0.5));
  CHECK(lower_from_cap(0.2, 0.3) == 0.0);
  CHECK(upper_from_cap(0.9, 0.5) == 1.0);
  CHECK(lower_from_cap(0.5, 1.0) == 1.0);
  CHECK(upper_from_cap(0.5, 1.0) == 1.0);
}

TEST_CASE("instrument Z: two-level example") {
  auto b = run(z_table({0.3, 0.6}), InstrumentMode::z_only);
  REQUIRE(b.rows.size() == 2);
  CHECK(b.rows[1].lower == doctest::Approx(0.4286).epsilon(1e-4));
  CHECK(b.rows[1].upper == 1.0);
  CHECK(b.rows[0].lower == 0.0);
  CHECK(b.rows[0].upper == doctest::Approx(0.5));
  CHECK(b.method == "z_instrument");
  CHECK(b.rows[0].binding_upper == "z=2");
}

TEST_CASE("instrument Z: point identification and the uninformative case") {
  auto b = run(z_table({0.0, 0.45, 1.0}), InstrumentMode::z_only);
  CHECK(b.rows[1].lower == doctest::Approx(0.45));
  CHECK(b.rows[1].upper == doctest::Approx(0.45));
  auto one = run(z_table({0.37}), InstrumentMode::z_only);
  CHECK(one.rows[0].lower == 0.0);
  CHECK(one.rows[0].upper == 1.0);
}

TEST_CASE("instrument Z: boundary violation flags the cell") {
  auto b = run(z_table({0.0, 0.0}), InstrumentMode::z_only);
  CHECK((b.rows[0].flags & flag::boundary_violated) != 0);
  CHECK(b.rows[0].lower == 0.0);
  CHECK(b.rows[0].upper == 1.0);
  auto c = run(z_table({1.0, 1.0}), InstrumentMode::z_only);
  CHECK((c.rows[1].flags & flag::boundary_violated) != 0);
}

TEST_CASE("instrument W: binary example and constant table") {
  auto b = run(w_table({0.4, 0.5}), InstrumentMode::w_only);
  REQUIRE(b.rows.size() == 1);
  CHECK(b.rows[0].lower == doctest::Approx(1.0 / 6.0));
  CHECK(b.rows[0].upper == 1.0);
  auto c = run(w_table({0.3, 0.3, 0.3}), InstrumentMode::w_only);
  CHECK(c.rows[0].lower == 0.0);
  CHECK(c.rows[0].upper == doctest::Approx(1.0));
}

TEST_CASE("instrument W: boundary and crossing flags") {
  auto b = run(w_table({0.4, 1.0}), InstrumentMode::w_only);
  CHECK((b.rows[0].flags & flag::boundary_violated) != 0);
  auto t = w_table({0.5, 0.8, 0.4});
  auto v = run(t, InstrumentMode::w_only);
  CHECK(v.rows[0].lower == doctest::Approx(0.6));
  CHECK(v.rows[0].upper == doctest::Approx(0.5));
  CHECK((v.rows[0].flags & flag::testable_implication_violated) != 0);
  auto rep = check_testable_implications(v, t, {InstrumentMode::w_only, Unrestricted{}});
  REQUIRE(rep.issues.size() == 1);
  CHECK(rep.issues[0].check == "w_monotonicity (bounds cross: L > U)");
}

TEST_CASE("restrictions in Z mode") {
  auto t = z_table({0.3, 0.6});
  auto one = run(t, InstrumentMode::z_only, OneSided{OneSided::Side::no_false_positives});
  CHECK(one.rows[1].lower == doctest::Approx(0.6));
  CHECK(one.rows[1].upper == 1.0);
  CHECK(one.method == "z_instrument+one_sided(alpha0=0)");
  auto neg = run(t, InstrumentMode::z_only, OneSided{OneSided::Side::no_false_negatives});
  CHECK(neg.rows[0].upper == doctest::Approx(0.3));

  auto bd = run(t, InstrumentMode::z_only, BoundedMisreporting{0.1, 0.2});
  CHECK(bd.rows[1].lower == doctest::Approx(0.5556).epsilon(1e-4));
  CHECK(bd.rows[1].upper == doctest::Approx(0.75));
  auto none = run(t, InstrumentMode::z_only, BoundedMisreporting{0.0, 0.0});
  for (const auto& r : none.rows) {
    CHECK(r.lower == doctest::Approx(r.p));
    CHECK(r.upper == doctest::Approx(r.p));
  }

  auto mono = z_table({0.5, 0.9, 0.7});
  auto plain = run(mono, InstrumentMode::z_only);
  auto tight =
      run(mono, InstrumentMode::z_only, MonotoneMisreporting{MonotoneMisreporting::Direction::a0_le_a1});
  CHECK(plain.rows[2].lower == doctest::Approx(0.4));
  CHECK(tight.rows[2].lower == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(tight.rows[2].upper == plain.rows[2].upper);
  auto other =
      run(mono, InstrumentMode::z_only, MonotoneMisreporting{MonotoneMisreporting::Direction::a1_le_a0});
  CHECK(other.rows[2].upper <= plain.rows[2].upper);
  CHECK(other.rows[2].lower == plain.rows[2].lower);
}

TEST_CASE("restrictions in W mode") {
  auto t = w_table({0.4, 0.5});
  auto one = run(t, InstrumentMode::w_only, OneSided{OneSided::Side::no_false_positives});
  CHECK(one.rows[0].lower == doctest::Approx(0.5));
  auto neg = run(t, InstrumentMode::w_only, OneSided{OneSided::Side::no_false_negatives});
  CHECK(neg.rows[0].upper == doctest::Approx(0.4));

  auto dec = w_table({0.6, 0.4});
  auto b = run(dec, InstrumentMode::w_only, OneSided{OneSided::Side::no_false_positives});
  auto rep = check_testable_implications(b, dec,
                                         {InstrumentMode::w_only, OneSided{OneSided::Side::no_false_positives}});
  bool mono = false;
  for (const auto& i : rep.issues) mono |= i.check == "w_monotonicity (one-sided)";
  CHECK(mono);
  CHECK((b.rows[0].flags & flag::monotonicity_violated) != 0);
}

TEST_CASE("consistent cell produces no implication issue") {
  ProbBounds b;
  BoundRow r;
  r.lower = 0.2;
  r.upper = 0.7;
  r.defined = true;
  b.rows.push_back(r);
  auto t = z_table({0.3, 0.6});
  CHECK(check_testable_implications(b, t, {}).ok());
}

TEST_CASE("assumption validation") {
  CHECK_THROWS_AS((AssumptionSet{InstrumentMode::z_only, BoundedMisreporting{1.2, 0.0}}.validate()),
                  ConfigError);
  CHECK_NOTHROW((AssumptionSet{InstrumentMode::z_only, BoundedMisreporting{0.2, 0.1}}.validate()));
  CHECK_THROWS_AS(run(z_table({0.3, 0.6}), InstrumentMode::w_only), DataError);
}

TEST_CASE("two instruments: diagnostics on the forward-simulated example") {
  auto t = two_instrument_example();
  auto d = two_instrument_diagnostics(t);
  CHECK(d.w_m == 1);
  REQUIRE(d.cells.size() == 1);
  const auto& c = d.cells[0];
  REQUIRE(c.pairs.size() == 1);
  CHECK(c.pairs[0].q1 == doctest::Approx(1.2143).epsilon(1e-4));
  CHECK(c.pairs[0].q0 == doctest::Approx(0.07143).epsilon(1e-3));
  REQUIRE(c.pairs[0].ratio.has_value());
  CHECK(*c.pairs[0].ratio == doctest::Approx(1.0 / 3.0));
  CHECK(c.pairs[0].overid_residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.u_alpha1 == doctest::Approx(0.44));
  CHECK(c.u_alpha0 == doctest::Approx(0.305));
  // true misreporting at w_m lies below the upper limits
  CHECK(0.1 <= c.u_alpha1);
  CHECK(0.05 <= c.u_alpha0);

  auto b = bounds_two_instruments(d, t);
  REQUIRE(b.rows.size() == 2);
  CHECK(b.rows[0].lower == doctest::Approx(0.3669).epsilon(1e-4));
  CHECK(b.rows[0].upper == doctest::Approx(1.0));
  CHECK(b.rows[1].lower == 0.0);
  CHECK(b.rows[1].upper == doctest::Approx(0.5446).epsilon(1e-4));
  CHECK(b.rows[0].lower <= 0.6);
  CHECK(0.6 <= b.rows[0].upper);
  CHECK(b.rows[1].lower <= 0.3);
  CHECK(0.3 <= b.rows[1].upper);
}

TEST_CASE("two instruments: truth telling and irrelevance") {
  auto t = zw_table(2, 2, {0.5, 0.7, 0.2, 0.3});
  auto d = two_instrument_diagnostics(t, 0.0);
  auto b = bounds_two_instruments(d, t);
  for (const auto& r : b.rows) {
    CHECK(r.lower <= r.p + 1e-12);
    CHECK(r.p <= r.upper + 1e-12);
  }
  auto flat = zw_table(2, 2, {0.4, 0.5, 0.4, 0.5});
  CHECK_THROWS_WITH_AS(two_instrument_diagnostics(flat), doctest::Contains("instrument Z irrelevant"),
                       DataError);
}

TEST_CASE("two instruments: q1 <= 1 is flagged") {
  // spread shrinks towards w_m less than at w: q1 < 1
  auto t = zw_table(2, 2, {0.6, 0.55, 0.3, 0.4});
  auto d = two_instrument_diagnostics(t, 0.0);
  CHECK(d.cells[0].pairs[0].q1_violated);
  CHECK((d.cells[0].flags & flag::relevance_implication_violated) != 0);
}

TEST_CASE("flags round trip through their text form") {
  for (std::uint32_t f = 0; f < 256; ++f) CHECK(flags_from_string(flags_to_string(f)) == f);
}

TEST_CASE("bounds CSV round trip") {
  auto b = run(z_table({0.3, 0.6}), InstrumentMode::z_only);
  std::stringstream ss;
  write_bounds_csv(ss, b, nullptr);
  auto back = read_bounds_csv(ss);
  REQUIRE(back.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    CHECK(back.rows[i].lower == b.rows[i].lower);
    CHECK(back.rows[i].upper == b.rows[i].upper);
    CHECK(back.rows[i].p == b.rows[i].p);
    CHECK(back.rows[i].flags == b.rows[i].flags);
  }
  CHECK(back.method == b.method);
}

TEST_CASE("property: restricted intervals nest inside the unrestricted one") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int rep = 0; rep < 300; ++rep) {
    const bool w_mode = rep % 2;
    const std::size_t n = 2 + rng() % 3;
    std::vector<double> p(n);
    for (auto& v : p) v = u(rng);
    auto t = w_mode ? w_table(p) : z_table(p);
    auto mode = w_mode ? InstrumentMode::w_only : InstrumentMode::z_only;
    auto base = run(t, mode);
    const double a0 = u(rng), a1 = u(rng);
    std::vector<Restriction> rs = {OneSided{OneSided::Side::no_false_positives},
                                   OneSided{OneSided::Side::no_false_negatives},
                                   BoundedMisreporting{a0, a1},
                                   MonotoneMisreporting{MonotoneMisreporting::Direction::a0_le_a1},
                                   MonotoneMisreporting{MonotoneMisreporting::Direction::a1_le_a0}};
    for (const auto& r : rs) {
      auto b = run(t, mode, r);
      for (std::size_t i = 0; i < b.rows.size(); ++i) {
        CHECK(b.rows[i].lower >= base.rows[i].lower - 1e-12);
        CHECK(b.rows[i].upper <= base.rows[i].upper + 1e-12);
      }
    }
    // shrinking the caps shrinks the interval
    auto wide = run(t, mode, BoundedMisreporting{a0, a1});
    auto narrow = run(t, mode, BoundedMisreporting{a0 / 2, a1 / 2});
    for (std::size_t i = 0; i < wide.rows.size(); ++i) {
      CHECK(narrow.rows[i].lower >= wide.rows[i].lower - 1e-12);
      CHECK(narrow.rows[i].upper <= wide.rows[i].upper + 1e-12);
    }
  }
}

TEST_CASE("property: comparative statics of the Z bounds") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int rep = 0; rep < 500; ++rep) {
    const double p = u(rng);
    const double lo = std::min(p, u(rng)), hi = std::max(p, u(rng));
    const double hi2 = std::min(1.0, hi + 0.1 * u(rng));
    const double lo2 = std::min(p, lo + 0.1 * u(rng));
    // U1 = p / p_bar is non-increasing in p_bar; L1 non-increasing in p_lower
    CHECK(upper_from_cap(p, 1.0 - hi2) <= upper_from_cap(p, 1.0 - hi) + 1e-15);
    CHECK(lower_from_cap(p, lo2) <= lower_from_cap(p, lo) + 1e-15);
    // clipping preserves order
    CHECK(lower_from_cap(p, lo) <= upper_from_cap(p, 1.0 - hi));
    CHECK(lower_from_cap(p, lo) >= 0.0);
    CHECK(upper_from_cap(p, 1.0 - hi) <= 1.0);
  }
}

TEST_CASE("property: two-instrument interval nests in the Z and W intersection") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int checked = 0;
  for (int rep = 0; rep < 2000 && checked < 200; ++rep) {
    // forward-simulate p* decreasing in z, misreporting decreasing in w
    const double ps1 = u(rng), ps2 = u(rng) * ps1;
    const double a1w = 0.3 * u(rng), a0w = 0.3 * u(rng);
    const double a1m = a1w * u(rng), a0m = a0w * u(rng);
    auto pr = [](double ps, double a0, double a1) { return (1 - a1) * ps + a0 * (1 - ps); };
    std::vector<double> p = {pr(ps1, a0w, a1w), pr(ps1, a0m, a1m), pr(ps2, a0w, a1w),
                             pr(ps2, a0m, a1m)};
    if (ps1 - ps2 < 0.05) continue;
    auto t = zw_table(2, 2, p);
    auto d = two_instrument_diagnostics(t, 0.0);
    auto b3 = bounds_two_instruments(d, t);
    auto bz = run(t, InstrumentMode::z_only);
    // the W bounds at w_m, computed on the table restricted to each z
    for (std::size_t z = 0; z < 2; ++z) {
      const auto& r3 = b3.rows[z];
      if (!r3.defined) continue;
      auto bw = run(w_table({p[z * 2], p[z * 2 + 1]}), InstrumentMode::w_only);
      const double ps = z == 0 ? ps1 : ps2;
      CHECK(r3.lower <= ps + 1e-9);
      CHECK(ps <= r3.upper + 1e-9);
      CHECK(r3.lower >= bw.rows[0].lower - 1e-9);
      CHECK(r3.upper <= bw.rows[0].upper + 1e-9);
      (void)bz;
    }
    ++checked;
  }
  CHECK(checked == 200);
}
