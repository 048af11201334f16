#include "misreport/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "misreport/errors.hpp"

namespace misreport {

ProbBounds closed_form_bounds(const DiscreteInstance& inst) {
  auto t = inst.to_table();
  if (inst.mode == InstrumentMode::z_and_w)
    return bounds_two_instruments(two_instrument_diagnostics(t, 0.0), t);
  return apply_restriction(t, inst.assumptions());
}

namespace {

struct SuiteCase {
  std::string name;
  InstrumentMode mode;
  Restriction restriction;
  std::size_t nz_lo, nz_hi, nw;
  bool sharp;
  bool witness;
  WitnessMethod method;
};

std::vector<SuiteCase> suite_cases() {
  using D = MonotoneMisreporting::Direction;
  using S = OneSided::Side;
  return {
      {"z instrument", InstrumentMode::z_only, Unrestricted{}, 2, 4, 1, true, true,
       WitnessMethod::z_instrument},
      {"w instrument (binary)", InstrumentMode::w_only, Unrestricted{}, 1, 1, 2, true, true,
       WitnessMethod::w_instrument_binary},
      {"one-sided alpha0=0 (z)", InstrumentMode::z_only, OneSided{S::no_false_positives}, 2, 4, 1,
       true, true, WitnessMethod::one_sided},
      {"one-sided alpha1=0 (z)", InstrumentMode::z_only, OneSided{S::no_false_negatives}, 2, 4, 1,
       true, true, WitnessMethod::one_sided},
      {"one-sided alpha0=0 (w)", InstrumentMode::w_only, OneSided{S::no_false_positives}, 1, 1, 2,
       true, false, WitnessMethod::one_sided},
      {"two instruments (binary w)", InstrumentMode::z_and_w, Unrestricted{}, 2, 3, 2, true, true,
       WitnessMethod::two_instruments_binary_w},
      {"bounded (z)", InstrumentMode::z_only, BoundedMisreporting{0.25, 0.2}, 2, 4, 1, false, false,
       WitnessMethod::z_instrument},
      {"bounded (w)", InstrumentMode::w_only, BoundedMisreporting{0.25, 0.2}, 1, 1, 2, false, false,
       WitnessMethod::z_instrument},
      {"monotone a0<=a1 (z)", InstrumentMode::z_only, MonotoneMisreporting{D::a0_le_a1}, 2, 4, 1,
       false, false, WitnessMethod::z_instrument},
      {"monotone a1<=a0 (w)", InstrumentMode::w_only, MonotoneMisreporting{D::a1_le_a0}, 1, 1, 2,
       false, false, WitnessMethod::z_instrument},
      {"w instrument (three levels)", InstrumentMode::w_only, Unrestricted{}, 1, 1, 3, false, false,
       WitnessMethod::z_instrument},
  };
}

// Index of the entry a closed-form row refers to.
std::size_t entry_of(const DiscreteInstance& inst, const BoundRow& row) {
  return row.z * inst.n_w + (inst.mode == InstrumentMode::z_only ? 0 : inst.n_w - 1);
}

}  // namespace

std::vector<CheckResult> oracle_suite(std::size_t per_case, std::uint64_t seed, double tol) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  for (const auto& c : suite_cases()) {
    CheckResult oracle{"oracle " + std::string(c.sharp ? "equality" : "containment") + ": " + c.name, 0, 0, 0.0, ""};
    CheckResult wit{"witness: " + c.name, 0, 0, 0.0, ""};
    for (std::size_t k = 0; k < per_case; ++k) {
      const std::size_t nz = c.nz_lo + rng() % (c.nz_hi - c.nz_lo + 1);
      auto g = random_instance(c.mode, c.restriction, nz, c.nw, rng);
      const auto cf = closed_form_bounds(g.instance);
      const auto orc = brute_force_prob_bounds(g.instance);
      ++oracle.instances;
      bool bad = false;
      for (const auto& row : cf.rows) {
        const auto& o = orc.cells[row.cell][row.z];
        if (!o.feasible) {
          bad = true;
          continue;
        }
        const double dev = c.sharp ? std::max(std::abs(o.lower - row.lower), std::abs(o.upper - row.upper))
                                   : std::max(row.lower - o.lower, o.upper - row.upper);
        oracle.worst = std::max(oracle.worst, dev);
        bad = bad || dev > tol;
      }
      oracle.failures += bad;
      if (!c.witness) continue;
      ++wit.instances;
      bool wbad = false;
      for (auto e : {Endpoint::lower, Endpoint::upper}) {
        auto w = construct_sharpness_witness(g.instance, 0, c.method, e);
        auto rep = verify_witness(w, g.instance, 0);
        if (!rep.pass()) {
          wbad = true;
          if (wit.detail.empty()) wit.detail = rep.failures.front();
        }
        for (const auto& row : cf.rows) {
          const double target = e == Endpoint::lower ? row.lower : row.upper;
          const double dev = std::abs(w.p_star[entry_of(g.instance, row)] - target);
          wit.worst = std::max(wit.worst, dev);
          wbad = wbad || dev > 1e-9;
        }
      }
      wit.failures += wbad;
    }
    std::ostringstream os;
    os << "max deviation " << oracle.worst << " (tolerance " << tol << ")";
    oracle.detail = os.str();
    out.push_back(oracle);
    if (c.witness) out.push_back(wit);
  }
  return out;
}

std::vector<CheckResult> verify_instance(const DiscreteInstance& inst, std::uint64_t budget) {
  inst.validate();
  std::vector<CheckResult> out;
  auto cf = closed_form_bounds(inst);
  auto table = inst.to_table();
  auto rep = check_testable_implications(cf, table, inst.assumptions());
  CheckResult impl{"testable implications", 1, 0, 0.0, "consistent"};
  std::vector<std::string> names;
  for (const auto& i : rep.issues) {
    if (std::find(names.begin(), names.end(), i.check) == names.end()) names.push_back(i.check);
  }
  for (const auto& n : names) {
    CheckResult r{n, 1, 1, 0.0, ""};
    for (const auto& i : rep.issues)
      if (i.check == n) r.detail += (r.detail.empty() ? "" : "; ") + ("cell " + std::to_string(i.cell) + " z " + std::to_string(i.z) + ": " + i.detail);
    out.push_back(r);
  }
  if (names.empty()) out.push_back(impl);

  auto orc = brute_force_prob_bounds(inst, budget);
  CheckResult feas{"oracle feasibility", 1, 0, 0.0, "a witness on the grid exists"};
  CheckResult agree{"oracle containment", 1, 0, 0.0, ""};
  for (const auto& row : cf.rows) {
    const auto& o = orc.cells[row.cell][row.z];
    if (!o.feasible) {
      feas.failures = 1;
      feas.detail = "no grid witness reproduces the table";
      continue;
    }
    const double dev = std::max(row.lower - o.lower, o.upper - row.upper);
    agree.worst = std::max(agree.worst, dev);
  }
  const double tol = 2.0 * inst.step;
  if (agree.worst > tol) agree.failures = 1;
  std::ostringstream os;
  os << "oracle interval exceeds the closed form by at most " << agree.worst << " (tolerance "
     << tol << ")";
  agree.detail = feas.failures ? "skipped: infeasible" : os.str();
  out.push_back(feas);
  if (!feas.failures) out.push_back(agree);
  return out;
}

InstrumentMode parse_mode(const std::string& s) {
  if (s == "z_only" || s == "z") return InstrumentMode::z_only;
  if (s == "w_only" || s == "w") return InstrumentMode::w_only;
  if (s == "z_and_w" || s == "zw") return InstrumentMode::z_and_w;
  throw ConfigError("unknown instrument mode '" + s + "'");
}

std::string to_string(InstrumentMode m) {
  switch (m) {
    case InstrumentMode::z_only:
      return "z_only";
    case InstrumentMode::w_only:
      return "w_only";
    case InstrumentMode::z_and_w:
      return "z_and_w";
  }
  return "?";
}

Restriction parse_restriction(const std::string& kind, double a0, double a1) {
  using D = MonotoneMisreporting::Direction;
  if (kind == "none" || kind.empty()) return Unrestricted{};
  if (kind == "one_sided_alpha0") return OneSided{OneSided::Side::no_false_positives};
  if (kind == "one_sided_alpha1") return OneSided{OneSided::Side::no_false_negatives};
  if (kind == "bounded") return BoundedMisreporting{a0, a1};
  if (kind == "monotone_a0_le_a1") return MonotoneMisreporting{D::a0_le_a1};
  if (kind == "monotone_a1_le_a0") return MonotoneMisreporting{D::a1_le_a0};
  throw ConfigError("unknown restriction '" + kind + "'");
}

namespace {

nlohmann::json restriction_to_json(const Restriction& r) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Unrestricted>) return {{"kind", "none"}};
        if constexpr (std::is_same_v<T, OneSided>)
          return {{"kind", v.side == OneSided::Side::no_false_positives ? "one_sided_alpha0"
                                                                        : "one_sided_alpha1"}};
        if constexpr (std::is_same_v<T, BoundedMisreporting>)
          return {{"kind", "bounded"}, {"a0_bar", v.a0_bar}, {"a1_bar", v.a1_bar}};
        if constexpr (std::is_same_v<T, MonotoneMisreporting>)
          return {{"kind", v.direction == MonotoneMisreporting::Direction::a0_le_a1
                               ? "monotone_a0_le_a1"
                               : "monotone_a1_le_a0"}};
        return {};
      },
      r);
}

}  // namespace

DiscreteInstance instance_from_json(const nlohmann::json& j) {
  try {
    DiscreteInstance inst;
    inst.mode = parse_mode(j.at("mode").get<std::string>());
    inst.n_z = j.value("n_z", std::size_t{1});
    inst.n_w = j.value("n_w", std::size_t{1});
    inst.step = j.value("step", 0.01);
    inst.cells = j.at("cells").get<std::vector<std::vector<double>>>();
    if (j.contains("restriction")) {
      const auto& r = j["restriction"];
      inst.restriction = parse_restriction(r.value("kind", std::string("none")),
                                           r.value("a0_bar", 1.0), r.value("a1_bar", 1.0));
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

nlohmann::json instance_to_json(const DiscreteInstance& inst) {
  return {{"mode", to_string(inst.mode)}, {"n_z", inst.n_z},          {"n_w", inst.n_w},
          {"step", inst.step},            {"cells", inst.cells},      {"restriction", restriction_to_json(inst.restriction)}};
}

}  // namespace misreport
