#include "misreport/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "misreport/errors.hpp"

namespace misreport {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Caps on (alpha0, alpha1) given the unrestricted caps implied by the
// instrument envelopes at one evaluation point.
struct Caps {
  double c0;
  double c1;
};

Caps restrict_caps(Caps base, const Restriction& r) {
  return std::visit(
      [&](const auto& v) -> Caps {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Unrestricted>) {
          return base;
        } else if constexpr (std::is_same_v<T, OneSided>) {
          if (v.side == OneSided::Side::no_false_positives) return {0.0, base.c1};
          return {base.c0, 0.0};
        } else if constexpr (std::is_same_v<T, BoundedMisreporting>) {
          return {std::min(base.c0, v.a0_bar), std::min(base.c1, v.a1_bar)};
        } else {
          if (v.direction == MonotoneMisreporting::Direction::a0_le_a1)
            return {std::min(base.c0, base.c1), base.c1};
          return {base.c0, std::min(base.c1, base.c0)};
        }
      },
      r);
}

std::string restriction_tag(const Restriction& r) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Unrestricted>) {
          return "";
        } else if constexpr (std::is_same_v<T, OneSided>) {
          return v.side == OneSided::Side::no_false_positives ? "+one_sided(alpha0=0)"
                                                              : "+one_sided(alpha1=0)";
        } else if constexpr (std::is_same_v<T, BoundedMisreporting>) {
          return "+bounded(a0_bar=" + fmt(v.a0_bar) + ",a1_bar=" + fmt(v.a1_bar) + ")";
        } else {
          return v.direction == MonotoneMisreporting::Direction::a0_le_a1
                     ? "+monotone(alpha0<=alpha1)"
                     : "+monotone(alpha1<=alpha0)";
        }
      },
      r);
}

std::optional<double> level_value(bool present, const std::vector<double>& levels,
                                  std::size_t i) {
  if (!present) return std::nullopt;
  return levels[i];
}

ProbBounds z_bounds(const CondProbTable& t, const EnvelopeZ& env, const Restriction& r) {
  if (!t.has_z()) throw DataError("bounds with instrument Z need a Z column");
  ProbBounds out;
  out.method = "z_instrument" + restriction_tag(r);
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const auto& e = env.cells[c];
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      const auto& m = t.marginal(c, z);
      BoundRow row;
      row.cell = c;
      row.z = z;
      row.z_value = t.z_levels()[z];
      row.p = m.p;
      if (!m.included) {
        row.flags |= flag::excluded | flag::undefined;
        out.rows.push_back(row);
        continue;
      }
      if (!e.defined) {
        row.flags |= flag::undefined;
        out.rows.push_back(row);
        continue;
      }
      if (e.upper < kDenominatorEps || e.lower > 1.0 - kDenominatorEps) {
        row.flags |= flag::boundary_violated;
        row.lower = 0.0;
        row.upper = 1.0;
        row.defined = true;
        out.rows.push_back(row);
        continue;
      }
      Caps caps = restrict_caps({e.lower, 1.0 - e.upper}, r);
      row.lower = lower_from_cap(m.p, caps.c0);
      row.upper = upper_from_cap(m.p, caps.c1);
      row.defined = true;
      row.binding_lower = caps.c0 == e.lower ? "z=" + fmt(t.z_levels()[e.argmin]) : "restriction";
      row.binding_upper =
          caps.c1 == 1.0 - e.upper ? "z=" + fmt(t.z_levels()[e.argmax]) : "restriction";
      out.rows.push_back(row);
    }
  }
  return out;
}

ProbBounds w_bounds(const CondProbTable& t, const EnvelopeW& env, const Restriction& r) {
  if (!t.has_w()) throw DataError("bounds with instrument W need a W column");
  ProbBounds out;
  out.method = "w_instrument" + restriction_tag(r);
  for (std::size_t c = 0; c < t.cell_count(); ++c)
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      BoundRow row;
      row.cell = c;
      row.z = z;
      row.z_value = level_value(t.has_z(), t.z_levels(), z);
      row.p = t.marginal(c, z).p;
      double lo = 0.0, hi = 1.0;
      bool any = false;
      for (std::size_t w = 0; w < t.w_count(); ++w) {
        const auto& f = t.at(c, z, w);
        if (!f.included) continue;
        const auto& e = env.at(c, z, w);
        if (f.p <= 0.0 || f.p >= 1.0) row.flags |= flag::boundary_violated;
        Caps caps = restrict_caps({e.lower, 1.0 - e.upper}, r);
        double l = lower_from_cap(f.p, caps.c0);
        double u = upper_from_cap(f.p, caps.c1);
        if (!any || l > lo) {
          lo = l;
          row.binding_lower = "w=" + fmt(t.w_levels()[w]);
        }
        if (!any || u < hi) {
          hi = u;
          row.binding_upper = "w=" + fmt(t.w_levels()[w]);
        }
        any = true;
      }
      if (!any) {
        row.flags |= flag::undefined | flag::excluded;
        out.rows.push_back(row);
        continue;
      }
      row.lower = lo;
      row.upper = hi;
      row.defined = true;
      if (row.lower > row.upper) row.flags |= flag::testable_implication_violated;
      out.rows.push_back(row);
    }
  return out;
}

}  // namespace

void AssumptionSet::validate() const {
  if (auto b = std::get_if<BoundedMisreporting>(&restriction)) {
    if (!(b->a0_bar >= 0.0 && b->a0_bar <= 1.0) || !(b->a1_bar >= 0.0 && b->a1_bar <= 1.0))
      throw ConfigError("misreporting caps must lie in [0,1]");
  }
  if (mode == InstrumentMode::z_and_w && !std::holds_alternative<Unrestricted>(restriction))
    throw ConfigError("restrictions are not combined with the two-instrument bounds");
}

std::string AssumptionSet::describe() const {
  std::string m = mode == InstrumentMode::z_only   ? "z_instrument"
                  : mode == InstrumentMode::w_only ? "w_instrument"
                                                   : "two_instruments";
  return m + restriction_tag(restriction);
}

std::string flags_to_string(std::uint32_t f) {
  static const std::pair<std::uint32_t, const char*> names[] = {
      {flag::undefined, "undefined"},
      {flag::boundary_violated, "boundary_condition_violated"},
      {flag::testable_implication_violated, "testable_implication_violated"},
      {flag::degenerate_denominator, "degenerate_denominator"},
      {flag::instrument_irrelevant, "instrument_z_irrelevant"},
      {flag::relevance_implication_violated, "monotonicity_relevance_implication_violated"},
      {flag::monotonicity_violated, "w_monotonicity_violated"},
      {flag::excluded, "excluded"},
  };
  std::string out;
  for (const auto& [bit, name] : names)
    if (f & bit) {
      if (!out.empty()) out.push_back('|');
      out += name;
    }
  return out;
}

std::uint32_t flags_from_string(const std::string& s) {
  std::uint32_t f = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto end = s.find('|', pos);
    if (end == std::string::npos) end = s.size();
    auto tok = s.substr(pos, end - pos);
    bool found = false;
    for (std::uint32_t bit = 1; bit <= flag::excluded; bit <<= 1)
      if (flags_to_string(bit) == tok) {
        f |= bit;
        found = true;
      }
    if (!found) throw DataError("unknown flag '" + tok + "'");
    pos = end + 1;
  }
  return f;
}

double lower_from_cap(double p, double c0) {
  double den = 1.0 - c0;
  if (den < kDenominatorEps) return 1.0;
  return clip01((p - c0) / den);
}

double upper_from_cap(double p, double c1) {
  double den = 1.0 - c1;
  if (den < kDenominatorEps) return 1.0;
  return clip01(p / den);
}

ProbBounds bounds_instrument_z(const CondProbTable& t, const EnvelopeZ& env) {
  return z_bounds(t, env, Unrestricted{});
}

ProbBounds bounds_instrument_w(const CondProbTable& t, const EnvelopeW& env) {
  return w_bounds(t, env, Unrestricted{});
}

ProbBounds apply_restriction(const CondProbTable& t, const AssumptionSet& a) {
  a.validate();
  switch (a.mode) {
    case InstrumentMode::z_only:
      return z_bounds(t, envelopes_z(t), a.restriction);
    case InstrumentMode::w_only:
      return w_bounds(t, envelopes_w(t), a.restriction);
    case InstrumentMode::z_and_w:
      break;
  }
  // exact probability tables carry no sampling noise
  const double tau = t.min_cell_count() == 0.0 ? 0.0 : kDefaultRelevanceTau;
  return bounds_two_instruments(two_instrument_diagnostics(t, tau), t);
}

TwoInstrumentDiagnostics two_instrument_diagnostics(const CondProbTable& t, double tau) {
  if (!t.has_z() || !t.has_w()) throw DataError("two-instrument bounds need both Z and W");
  if (t.w_count() < 2) throw DataError("two-instrument bounds need at least two W levels");
  if (t.z_count() < 2) throw DataError("instrument Z irrelevant: fewer than two Z values");
  TwoInstrumentDiagnostics d;
  d.tau = tau;
  d.w_m = t.w_count() - 1;
  d.cells.resize(t.cell_count());
  bool any_relevant = false;
  const std::size_t wm = d.w_m;
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    auto& cell = d.cells[c];
    double sup_term = -std::numeric_limits<double>::infinity();
    double inf_term = std::numeric_limits<double>::infinity();
    bool have_wm = false;
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      const auto& f = t.at(c, z, wm);
      if (!f.included) continue;
      have_wm = true;
      sup_term = std::max(sup_term, f.p);
      inf_term = std::min(inf_term, f.p);
    }
    if (!have_wm) {
      cell.flags |= flag::undefined | flag::excluded;
      continue;
    }
    bool cell_relevant = false;
    for (std::size_t w = 0; w < wm; ++w) {
      PairDiagnostic pd;
      pd.w = w;
      // widest included pair at the conditioning level
      bool found = false;
      for (std::size_t a = 0; a < t.z_count(); ++a)
        for (std::size_t b = 0; b < t.z_count(); ++b) {
          if (a == b) continue;
          const auto &fa = t.at(c, a, w), &fb = t.at(c, b, w);
          if (!fa.included || !fb.included || !t.at(c, a, wm).included ||
              !t.at(c, b, wm).included)
            continue;
          double s = fa.p - fb.p;
          if (!found || s > pd.spread) {
            pd.spread = s;
            pd.z1 = a;
            pd.z2 = b;
            found = true;
          }
        }
      if (!found || !(pd.spread > tau) || pd.spread <= 0.0) {
        cell.pairs.push_back(pd);
        continue;
      }
      pd.relevant = true;
      cell_relevant = true;
      const double p1w = t.at(c, pd.z1, w).p, p2w = t.at(c, pd.z2, w).p;
      const double p1m = t.at(c, pd.z1, wm).p, p2m = t.at(c, pd.z2, wm).p;
      pd.q1 = (p1m - p2m) / (p1w - p2w);
      pd.q0 = pd.q1 * p1w - p1m;
      double qmin = pd.q0, qmax = pd.q0;
      for (std::size_t z = 0; z < t.z_count(); ++z) {
        if (!t.at(c, z, w).included || !t.at(c, z, wm).included) continue;
        double q0z = pd.q1 * t.at(c, z, w).p - t.at(c, z, wm).p;
        qmin = std::min(qmin, q0z);
        qmax = std::max(qmax, q0z);
      }
      pd.overid_residual = qmax - qmin;
      if (pd.q1 <= 1.0) {
        pd.q1_violated = true;
        cell.flags |= flag::relevance_implication_violated;
      } else {
        pd.ratio = pd.q0 / (pd.q1 - 1.0);
        sup_term = std::max(sup_term, *pd.ratio);
        inf_term = std::min(inf_term, *pd.ratio);
      }
      cell.pairs.push_back(pd);
    }
    if (!cell_relevant) {
      cell.flags |= flag::instrument_irrelevant | flag::undefined;
      continue;
    }
    any_relevant = true;
    cell.u_alpha1 = clip01(1.0 - sup_term);
    cell.u_alpha0 = clip01(inf_term);
    cell.defined = true;
    if (cell.u_alpha1 >= 1.0 - kDenominatorEps || cell.u_alpha0 >= 1.0 - kDenominatorEps)
      cell.flags |= flag::degenerate_denominator;
  }
  if (!any_relevant)
    throw DataError("instrument Z irrelevant: no z-pair spread exceeds tau in any cell");
  return d;
}

ProbBounds bounds_two_instruments(const TwoInstrumentDiagnostics& d, const CondProbTable& t) {
  ProbBounds out;
  out.method = "two_instruments";
  const std::size_t wm = d.w_m;
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    const auto& cell = d.cells.at(c);
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      BoundRow row;
      row.cell = c;
      row.z = z;
      row.z_value = t.z_levels()[z];
      row.w_value = t.w_levels()[wm];
      const auto& f = t.at(c, z, wm);
      row.p = f.p;
      row.flags = cell.flags;
      if (!cell.defined || !f.included) {
        row.flags |= flag::undefined;
        if (!f.included) row.flags |= flag::excluded;
        out.rows.push_back(row);
        continue;
      }
      row.lower = lower_from_cap(f.p, cell.u_alpha0);
      row.upper = upper_from_cap(f.p, cell.u_alpha1);
      row.defined = true;
      row.binding_lower = "U_alpha0=" + fmt(cell.u_alpha0);
      row.binding_upper = "U_alpha1=" + fmt(cell.u_alpha1);
      if (row.lower > row.upper) row.flags |= flag::testable_implication_violated;
      out.rows.push_back(row);
    }
  }
  return out;
}

ImplicationReport check_testable_implications(ProbBounds& b, const CondProbTable& t,
                                              const AssumptionSet& a, double tol) {
  ImplicationReport rep;
  for (auto& row : b.rows) {
    if (!row.defined) continue;
    if (row.lower > row.upper + tol) {
      row.flags |= flag::testable_implication_violated;
      std::ostringstream os;
      os << "L=" << row.lower << " > U=" << row.upper;
      std::string check = a.mode == InstrumentMode::w_only
                              ? "w_monotonicity (bounds cross: L > U)"
                              : "bounds cross (L > U)";
      rep.issues.push_back({row.cell, row.z, check, os.str()});
    }
  }
  auto one = std::get_if<OneSided>(&a.restriction);
  if (one && t.has_w()) {
    // alpha0 = 0 forces p_W non-decreasing in w; alpha1 = 0 forces non-increasing
    const bool up = one->side == OneSided::Side::no_false_positives;
    for (std::size_t c = 0; c < t.cell_count(); ++c)
      for (std::size_t z = 0; z < t.z_count(); ++z) {
        std::optional<double> prev;
        std::optional<double> prev_w;
        for (std::size_t w = 0; w < t.w_count(); ++w) {
          const auto& f = t.at(c, z, w);
          if (!f.included) continue;
          if (prev && (up ? f.p < *prev - tol : f.p > *prev + tol)) {
            std::ostringstream os;
            os << "p_W " << (up ? "decreases" : "increases") << " from w=" << *prev_w
               << " to w=" << t.w_levels()[w];
            rep.issues.push_back({c, z, "w_monotonicity (one-sided)", os.str()});
            for (auto& row : b.rows)
              if (row.cell == c && row.z == z) row.flags |= flag::monotonicity_violated;
          }
          prev = f.p;
          prev_w = t.w_levels()[w];
        }
      }
  }
  return rep;
}

}  // namespace misreport
