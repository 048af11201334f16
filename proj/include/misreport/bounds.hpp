#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "misreport/data.hpp"

namespace misreport {

enum class InstrumentMode { z_only, w_only, z_and_w };

struct Unrestricted {};

// Exactly one of the two misreporting probabilities is identically zero.
struct OneSided {
  enum class Side { no_false_positives, no_false_negatives };  // alpha0 = 0 / alpha1 = 0
  Side side = Side::no_false_positives;
};

// Known caps: alpha0 <= a0_bar, alpha1 <= a1_bar.
struct BoundedMisreporting {
  double a0_bar = 1.0;
  double a1_bar = 1.0;
};

struct MonotoneMisreporting {
  enum class Direction { a0_le_a1, a1_le_a0 };
  Direction direction = Direction::a0_le_a1;
};

using Restriction =
    std::variant<Unrestricted, OneSided, BoundedMisreporting, MonotoneMisreporting>;

struct AssumptionSet {
  InstrumentMode mode = InstrumentMode::z_only;
  Restriction restriction = Unrestricted{};

  void validate() const;  // throws ConfigError
  std::string describe() const;
};

namespace flag {
inline constexpr std::uint32_t undefined = 1u << 0;
inline constexpr std::uint32_t boundary_violated = 1u << 1;
inline constexpr std::uint32_t testable_implication_violated = 1u << 2;
inline constexpr std::uint32_t degenerate_denominator = 1u << 3;
inline constexpr std::uint32_t instrument_irrelevant = 1u << 4;
inline constexpr std::uint32_t relevance_implication_violated = 1u << 5;
inline constexpr std::uint32_t monotonicity_violated = 1u << 6;
inline constexpr std::uint32_t excluded = 1u << 7;
}  // namespace flag

std::string flags_to_string(std::uint32_t flags);
std::uint32_t flags_from_string(const std::string& s);

// Bounds for p*(x) at one evaluation point x = (x~-cell, z). `w` is set when
// the row is evaluated at a particular W level (two instruments use w_m).
struct BoundRow {
  std::size_t cell = 0;
  std::size_t z = 0;
  std::optional<double> z_value;
  std::optional<double> w_value;
  double p = 0.0;  // reported probability the bounds are built from
  double lower = 0.0;
  double upper = 1.0;
  bool defined = false;
  std::uint32_t flags = 0;
  std::string binding_lower;  // envelope term attaining the lower bound
  std::string binding_upper;
};

struct ProbBounds {
  std::string method;
  std::vector<BoundRow> rows;
};

inline constexpr double kDenominatorEps = 1e-12;

// Lower/upper bound implied by caps c0 >= alpha0 and c1 >= alpha1 on the
// reporting identity p = (1 - alpha1) p* + alpha0 (1 - p*).
double lower_from_cap(double p, double c0);
double upper_from_cap(double p, double c1);

ProbBounds bounds_instrument_z(const CondProbTable& table, const EnvelopeZ& env);
ProbBounds bounds_instrument_w(const CondProbTable& table, const EnvelopeW& env);
// Dispatches on the restriction variant; the mode must be z_only or w_only.
ProbBounds apply_restriction(const CondProbTable& table, const AssumptionSet& assumptions);

struct PairDiagnostic {
  std::size_t w = 0;  // conditioning level (index, < w_m)
  std::size_t z1 = 0, z2 = 0;
  double spread = 0.0;
  double q1 = 0.0;
  double q0 = 0.0;
  std::optional<double> ratio;  // q0 / (q1 - 1) when q1 > 1
  double overid_residual = 0.0;
  bool relevant = false;
  bool q1_violated = false;
};

struct TwoInstrumentCell {
  std::vector<PairDiagnostic> pairs;
  double u_alpha1 = 1.0;
  double u_alpha0 = 1.0;
  bool defined = false;
  std::uint32_t flags = 0;
};

struct TwoInstrumentDiagnostics {
  std::size_t w_m = 0;  // index of the largest W level
  double tau = 0.0;
  std::vector<TwoInstrumentCell> cells;
};

inline constexpr double kDefaultRelevanceTau = 0.02;

// Throws DataError("instrument Z irrelevant") when no cell has a z-pair whose
// spread clears tau.
TwoInstrumentDiagnostics two_instrument_diagnostics(const CondProbTable& table,
                                                    double tau = kDefaultRelevanceTau);
ProbBounds bounds_two_instruments(const TwoInstrumentDiagnostics& diag,
                                  const CondProbTable& table);

struct ImplicationIssue {
  std::size_t cell = 0;
  std::size_t z = 0;
  std::string check;
  std::string detail;
};

struct ImplicationReport {
  std::vector<ImplicationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Flags rows with U < L (beyond tol) and, for one-sided restrictions with W,
// reported probabilities that move in w against the implied direction.
ImplicationReport check_testable_implications(ProbBounds& bounds, const CondProbTable& table,
                                              const AssumptionSet& assumptions,
                                              double tol = 0.0);

}  // namespace misreport
