#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "misreport/bounds.hpp"

namespace misreport {

// A finite instance: for each x~-cell a table of reported probabilities
// p[z * n_w + w]. Z-only instances have n_w = 1, W-only instances n_z = 1.
struct DiscreteInstance {
  InstrumentMode mode = InstrumentMode::z_only;
  std::size_t n_z = 1;
  std::size_t n_w = 1;
  std::vector<std::vector<double>> cells;
  Restriction restriction = Unrestricted{};
  double step = 0.01;

  double p(std::size_t cell, std::size_t z, std::size_t w) const {
    return cells[cell][z * n_w + w];
  }
  void validate() const;  // throws ConfigError / DataError
  // Exact-probability table with uniform mass, for the closed-form bounds.
  CondProbTable to_table() const;
  AssumptionSet assumptions() const { return {mode, restriction}; }
};

struct OracleInterval {
  double lower = 1.0;
  double upper = 0.0;
  bool feasible = false;
};

// Per cell, one interval per z (n_z entries).
struct OracleResult {
  std::vector<std::vector<OracleInterval>> cells;
  std::uint64_t work = 0;
};

inline constexpr std::uint64_t kDefaultOracleBudget = 50'000'000;

// Enumerates witnesses (alpha0, alpha1, p*) on the step grid that satisfy the
// instance's assumptions and reproduce p within step/2 at every cell, and
// returns the min and max feasible p* per evaluation point. Throws
// BudgetExceeded once more than `budget` candidate checks would be needed.
//
// Work: Z-only O(N^2 n_z); W-only O(N^3 n_w); Z-and-W O(N^(2 n_w) n_z) before
// pruning, with N = 1/step.
OracleResult brute_force_prob_bounds(const DiscreteInstance& inst,
                                     std::uint64_t budget = kDefaultOracleBudget);

// Misreporting probabilities and true probabilities for one x~-cell, laid out
// like the instance table ([z * n_w + w]).
struct Witness {
  std::size_t n_z = 1;
  std::size_t n_w = 1;
  std::vector<double> alpha0;
  std::vector<double> alpha1;
  std::vector<double> p_star;
};

enum class WitnessMethod { z_instrument, w_instrument_binary, one_sided, two_instruments_binary_w };
enum class Endpoint { lower, upper };

// The explicit construction attaining one endpoint of the closed-form
// interval at every evaluation point of the cell. Throws DataError when the
// construction's preconditions fail on this cell.
Witness construct_sharpness_witness(const DiscreteInstance& inst, std::size_t cell,
                                    WitnessMethod method, Endpoint which);

struct WitnessReport {
  std::vector<std::string> failures;
  bool pass() const { return failures.empty(); }
};

inline constexpr double kWitnessTol = 1e-12;

WitnessReport verify_witness(const Witness& w, const DiscreteInstance& inst, std::size_t cell);

// Thresholds that keep randomly drawn instances away from the regions where
// the step/2 tolerance on the reporting identity is amplified by small
// denominators.
//
// The oracle accepts any table within step/2 of the reported one, so its
// extremes differ from the closed form by about step/2 times the l1-norm of
// the closed-form gradient in the table entries. `max_sensitivity` bounds
// that norm (estimated by one-sided finite differences).
struct Conditioning {
  double min_signal = 0.3;        // 1 - alpha0 - alpha1 at every cell
  double min_spread = 0.3;        // max z-spread of p* (two instruments)
  double min_q1_gap = 0.2;        // q1 - 1 at adjacent W levels (two instruments)
  double max_sensitivity = 3.5;
};

// Largest l1-norm over evaluation points of the gradient of L and U with
// respect to the instance table.
double bound_sensitivity(const DiscreteInstance& inst);

struct GeneratedInstance {
  DiscreteInstance instance;
  Witness truth;  // on the grid, so the oracle can find it exactly
};

// Draws a one-cell instance whose generating process satisfies the mode's
// assumptions and the restriction, by rejection under `cond`.
GeneratedInstance random_instance(InstrumentMode mode, const Restriction& restriction,
                                  std::size_t n_z, std::size_t n_w, std::mt19937_64& rng,
                                  double step = 0.01, const Conditioning& cond = {});

// Reported table of a witness.
std::vector<double> reported_from_witness(const Witness& w);

}  // namespace misreport
