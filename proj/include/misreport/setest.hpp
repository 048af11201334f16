#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "misreport/kernels.hpp"
#include "misreport/moments.hpp"

namespace misreport {

struct GridAxis {
  double lower = -5.0;
  double upper = 5.0;
  double step = 0.1;

  std::size_t size() const;  // points lower, lower + step, ... up to upper (inclusive, rounded)
  double at(std::size_t i) const { return lower + static_cast<double>(i) * step; }
};

inline constexpr std::size_t kDefaultGridBudget = 5'000'000;

// Grid over the free coordinates of beta; the normalized coordinate is held
// at its fixed value.
struct BetaGrid {
  std::size_t dim = 0;
  std::size_t norm_index = 0;
  double norm_value = 1.0;
  std::vector<GridAxis> axes;  // one per free coordinate, in ascending coordinate order

  static BetaGrid uniform(std::size_t dim, const ModelSpec& model, GridAxis axis);
  void validate(std::size_t budget = kDefaultGridBudget) const;  // throws ConfigError
  std::size_t size() const;
  // Full coefficient vector at a flattened grid index (last free axis fastest).
  void point(std::size_t flat, std::span<double> beta) const;
  std::vector<double> point(std::size_t flat) const;
};

struct IdentifiedSet {
  std::vector<double> q;               // criterion at every grid point
  std::vector<std::uint8_t> accepted;  // q <= cutoff
  double min_q = 0.0;
  double cutoff = 0.0;
  double kappa = 1.0;
  std::size_t n = 0;
  std::size_t accepted_count = 0;
  std::size_t empty_cubes = 0;  // at the minimizing point
  std::vector<double> lower;    // per coordinate, min over accepted points
  std::vector<double> upper;
};

// Accepts grid points with Q(beta) <= min Q + kappa log(n) / n. Grid points
// are evaluated in parallel; the result does not depend on the thread count.
IdentifiedSet estimate_identified_set(const CriterionData& data, const ModelSpec& model,
                                      const BetaGrid& grid, double kappa = 1.0,
                                      const KernelTable& kernels = active_kernels());

// Frequency table, envelopes and cube family from a sample in one step.
struct SetEstimationSetup {
  std::size_t envelope_bins = 5;   // x~ bins per continuous covariate for the plug-in table
  std::size_t min_cell_count = 10;
  std::size_t hypercubes = 30;
};

CriterionData prepare_sample(const Sample& sample, InstrumentMode mode,
                             const SetEstimationSetup& setup);

void write_set_csv(std::ostream& out, const BetaGrid& grid, const IdentifiedSet& set,
                   std::span<const std::string> names = {});
nlohmann::json set_to_json(const BetaGrid& grid, const IdentifiedSet& set,
                           std::span<const std::string> names = {});

// rMSE and MAD of replicated estimates of one coordinate against its truth.
// Replications without an estimate count as failures and are left out.
struct McStat {
  double rmse = 0.0;
  double mad = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

McStat mc_metrics(std::span<const std::optional<double>> estimates, double truth);

}  // namespace misreport
