#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "misreport/bounds.hpp"
#include "misreport/data.hpp"
#include "misreport/kernels.hpp"

namespace misreport {

enum class LinkKind { normal, logistic, cauchy };

// Error distribution F of the binary choice model.
struct LinkFunction {
  LinkKind kind = LinkKind::normal;
  double location = 0.0;
  double scale = 1.0;

  double operator()(double t) const;
  double density(double t) const;
  std::string name() const;

  static LinkFunction normal() { return {}; }
  static LinkFunction logistic() { return {LinkKind::logistic, 0.0, 1.0}; }
  static LinkFunction cauchy(double location, double scale) {
    return {LinkKind::cauchy, location, scale};
  }
  static LinkFunction parse(const std::string& s);  // "normal", "logistic", "cauchy[(loc,scale)]"
};

enum class ModelKind { parametric, semiparametric };

struct ModelSpec {
  ModelKind kind = ModelKind::semiparametric;
  LinkFunction link;            // parametric only
  std::size_t norm_index = 0;   // coefficient held fixed
  double norm_value = 1.0;

  void validate(std::size_t dim) const;  // throws ConfigError
  std::vector<std::size_t> free_coordinates(std::size_t dim) const;
};

// One observation as the moment functions see it: full covariate vector x
// (matching beta) and the bound envelopes at its conditioning cell.
struct Observation {
  double y = 0.0;
  std::vector<double> x;
  double upper = 1.0;  // p_upper: sup-envelope of reported probabilities
  double lower = 0.0;  // p_lower: inf-envelope
};

std::array<double, 2> moment_parametric(const Observation& obs, std::span<const double> beta,
                                        const LinkFunction& link);
std::array<double, 2> moment_semiparametric(const Observation& obs,
                                            std::span<const double> beta);

// Columns [1, x~_1..x~_d, z (when present)], stored column-major.
struct DesignMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;
  std::vector<std::string> names;

  const double* column(std::size_t k) const { return values.data() + k * n; }
  double at(std::size_t i, std::size_t k) const { return values[k * n + i]; }
};

DesignMatrix design_matrix(const Sample& sample);

// Envelope values attached to each observation. Z mode uses the envelopes
// over z of its x~-cell; W mode the running envelopes at (x~-cell, z, w).
struct ObservationEnvelopes {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<std::uint8_t> defined;
  std::size_t undefined_count = 0;
};

ObservationEnvelopes observation_envelopes(const Sample& sample, const Binning& binning,
                                           const CondProbTable& table, InstrumentMode mode);

// Partition of the conditioning space into hypercubes: equal-mass intervals
// on continuous covariates crossed with the levels of discrete covariates and
// of the instruments used by the mode.
struct InstrumentalFunctions {
  Binning covariate_bins;
  std::size_t discrete_levels = 1;  // product of instrument level counts
  std::size_t requested = 0;
  std::size_t realized = 0;         // number of cubes in the family
  std::vector<std::size_t> cube_of;  // per observation
  std::vector<std::size_t> counts;   // observations per cube
};

// Covariate dimensions with at most this many distinct values are treated as
// discrete and crossed level by level.
inline constexpr std::size_t kDiscreteCovariateLevels = 10;

InstrumentalFunctions build_hypercubes(const Sample& sample, std::size_t count,
                                       InstrumentMode mode);

// Observations reordered by cube, structure-of-arrays, with frozen envelopes.
struct CriterionData {
  std::size_t n = 0;  // observations used
  std::size_t p = 0;
  std::size_t excluded = 0;  // observations with undefined envelopes
  std::vector<double> x;     // column-major n x p
  std::vector<double> y;
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<std::size_t> offsets;  // cube j holds rows [offsets[j], offsets[j+1])
};

CriterionData prepare_criterion(std::span<const std::uint8_t> y, const DesignMatrix& design, const ObservationEnvelopes& env,
                                const InstrumentalFunctions& cubes);

struct CriterionWorkspace {
  std::vector<double> idx, f, g1, g2;
};

struct CriterionValue {
  double q = 0.0;
  std::size_t empty_cubes = 0;
};

// Q(beta) = sum over cubes j and components k of max(-mean_jk / sd_jk, 0)^2,
// where mean and sd are over all n observations of g_k 1{cube j}.
CriterionValue criterion(std::span<const double> beta, const CriterionData& data,
                         const ModelSpec& model, CriterionWorkspace& ws,
                         const KernelTable& kernels = active_kernels());

inline constexpr double kSdFloor = 1e-6;

// The same sum from precomputed cube means and standard deviations.
double criterion_from_stats(std::span<const double> means, std::span<const double> sds);

}  // namespace misreport
