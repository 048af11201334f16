#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "misreport/bounds.hpp"
#include "misreport/data.hpp"
#include "misreport/has.hpp"
#include "misreport/moments.hpp"
#include "misreport/setest.hpp"

namespace misreport {

// z_design: instrument Z only; w_design: instrument W only; two_instruments:
// Z in the outcome equation and W in the misreporting process.
enum class Design { z_design, w_design, two_instruments };
enum class ErrorLaw { normal, cauchy };  // N(0, 1) and Cauchy(0, 0.5)

std::string to_string(Design d);
std::string to_string(ErrorLaw e);
Design parse_design(const std::string& s);
ErrorLaw parse_error_law(const std::string& s);

LinkFunction error_link(ErrorLaw e);
std::vector<double> true_beta(Design d);
InstrumentMode design_mode(Design d);

// P(M0 = 0) and P(M1 = 0): false positive and false negative probabilities.
struct Rates {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
};

Rates rates_z(double xt);
Rates rates_w(double xt, double w);
Rates rates_two(double xt, double w);
Rates design_rates(Design d, double xt, double w);

const std::vector<double>& z_support();  // {-1, -0.5, 0, 0.5, 1}
const std::vector<double>& w_support(Design d);

struct DgpConfig {
  Design design = Design::z_design;
  std::size_t n = 1000;
  ErrorLaw error = ErrorLaw::normal;
  std::uint64_t seed = 1;
};

// Samples carry the latent outcome and reporting indicators.
Sample dgp_z(const DgpConfig& c);
Sample dgp_w(const DgpConfig& c);
Sample dgp_two(const DgpConfig& c);
Sample generate(const DgpConfig& c);

// Hypercube count used at sample size n: 500 -> 30, 1000 -> 40, 2000 -> 50,
// nearest key otherwise.
std::size_t hypercubes_for(std::size_t n, const std::map<std::size_t, std::size_t>& mapping);
std::map<std::size_t, std::size_t> default_hypercube_mapping();

struct McConfig {
  std::vector<Design> designs = {Design::z_design, Design::w_design};
  std::vector<ErrorLaw> errors = {ErrorLaw::normal, ErrorLaw::cauchy};
  std::vector<std::size_t> sizes = {500, 1000, 2000};
  std::size_t replications = 100;
  std::uint64_t seed = 20240101;
  ModelSpec model;  // semiparametric, first coefficient fixed at one
  GridAxis axis;
  double kappa = 1.0;
  std::size_t envelope_bins = 5;
  std::size_t min_cell_count = 10;
  std::map<std::size_t, std::size_t> hypercubes = default_hypercube_mapping();
  HasOptions has;
  bool run_has = true;
};

// One estimator's statistics for one coefficient in one cell of the design.
struct McRow {
  Design design = Design::z_design;
  ErrorLaw error = ErrorLaw::normal;
  std::size_t n = 0;
  std::size_t coordinate = 0;
  std::string estimator;  // "semi_lower", "semi_upper", "has"
  double truth = 0.0;
  McStat stat;
};

struct McReport {
  std::size_t replications = 0;
  std::vector<McRow> rows;
  std::vector<std::string> failures;  // one line per failed replication
  const McRow* find(Design d, ErrorLaw e, std::size_t n, std::size_t coordinate,
                    const std::string& estimator) const;
};

// Replications run in parallel with one generator each; rows are reported in
// a fixed order. HAS coefficients are rescaled so the normalized coordinate
// equals its fixed value before they are compared with the truth.
McReport run_monte_carlo(const McConfig& config);

void write_mc_csv(std::ostream& out, const McReport& report);
nlohmann::json mc_to_json(const McReport& report);
// One table per design and coefficient with rMSE and MAD of the lower and
// upper endpoints and of HAS, grouped by sample size.
void format_mc_tables(std::ostream& out, const McReport& report);

// Exact reported and true probabilities of a design on x~-cells of equal
// width, averaged over x~ within each cell by Gauss-Legendre quadrature.
struct PopulationTable {
  Design design = Design::z_design;
  ErrorLaw error = ErrorLaw::normal;
  CondProbTable table;
  std::vector<std::vector<double>> p_star;  // [cell][z]
  std::vector<double> cell_lower, cell_upper;
};

inline constexpr std::size_t kPopulationNodes = 10000;

PopulationTable population_table(Design d, ErrorLaw e, std::size_t cells = 20,
                                 std::size_t nodes = kPopulationNodes);

// Population expectations E[g_k | cell] of the moment functions at beta, with
// the envelopes evaluated at each x~ (exact nuisance functions). Cells are
// x~-intervals crossed with the instrument levels of the design's mode.
struct PopulationMoments {
  std::string model;  // "parametric" or "semiparametric"
  std::vector<std::array<double, 2>> expectations;  // per conditioning cell
  std::vector<std::string> cell_labels;
  double min_value() const;
};

PopulationMoments population_moments(Design d, ErrorLaw e, const ModelSpec& model,
                                     std::span<const double> beta, std::size_t cells = 10,
                                     std::size_t nodes = 2000);

}  // namespace misreport
