#include "misreport/setest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "misreport/csv.hpp"
#include "misreport/errors.hpp"

namespace misreport {

std::size_t GridAxis::size() const {
  return static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
}

BetaGrid BetaGrid::uniform(std::size_t dim, const ModelSpec& model, GridAxis axis) {
  model.validate(dim);
  BetaGrid g;
  g.dim = dim;
  g.norm_index = model.norm_index;
  g.norm_value = model.norm_value;
  g.axes.assign(dim - 1, axis);
  return g;
}

void BetaGrid::validate(std::size_t budget) const {
  if (dim == 0 || norm_index >= dim) throw ConfigError("grid normalization index out of range");
  if (axes.size() + 1 != dim) throw ConfigError("grid needs one axis per free coordinate");
  for (const auto& a : axes) {
    if (!(a.step > 0.0)) throw ConfigError("grid step must be positive");
    if (!(a.lower <= a.upper)) throw ConfigError("grid lower end exceeds upper end");
  }
  double total = 1.0;
  for (const auto& a : axes) total *= static_cast<double>(a.size());
  if (total > static_cast<double>(budget))
    throw ConfigError("grid of " + std::to_string(static_cast<std::uint64_t>(total)) +
                      " points exceeds the budget of " + std::to_string(budget));
}

std::size_t BetaGrid::size() const {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  return total;
}

void BetaGrid::point(std::size_t flat, std::span<double> beta) const {
  std::size_t a = axes.size();
  for (std::size_t k = dim; k-- > 0;) {
    if (k == norm_index) {
      beta[k] = norm_value;
      continue;
    }
    --a;
    const std::size_t m = axes[a].size();
    beta[k] = axes[a].at(flat % m);
    flat /= m;
  }
}

std::vector<double> BetaGrid::point(std::size_t flat) const {
  std::vector<double> b(dim);
  point(flat, b);
  return b;
}

IdentifiedSet estimate_identified_set(const CriterionData& data, const ModelSpec& model,
                                      const BetaGrid& grid, double kappa,
                                      const KernelTable& kernels) {
  grid.validate();
  if (grid.dim != data.p) throw ConfigError("grid dimension differs from the design");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be nonnegative");
  const std::size_t m = grid.size();
  IdentifiedSet s;
  s.q.assign(m, 0.0);
  s.kappa = kappa;
  s.n = data.n;
  std::vector<std::size_t> empty(m, 0);
#pragma omp parallel
  {
    CriterionWorkspace ws;
    std::vector<double> beta(grid.dim);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
      grid.point(i, beta);
      auto v = criterion(beta, data, model, ws, kernels);
      s.q[i] = v.q;
      empty[i] = v.empty_cubes;
    }
  }
  const auto best = std::min_element(s.q.begin(), s.q.end()) - s.q.begin();
  s.min_q = s.q[best];
  s.empty_cubes = empty[best];
  const double n = static_cast<double>(data.n);
  s.cutoff = s.min_q + kappa * std::log(n) / n;
  s.accepted.assign(m, 0);
  s.lower.assign(grid.dim, std::numeric_limits<double>::infinity());
  s.upper.assign(grid.dim, -std::numeric_limits<double>::infinity());
  std::vector<double> beta(grid.dim);
  for (std::size_t i = 0; i < m; ++i) {
    if (s.q[i] > s.cutoff) continue;
    s.accepted[i] = 1;
    ++s.accepted_count;
    grid.point(i, beta);
    for (std::size_t k = 0; k < grid.dim; ++k) {
      s.lower[k] = std::min(s.lower[k], beta[k]);
      s.upper[k] = std::max(s.upper[k], beta[k]);
    }
  }
  return s;
}

CriterionData prepare_sample(const Sample& sample, InstrumentMode mode,
                             const SetEstimationSetup& setup) {
  auto binning = make_binning(sample, setup.envelope_bins);
  auto table = estimate_cond_prob(sample, binning, setup.min_cell_count);
  auto env = observation_envelopes(sample, binning, table, mode);
  auto cubes = build_hypercubes(sample, setup.hypercubes, mode);
  return prepare_criterion(sample.y(), design_matrix(sample), env, cubes);
}

namespace {

std::vector<std::string> coordinate_names(std::size_t dim, std::span<const std::string> names) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < dim; ++k)
    out.push_back(k < names.size() ? names[k] : "beta" + std::to_string(k + 1));
  return out;
}

}  // namespace

void write_set_csv(std::ostream& out, const BetaGrid& grid, const IdentifiedSet& set,
                   std::span<const std::string> names) {
  auto cols = coordinate_names(grid.dim, names);
  for (const auto& c : cols) out << csv_escape(c) << ',';
  out << "q,accepted\n";
  std::vector<double> beta(grid.dim);
  for (std::size_t i = 0; i < set.q.size(); ++i) {
    grid.point(i, beta);
    for (double b : beta) out << format_double(b) << ',';
    out << format_double(set.q[i]) << ',' << int(set.accepted[i]) << '\n';
  }
}

nlohmann::json set_to_json(const BetaGrid& grid, const IdentifiedSet& set,
                           std::span<const std::string> names) {
  auto cols = coordinate_names(grid.dim, names);
  nlohmann::json j;
  j["n"] = set.n;
  j["kappa"] = set.kappa;
  j["min_q"] = set.min_q;
  j["cutoff"] = set.cutoff;
  j["grid_points"] = set.q.size();
  j["accepted"] = set.accepted_count;
  j["empty_cubes"] = set.empty_cubes;
  j["normalized"] = {{"coordinate", cols[grid.norm_index]}, {"value", grid.norm_value}};
  for (std::size_t k = 0; k < grid.dim; ++k)
    j["endpoints"].push_back({{"coordinate", cols[k]}, {"lower", set.lower[k]}, {"upper", set.upper[k]}});
  return j;
}

McStat mc_metrics(std::span<const std::optional<double>> estimates, double truth) {
  McStat s;
  std::vector<double> dev;
  double sq = 0.0;
  for (const auto& e : estimates) {
    if (!e || !std::isfinite(*e)) {
      ++s.failures;
      continue;
    }
    const double d = *e - truth;
    sq += d * d;
    dev.push_back(std::abs(d));
  }
  s.successes = dev.size();
  if (dev.empty()) throw DataError("all replications failed");
  s.rmse = std::sqrt(sq / static_cast<double>(dev.size()));
  std::sort(dev.begin(), dev.end());
  const std::size_t h = dev.size() / 2;
  s.mad = dev.size() % 2 ? dev[h] : 0.5 * (dev[h - 1] + dev[h]);
  return s;
}

}  // namespace misreport
