#include "misreport/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "misreport/csv.hpp"
#include "misreport/errors.hpp"

namespace misreport {

std::string to_string(Design d) {
  switch (d) {
    case Design::z_design:
      return "z_design";
    case Design::w_design:
      return "w_design";
    case Design::two_instruments:
      return "two_instruments";
  }
  return "?";
}

std::string to_string(ErrorLaw e) { return e == ErrorLaw::normal ? "normal" : "cauchy"; }

Design parse_design(const std::string& s) {
  if (s == "z_design" || s == "z") return Design::z_design;
  if (s == "w_design" || s == "w") return Design::w_design;
  if (s == "two_instruments" || s == "zw") return Design::two_instruments;
  throw ConfigError("unknown design '" + s + "'");
}

ErrorLaw parse_error_law(const std::string& s) {
  if (s == "normal") return ErrorLaw::normal;
  if (s == "cauchy") return ErrorLaw::cauchy;
  throw ConfigError("unknown error law '" + s + "'");
}

LinkFunction error_link(ErrorLaw e) {
  return e == ErrorLaw::normal ? LinkFunction::normal() : LinkFunction::cauchy(0.0, 0.5);
}

std::vector<double> true_beta(Design d) {
  if (d == Design::w_design) return {1.0, 1.5};
  return {1.0, 1.5, -1.5};
}

InstrumentMode design_mode(Design d) {
  switch (d) {
    case Design::z_design:
      return InstrumentMode::z_only;
    case Design::w_design:
      return InstrumentMode::w_only;
    case Design::two_instruments:
      return InstrumentMode::z_and_w;
  }
  return InstrumentMode::z_only;
}

Rates rates_z(double xt) { return {0.3 + 0.1 * xt, 0.1 - 0.1 * xt}; }

Rates rates_w(double xt, double w) { return {1.0 / (1.0 + 0.3 * w * w), 0.1 - 0.1 * xt}; }

// Both rates shrink in w, so the signal 1 - alpha0 - alpha1 grows with w.
Rates rates_two(double xt, double w) { return {(0.3 + 0.1 * xt) / w, (0.1 - 0.1 * xt) / w}; }

Rates design_rates(Design d, double xt, double w) {
  switch (d) {
    case Design::z_design:
      return rates_z(xt);
    case Design::w_design:
      return rates_w(xt, w);
    case Design::two_instruments:
      return rates_two(xt, w);
  }
  return {};
}

const std::vector<double>& z_support() {
  static const std::vector<double> s = {-1.0, -0.5, 0.0, 0.5, 1.0};
  return s;
}

const std::vector<double>& w_support(Design d) {
  static const std::vector<double> five = {1, 2, 3, 4, 5};
  static const std::vector<double> three = {1, 2, 3};
  static const std::vector<double> none;
  if (d == Design::w_design) return five;
  if (d == Design::two_instruments) return three;
  return none;
}

namespace {

double draw_error(ErrorLaw e, std::mt19937_64& rng) {
  if (e == ErrorLaw::normal) return std::normal_distribution<double>(0.0, 1.0)(rng);
  return std::cauchy_distribution<double>(0.0, 0.5)(rng);
}

Sample simulate(Design d, const DgpConfig& c) {
  if (c.n == 0) throw ConfigError("sample size must be positive");
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), u(0.0, 1.0);
  const auto beta = true_beta(d);
  const bool has_z = d != Design::w_design, has_w = d != Design::z_design;
  const auto& zs = z_support();
  const auto& ws = w_support(d);
  SampleColumns col;
  col.x.assign(1, std::vector<double>(c.n));
  col.covariate_names = {"x1"};
  col.y.resize(c.n);
  if (has_z) col.z.emplace(c.n);
  if (has_w) {
    col.w.emplace(c.n);
    col.w_order = ws;
  }
  LatentOutcomes lat{std::vector<std::uint8_t>(c.n), std::vector<std::uint8_t>(c.n),
                     std::vector<std::uint8_t>(c.n)};
  for (std::size_t i = 0; i < c.n; ++i) {
    const double xt = ux(rng);
    double index = beta[0] + beta[1] * xt;
    if (has_z) {
      const double z = zs[rng() % zs.size()];
      (*col.z)[i] = z;
      index += beta[2] * z;
    }
    double w = 0.0;
    if (has_w) {
      w = ws[rng() % ws.size()];
      (*col.w)[i] = w;
    }
    const double eps = draw_error(c.error, rng);
    const auto r = design_rates(d, xt, w);
    const std::uint8_t ys = index >= eps;
    const std::uint8_t m1 = u(rng) >= r.alpha1;
    const std::uint8_t m0 = u(rng) >= r.alpha0;
    col.x[0][i] = xt;
    col.y[i] = m1 * ys + (1 - m0) * (1 - ys);
    lat.y_star[i] = ys;
    lat.m0[i] = m0;
    lat.m1[i] = m1;
  }
  return with_latent(build_sample(std::move(col)), std::move(lat));
}

}  // namespace

Sample dgp_z(const DgpConfig& c) {
  if (c.design != Design::z_design) throw ConfigError("dgp_z needs the Z design");
  return simulate(Design::z_design, c);
}

Sample dgp_w(const DgpConfig& c) {
  if (c.design != Design::w_design) throw ConfigError("dgp_w needs the W design");
  return simulate(Design::w_design, c);
}

Sample dgp_two(const DgpConfig& c) {
  if (c.design != Design::two_instruments)
    throw ConfigError("dgp_two needs the two-instrument design");
  return simulate(Design::two_instruments, c);
}

Sample generate(const DgpConfig& c) { return simulate(c.design, c); }

std::map<std::size_t, std::size_t> default_hypercube_mapping() {
  return {{500, 30}, {1000, 40}, {2000, 50}};
}

std::size_t hypercubes_for(std::size_t n, const std::map<std::size_t, std::size_t>& m) {
  if (m.empty()) throw ConfigError("empty hypercube mapping");
  auto best = m.begin();
  for (auto it = m.begin(); it != m.end(); ++it) {
    const auto d = [&](std::size_t k) { return k > n ? k - n : n - k; };
    if (d(it->first) < d(best->first)) best = it;
  }
  return best->second;
}

const McRow* McReport::find(Design d, ErrorLaw e, std::size_t n, std::size_t coordinate,
                            const std::string& estimator) const {
  for (const auto& r : rows)
    if (r.design == d && r.error == e && r.n == n && r.coordinate == coordinate &&
        r.estimator == estimator)
      return &r;
  return nullptr;
}

namespace {

struct Task {
  Design design;
  ErrorLaw error;
  std::size_t n;
  std::size_t rep;
};

struct Outcome {
  std::vector<std::optional<double>> lower, upper, has;  // per coordinate
  std::string failure;
};

std::uint64_t task_seed(std::uint64_t base, const Task& t) {
  std::seed_seq seq{std::uint32_t(base), std::uint32_t(base >> 32), std::uint32_t(t.design),
                    std::uint32_t(t.error), std::uint32_t(t.n), std::uint32_t(t.rep)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

Outcome run_task(const McConfig& c, const Task& t) {
  const auto beta0 = true_beta(t.design);
  const std::size_t dim = beta0.size();
  Outcome o;
  o.lower.assign(dim, std::nullopt);
  o.upper.assign(dim, std::nullopt);
  o.has.assign(dim, std::nullopt);
  std::ostringstream tag;
  tag << to_string(t.design) << '/' << to_string(t.error) << "/n=" << t.n << "/rep=" << t.rep
      << ": ";
  const auto sample = generate({t.design, t.n, t.error, task_seed(c.seed, t)});
  try {
    SetEstimationSetup setup{c.envelope_bins, c.min_cell_count, hypercubes_for(t.n, c.hypercubes)};
    auto data = prepare_sample(sample, design_mode(t.design), setup);
    auto grid = BetaGrid::uniform(dim, c.model, c.axis);
    auto set = estimate_identified_set(data, c.model, grid, c.kappa);
    for (std::size_t k = 0; k < dim; ++k) {
      o.lower[k] = set.lower[k];
      o.upper[k] = set.upper[k];
    }
  } catch (const std::exception& e) {
    o.failure += tag.str() + "set estimate: " + e.what();
  }
  if (c.run_has) {
    try {
      HasOptions opt = c.has;
      opt.seed = task_seed(c.seed ^ 0x9e3779b97f4a7c15ull, t);
      auto h = fit_has(sample, LinkFunction::normal(), opt);
      const double scale = h.beta[c.model.norm_index];
      if (scale == 0.0) throw DataError("HAS normalized coefficient is zero");
      for (std::size_t k = 0; k < dim; ++k) o.has[k] = h.beta[k] * c.model.norm_value / scale;
    } catch (const std::exception& e) {
      if (!o.failure.empty()) o.failure += "; ";
      o.failure += tag.str() + "HAS: " + e.what();
    }
  }
  return o;
}

}  // namespace

McReport run_monte_carlo(const McConfig& c) {
  if (c.replications == 0) throw ConfigError("replication count must be positive");
  for (auto d : c.designs)
    if (d == Design::two_instruments)
      throw ConfigError("Monte Carlo covers the Z and W designs only");
  std::vector<Task> tasks;
  for (auto d : c.designs)
    for (auto e : c.errors)
      for (auto n : c.sizes)
        for (std::size_t r = 0; r < c.replications; ++r) tasks.push_back({d, e, n, r});
  std::vector<Outcome> out(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = run_task(c, tasks[i]);

  McReport rep;
  rep.replications = c.replications;
  std::size_t i = 0;
  for (auto d : c.designs) {
    const auto beta0 = true_beta(d);
    for (auto e : c.errors)
      for (auto n : c.sizes) {
        const std::size_t first = i;
        i += c.replications;
        for (std::size_t k = 0; k < beta0.size(); ++k) {
          if (k == c.model.norm_index) continue;
          for (const char* est : {"semi_lower", "semi_upper", "has"}) {
            if (std::string(est) == "has" && !c.run_has) continue;
            std::vector<std::optional<double>> v;
            for (std::size_t r = first; r < i; ++r) {
              const auto& o = out[r];
              v.push_back(std::string(est) == "semi_lower"   ? o.lower[k]
                          : std::string(est) == "semi_upper" ? o.upper[k]
                                                             : o.has[k]);
            }
            McRow row{d, e, n, k, est, beta0[k], {}};
            try {
              row.stat = mc_metrics(v, beta0[k]);
            } catch (const DataError&) {
              row.stat.failures = v.size();
              row.stat.rmse = row.stat.mad = std::numeric_limits<double>::quiet_NaN();
            }
            rep.rows.push_back(row);
          }
        }
        for (std::size_t r = first; r < i; ++r)
          if (!out[r].failure.empty()) rep.failures.push_back(out[r].failure);
      }
  }
  return rep;
}

void write_mc_csv(std::ostream& out, const McReport& r) {
  out << "design,error,n,coefficient,estimator,truth,rmse,mad,successes,failures\n";
  for (const auto& row : r.rows)
    out << to_string(row.design) << ',' << to_string(row.error) << ',' << row.n << ",beta"
        << row.coordinate + 1 << ',' << row.estimator << ',' << format_double(row.truth) << ','
        << format_double(row.stat.rmse) << ',' << format_double(row.stat.mad) << ','
        << row.stat.successes << ',' << row.stat.failures << '\n';
}

nlohmann::json mc_to_json(const McReport& r) {
  nlohmann::json j;
  j["replications"] = r.replications;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"design", to_string(row.design)},
                         {"error", to_string(row.error)},
                         {"n", row.n},
                         {"coefficient", "beta" + std::to_string(row.coordinate + 1)},
                         {"estimator", row.estimator},
                         {"truth", row.truth},
                         {"rmse", row.stat.rmse},
                         {"mad", row.stat.mad},
                         {"successes", row.stat.successes},
                         {"failures", row.stat.failures}});
  j["failures"] = r.failures;
  return j;
}

void format_mc_tables(std::ostream& out, const McReport& r) {
  std::vector<Design> designs;
  std::vector<std::size_t> coords, sizes;
  std::vector<ErrorLaw> errors;
  auto add = [](auto& v, auto x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& row : r.rows) {
    add(designs, row.design);
    add(sizes, row.n);
    add(errors, row.error);
  }
  auto cell = [&](const McRow* row) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    if (!row)
      os << std::setw(8) << "-" << std::setw(8) << "-";
    else
      os << std::setw(8) << row->stat.rmse << std::setw(8) << row->stat.mad;
    return os.str();
  };
  for (auto d : designs) {
    coords.clear();
    for (const auto& row : r.rows)
      if (row.design == d) add(coords, row.coordinate);
    for (auto k : coords) {
      out << "Performance for beta" << k + 1 << " (" << to_string(d) << ", B = " << r.replications
          << ")\n";
      out << std::left << std::setw(10) << "Design" << std::right << std::setw(16) << "semi lower"
          << std::setw(16) << "semi upper" << std::setw(16) << "HAS" << '\n';
      out << std::left << std::setw(10) << "" << std::right;
      for (int c = 0; c < 3; ++c) out << std::setw(8) << "rMSE" << std::setw(8) << "MAD";
      out << '\n';
      for (auto n : sizes) {
        out << "n = " << n << '\n';
        for (auto e : errors) {
          out << std::left << std::setw(10) << (e == ErrorLaw::normal ? "Normal" : "Cauchy")
              << std::right;
          for (const char* est : {"semi_lower", "semi_upper", "has"}) out << cell(r.find(d, e, n, k, est));
          out << '\n';
        }
      }
      out << '\n';
    }
  }
  if (!r.failures.empty()) {
    out << "Failed replications: " << r.failures.size() << '\n';
    for (const auto& f : r.failures) out << "  " << f << '\n';
  }
}

}  // namespace misreport
