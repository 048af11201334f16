#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "misreport/bounds_io.hpp"
#include "misreport/cli.hpp"
#include "misreport/csv.hpp"
#include "misreport/errors.hpp"
#include "misreport/has.hpp"
#include "misreport/kernels.hpp"
#include "misreport/setest.hpp"
#include "misreport/sim.hpp"
#include "misreport/verify.hpp"

namespace misreport {
namespace {

using nlohmann::json;

struct RoleOptions {
  std::string data;
  std::string y = "y";
  std::vector<std::string> x;
  std::string z, w;
  std::vector<double> w_order;

  void add(CLI::App* app) {
    app->add_option("--data", data, "input CSV with a header row");
    app->add_option("--y", y, "reported outcome column")->capture_default_str();
    app->add_option("--x", x, "continuous covariate columns")->delimiter(',');
    app->add_option("--z", z, "outcome-side instrument column");
    app->add_option("--w", w, "misreporting-side instrument column");
    app->add_option("--w-order", w_order, "W levels, misreporting weakly decreasing")
        ->delimiter(',');
  }

  Sample load() const {
    if (data.empty()) throw ConfigError("--data is required");
    ColumnRoles roles;
    roles.y = y;
    roles.x = x;
    if (!z.empty()) roles.z = z;
    if (!w.empty()) roles.w = w;
    if (!w_order.empty()) roles.w_order = w_order;
    return sample_from_csv(read_csv_file(data), roles);
  }

  void check_mode(InstrumentMode m) const {
    if (m != InstrumentMode::w_only && z.empty()) throw ConfigError("this mode needs --z");
    if (m != InstrumentMode::z_only && w.empty()) throw ConfigError("this mode needs --w");
  }
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string interval(double a, double b, int digits = 3) {
  return "[" + fixed(a, digits) + ", " + fixed(b, digits) + "]";
}

// ---- bounds ---------------------------------------------------------------

struct BoundsOptions {
  RoleOptions roles;
  std::string mode = "z_only";
  std::string restriction = "none";
  double a0_bar = 1.0, a1_bar = 1.0;
  std::size_t bins = 4;
  std::size_t min_cell_count = kDefaultMinCellCount;
  double tau = kDefaultRelevanceTau;
  std::string out_csv, out_json;
};

void print_bounds(std::ostream& out, const ProbBounds& b, const Binning& binning,
                  const ImplicationReport& rep) {
  out << "method: " << b.method << "\n";
  out << std::left << std::setw(32) << "cell" << std::right << std::setw(8) << "z"
      << std::setw(8) << "w" << std::setw(10) << "p" << std::setw(10) << "lower" << std::setw(10)
      << "upper" << "  flags\n";
  for (const auto& r : b.rows) {
    out << std::left << std::setw(32) << binning.describe_cell(r.cell) << std::right
        << std::setw(8) << (r.z_value ? fixed(*r.z_value, 2) : "-") << std::setw(8)
        << (r.w_value ? fixed(*r.w_value, 2) : "-") << std::setw(10) << fixed(r.p)
        << std::setw(10) << (r.defined ? fixed(r.lower) : "-") << std::setw(10)
        << (r.defined ? fixed(r.upper) : "-") << "  " << flags_to_string(r.flags) << "\n";
  }
  if (rep.ok()) {
    out << "testable implications: consistent\n";
  } else {
    for (const auto& i : rep.issues)
      out << "testable implication violated: " << i.check << " at " << binning.describe_cell(i.cell)
          << ", z index " << i.z << ": " << i.detail << "\n";
  }
}

int cmd_bounds(const BoundsOptions& o, std::ostream& out) {
  AssumptionSet as;
  as.mode = parse_mode(o.mode);
  as.restriction = parse_restriction(o.restriction, o.a0_bar, o.a1_bar);
  as.validate();
  o.roles.check_mode(as.mode);
  auto sample = o.roles.load();
  auto binning = make_binning(sample, o.bins);
  auto table = estimate_cond_prob(sample, binning, o.min_cell_count);
  ProbBounds b;
  if (as.mode == InstrumentMode::z_and_w) {
    if (as.restriction.index() != 0)
      throw ConfigError("restrictions apply to single-instrument bounds only");
    b = bounds_two_instruments(two_instrument_diagnostics(table, o.tau), table);
  } else {
    b = apply_restriction(table, as);
  }
  auto rep = check_testable_implications(b, table, as);
  print_bounds(out, b, binning, rep);
  if (!o.out_csv.empty()) {
    auto f = cli::open_output(o.out_csv);
    write_bounds_csv(f, b, &binning);
  }
  if (!o.out_json.empty()) {
    auto j = bounds_to_json(b, &binning);
    j["assumptions"] = as.describe();
    j["implications"] = json::array();
    for (const auto& i : rep.issues)
      j["implications"].push_back({{"cell", i.cell}, {"z", i.z}, {"check", i.check}, {"detail", i.detail}});
    cli::open_output(o.out_json) << j.dump(2) << "\n";
  }
  return cli::kExitOk;
}

// ---- estimate -------------------------------------------------------------

struct EstimateOptions {
  RoleOptions roles;
  std::string profile;
  std::string mode = "z_only";
  std::string model = "semi";
  std::string link = "normal";
  std::string norm;  // coordinate name; default: last coordinate
  double norm_value = 1.0;
  std::string grid = "-5:5:0.1";
  std::vector<std::string> axes;
  double kappa = 1.0;
  std::size_t bins = 5;
  std::size_t min_cell_count = kDefaultMinCellCount;
  std::size_t hypercubes = 30;
  std::size_t budget = kDefaultGridBudget;
  bool has = false;
  std::size_t has_starts = 5;
  std::uint64_t seed = 1;
  std::string trace, out_json;
};

// Variable roster and grid of the college-attendance application.
void apply_empirical_profile(EstimateOptions& o, const CLI::App& app) {
  auto unset = [&](const char* name) { return app.get_option(name)->count() == 0; };
  if (unset("--y")) o.roles.y = "college";
  if (unset("--x")) o.roles.x = {"parent_educ", "black"};
  if (unset("--z")) o.roles.z = "near_college";
  if (unset("--mode")) o.mode = "z_only";
  if (unset("--norm")) o.norm = o.roles.z;
  if (unset("--axis"))
    o.axes = {"intercept=-5:5:0.1", "parent_educ=-0.5:0.5:0.01", "black=-5:5:0.1"};
  if (unset("--has")) o.has = true;
}

std::vector<std::string> coordinate_names(const Sample& s) {
  std::vector<std::string> names = {"intercept"};
  for (std::size_t k = 0; k < s.dim(); ++k)
    names.push_back(k < s.covariate_names().size() ? s.covariate_names()[k]
                                                    : "x" + std::to_string(k + 1));
  return names;
}

void print_estimate(std::ostream& out, const std::vector<std::string>& names, const BetaGrid& grid,
                    const IdentifiedSet& set, const std::optional<HasEstimate>& has,
                    const std::string& model) {
  const int w = 18;
  out << std::left << std::setw(24) << "" << std::right;
  for (const auto& n : names) out << std::setw(w) << n;
  out << "\n" << std::left << std::setw(24) << (model == "semi" ? "Semiparametric set" : "Parametric set")
      << std::right;
  for (std::size_t k = 0; k < names.size(); ++k)
    out << std::setw(w)
        << (k == grid.norm_index ? format_double(grid.norm_value) : interval(set.lower[k], set.upper[k]));
  out << "\n";
  if (has) {
    out << std::left << std::setw(24) << "HAS" << std::right;
    for (double b : has->beta) out << std::setw(w) << fixed(b, 3);
    out << "\n" << "HAS alpha0 = " << fixed(has->alpha0) << ", alpha1 = " << fixed(has->alpha1)
        << ", log-likelihood = " << fixed(has->loglik, 3) << "\n";
  }
  out << "n = " << set.n << ", kappa = " << set.kappa << ", min Q = " << set.min_q
      << ", cutoff = " << set.cutoff << ", accepted " << set.accepted_count << " of "
      << set.q.size() << " grid points\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k == grid.norm_index) continue;
    const std::size_t a = k < grid.norm_index ? k : k - 1;
    const auto& ax = grid.axes[a];
    if (set.lower[k] <= ax.lower + 1e-12 || set.upper[k] >= ax.at(ax.size() - 1) - 1e-12)
      out << "note: the set for " << names[k] << " reaches the grid edge\n";
  }
}

int cmd_estimate(EstimateOptions o, const CLI::App& app, std::ostream& out) {
  if (!o.profile.empty()) {
    if (o.profile != "empirical") throw ConfigError("unknown estimate profile '" + o.profile + "'");
    apply_empirical_profile(o, app);
  }
  const auto mode = parse_mode(o.mode);
  if (mode == InstrumentMode::z_and_w) throw ConfigError("estimation uses one instrument at a time");
  o.roles.check_mode(mode);

  ModelSpec model;
  if (o.model == "semi" || o.model == "semiparametric") {
    model.kind = ModelKind::semiparametric;
    o.model = "semi";
  } else if (o.model == "parametric") {
    model.kind = ModelKind::parametric;
    model.link = LinkFunction::parse(o.link);
  } else {
    throw ConfigError("unknown model '" + o.model + "'");
  }

  auto sample = o.roles.load();
  auto names = coordinate_names(sample);
  if (sample.has_z()) names.push_back(o.roles.z);
  const std::size_t dim = names.size();
  model.norm_index = dim - 1;
  if (!o.norm.empty()) {
    auto it = std::find(names.begin(), names.end(), o.norm);
    if (it == names.end()) throw ConfigError("normalized coordinate '" + o.norm + "' is not in the design");
    model.norm_index = static_cast<std::size_t>(it - names.begin());
  }
  model.norm_value = o.norm_value;
  model.validate(dim);

  auto grid = BetaGrid::uniform(dim, model, cli::parse_axis(o.grid));
  for (const auto& spec : o.axes) {
    auto [name, axis] = cli::parse_named_axis(spec);
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("grid axis for unknown coordinate '" + name + "'");
    const auto k = static_cast<std::size_t>(it - names.begin());
    if (k == model.norm_index) throw ConfigError("the normalized coordinate has no grid axis");
    grid.axes[k < model.norm_index ? k : k - 1] = axis;
  }
  grid.validate(o.budget);

  SetEstimationSetup setup{o.bins, o.min_cell_count, o.hypercubes};
  auto data = prepare_sample(sample, mode, setup);
  auto set = estimate_identified_set(data, model, grid, o.kappa);

  // A HAS failure does not void the set; it is reported in place of the row.
  std::optional<HasEstimate> has;
  std::string has_error;
  if (o.has) {
    HasOptions ho;
    ho.starts = o.has_starts;
    ho.seed = o.seed;
    try {
      has = fit_has(sample, model.kind == ModelKind::parametric ? model.link : LinkFunction::normal(), ho);
    } catch (const DataError& e) {
      has_error = e.what();
    }
  }
  print_estimate(out, names, grid, set, has, o.model);
  if (!has_error.empty()) out << "HAS: " << has_error << "\n";

  if (!o.trace.empty()) {
    auto f = cli::open_output(o.trace);
    write_set_csv(f, grid, set, names);
  }
  if (!o.out_json.empty()) {
    auto j = set_to_json(grid, set, names);
    j["model"] = o.model;
    if (model.kind == ModelKind::parametric) j["link"] = model.link.name();
    j["mode"] = to_string(mode);
    j["kernels"] = active_kernels().name;
    if (has) {
      j["has"] = {{"beta", has->beta},
                  {"alpha0", has->alpha0},
                  {"alpha1", has->alpha1},
                  {"loglik", has->loglik},
                  {"converged_starts", has->converged_starts},
                  {"scale", "natural"}};
    } else if (!has_error.empty()) {
      j["has"] = {{"error", has_error}};
    }
    cli::open_output(o.out_json) << j.dump(2) << "\n";
  }
  return cli::kExitOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
  std::string profile = "smoke";
  std::vector<std::string> designs, errors;
  std::vector<std::size_t> sizes;
  std::size_t replications = 0;
  std::uint64_t seed = 20240101;
  bool no_has = false;
  std::string out_csv, out_json;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  McConfig c;
  if (o.profile == "smoke") {
    c.sizes = {500};
    c.replications = 2;
  } else if (o.profile == "ci") {
    c.sizes = {500, 1000};
    c.replications = 10;
  } else if (o.profile != "full") {
    throw ConfigError("unknown simulate profile '" + o.profile + "'");
  }
  if (!o.designs.empty()) {
    c.designs.clear();
    for (const auto& d : o.designs) c.designs.push_back(parse_design(d));
  }
  if (!o.errors.empty()) {
    c.errors.clear();
    for (const auto& e : o.errors) c.errors.push_back(parse_error_law(e));
  }
  if (!o.sizes.empty()) c.sizes = o.sizes;
  if (o.replications > 0) c.replications = o.replications;
  c.seed = o.seed;
  c.run_has = !o.no_has;
  auto report = run_monte_carlo(c);
  format_mc_tables(out, report);
  for (const auto& f : report.failures) out << "failed replication: " << f << "\n";
  if (!o.out_csv.empty()) {
    auto f = cli::open_output(o.out_csv);
    write_mc_csv(f, report);
  }
  if (!o.out_json.empty()) cli::open_output(o.out_json) << mc_to_json(report).dump(2) << "\n";
  return cli::kExitOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyOptions {
  std::string profile = "default";
  std::string instance;
  std::size_t per_case = 0;
  std::uint64_t seed = 1;
  std::uint64_t budget = kDefaultOracleBudget;
  std::string out_json;
};

void print_matrix(std::ostream& out, const std::vector<CheckResult>& rows) {
  std::size_t width = 10;
  for (const auto& r : rows) width = std::max(width, r.name.size() + 2);
  out << std::left << std::setw(static_cast<int>(width)) << "check" << std::right << std::setw(10)
      << "instances" << std::setw(10) << "failures" << std::setw(8) << "result" << "  detail\n";
  for (const auto& r : rows)
    out << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::setw(10)
        << r.instances << std::setw(10) << r.failures << std::setw(8) << (r.pass() ? "PASS" : "FAIL")
        << "  " << r.detail << "\n";
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  std::vector<CheckResult> rows;
  if (!o.instance.empty()) {
    std::ifstream f(o.instance);
    if (!f) throw DataError("cannot read instance '" + o.instance + "'");
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw DataError("instance '" + o.instance + "': " + e.what());
    }
    rows = verify_instance(instance_from_json(j), o.budget);
  } else {
    std::size_t per_case = 20;
    if (o.profile == "quick") per_case = 5;
    else if (o.profile == "full") per_case = 100;
    else if (o.profile != "default") throw ConfigError("unknown verify profile '" + o.profile + "'");
    if (o.per_case > 0) per_case = o.per_case;
    rows = oracle_suite(per_case, o.seed);
  }
  print_matrix(out, rows);
  if (!o.out_json.empty()) {
    json j = json::array();
    for (const auto& r : rows)
      j.push_back({{"check", r.name},
                   {"instances", r.instances},
                   {"failures", r.failures},
                   {"worst", r.worst},
                   {"pass", r.pass()},
                   {"detail", r.detail}});
    cli::open_output(o.out_json) << j.dump(2) << "\n";
  }
  std::vector<std::string> failed;
  for (const auto& r : rows)
    if (!r.pass()) failed.push_back(r.name);
  if (!failed.empty()) {
    std::string msg;
    for (const auto& n : failed) msg += (msg.empty() ? "" : ", ") + n;
    throw VerificationFailure(msg);
  }
  return cli::kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds and set estimates for binary choice with misreported outcomes", "misreport"};
  app.set_config("--config", "", "INI or TOML file; command-line flags take precedence");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (also MISREPORT_THREADS)");

  BoundsOptions bo;
  auto* bounds = app.add_subcommand("bounds", "bounds on true choice probabilities per cell");
  bo.roles.add(bounds);
  bounds->add_option("--mode", bo.mode, "z_only | w_only | z_and_w")->capture_default_str();
  bounds->add_option("--restriction", bo.restriction,
                     "none | one_sided_alpha0 | one_sided_alpha1 | bounded | monotone_a0_le_a1 | "
                     "monotone_a1_le_a0")
      ->capture_default_str();
  bounds->add_option("--a0-bar", bo.a0_bar, "cap on alpha0 for bounded misreporting");
  bounds->add_option("--a1-bar", bo.a1_bar, "cap on alpha1 for bounded misreporting");
  bounds->add_option("--bins", bo.bins, "cells per covariate")->capture_default_str();
  bounds->add_option("--min-cell-count", bo.min_cell_count)->capture_default_str();
  bounds->add_option("--tau", bo.tau, "instrument relevance threshold")->capture_default_str();
  bounds->add_option("--out", bo.out_csv, "bounds CSV");
  bounds->add_option("--json", bo.out_json, "bounds JSON");

  EstimateOptions eo;
  auto* estimate = app.add_subcommand("estimate", "identified set for the coefficients");
  eo.roles.add(estimate);
  estimate->add_option("--profile", eo.profile, "empirical: college-attendance roster");
  estimate->add_option("--mode", eo.mode, "z_only | w_only")->capture_default_str();
  estimate->add_option("--model", eo.model, "semi | parametric")->capture_default_str();
  estimate->add_option("--link", eo.link, "normal | logistic | cauchy(loc,scale)")->capture_default_str();
  estimate->add_option("--norm", eo.norm, "coordinate held fixed (default: last)");
  estimate->add_option("--norm-value", eo.norm_value)->capture_default_str();
  estimate->add_option("--grid", eo.grid, "lower:upper:step for every free coordinate")
      ->capture_default_str();
  estimate->add_option("--axis", eo.axes, "name=lower:upper:step, overrides --grid");
  estimate->add_option("--kappa", eo.kappa)->capture_default_str();
  estimate->add_option("--bins", eo.bins, "cells per covariate for the plug-in bounds")
      ->capture_default_str();
  estimate->add_option("--min-cell-count", eo.min_cell_count)->capture_default_str();
  estimate->add_option("--hypercubes", eo.hypercubes)->capture_default_str();
  estimate->add_option("--grid-budget", eo.budget)->capture_default_str();
  estimate->add_flag("--has", eo.has, "also fit the constant-misreporting likelihood");
  estimate->add_option("--has-starts", eo.has_starts)->capture_default_str();
  estimate->add_option("--seed", eo.seed, "HAS start seed (also MISREPORT_SEED)")->capture_default_str();
  estimate->add_option("--trace", eo.trace, "criterion at every grid point (CSV)");
  estimate->add_option("--json", eo.out_json, "report JSON");

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison of the set and HAS");
  simulate->add_option("--profile", so.profile, "smoke | ci | full")->capture_default_str();
  simulate->add_option("--designs", so.designs, "z, w")->delimiter(',');
  simulate->add_option("--errors", so.errors, "normal, cauchy")->delimiter(',');
  simulate->add_option("--sizes", so.sizes)->delimiter(',');
  simulate->add_option("--replications", so.replications);
  simulate->add_option("--seed", so.seed, "base seed (also MISREPORT_SEED)")->capture_default_str();
  simulate->add_flag("--no-has", so.no_has);
  simulate->add_option("--csv", so.out_csv);
  simulate->add_option("--json", so.out_json);

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "closed forms against the brute-force oracle");
  verify->add_option("--profile", vo.profile, "quick | default | full")->capture_default_str();
  verify->add_option("--instance", vo.instance, "JSON instance to check instead of the suite");
  verify->add_option("--per-case", vo.per_case, "random instances per configuration");
  verify->add_option("--seed", vo.seed, "suite seed (also MISREPORT_SEED)")->capture_default_str();
  verify->add_option("--budget", vo.budget, "oracle enumeration budget")->capture_default_str();
  verify->add_option("--json", vo.out_json);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    if (!cli::flag_given(args, "--threads")) {
      if (auto t = cli::env_threads()) threads = *t;
    }
    if (threads > 0) cli::set_threads(threads);
    if (!cli::flag_given(args, "--seed")) {
      if (auto s = cli::env_seed()) eo.seed = so.seed = vo.seed = *s;
    }
    if (*bounds) return cmd_bounds(bo, out);
    if (*estimate) return cmd_estimate(eo, *estimate, out);
    if (*simulate) return cmd_simulate(so, out);
    return cmd_verify(vo, out);
  } catch (...) {
    return cli::report_exception(std::current_exception(), err);
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::span<const std::string>(args), out, err);
}

}  // namespace misreport
