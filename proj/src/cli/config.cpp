#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <ostream>

#include "CLI11.hpp"
#include "misreport/cli.hpp"
#include "misreport/csv.hpp"
#include "misreport/errors.hpp"

namespace misreport::cli {

int report_exception(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const VerificationFailure& x) {
    err << "verification failed: " << x.what() << "\n";
    return kExitVerification;
  } catch (const DataError& x) {
    err << "data error: " << x.what() << "\n";
    return kExitData;
  } catch (const ConfigError& x) {
    err << "config error: " << x.what() << "\n";
    return kExitConfig;
  } catch (const BudgetExceeded& x) {
    err << "config error: " << x.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << "\n";
    return kExitConfig;
  }
}

GridAxis parse_axis(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos) throw ConfigError("grid axis '" + spec + "' is not lower:upper:step");
  GridAxis g;
  try {
    g.lower = parse_double(spec.substr(0, a));
    g.upper = parse_double(spec.substr(a + 1, b - a - 1));
    g.step = parse_double(spec.substr(b + 1));
  } catch (const DataError&) {
    throw ConfigError("grid axis '" + spec + "' has a non-numeric field");
  }
  if (!(g.step > 0.0) || !(g.lower <= g.upper))
    throw ConfigError("grid axis '" + spec + "' needs lower <= upper and step > 0");
  return g;
}

std::pair<std::string, GridAxis> parse_named_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("axis '" + spec + "' is not name=lower:upper:step");
  return {spec.substr(0, eq), parse_axis(spec.substr(eq + 1))};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  return f;
}

namespace {

template <class T>
std::optional<T> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  T out{};
  const char* end = v + std::char_traits<char>::length(v);
  auto [p, ec] = std::from_chars(v, end, out);
  if (ec != std::errc{} || p != end) throw ConfigError(std::string(name) + " is not a number");
  return out;
}

}  // namespace

std::optional<int> env_threads() {
  auto t = env_number<int>("MISREPORT_THREADS");
  if (t && *t < 1) throw ConfigError("MISREPORT_THREADS must be positive");
  return t;
}

std::optional<std::uint64_t> env_seed() { return env_number<std::uint64_t>("MISREPORT_SEED"); }

bool flag_given(std::span<const std::string> args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

void set_threads(int threads) {
  if (threads < 1) throw ConfigError("thread count must be positive");
  omp_set_num_threads(threads);
}

}  // namespace misreport::cli
