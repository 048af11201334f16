#pragma once

#include <cstdint>
#include <exception>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "misreport/setest.hpp"

namespace misreport {

// Runs one subcommand (bounds | estimate | simulate | verify) and returns the
// process exit code: 0 success, 1 config error, 2 data error, 3 verification
// failure.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitVerification = 3;

// Maps a library exception onto the exit-code contract and prints it.
int report_exception(std::exception_ptr e, std::ostream& err);

// "lower:upper:step"
GridAxis parse_axis(const std::string& spec);
// "name=lower:upper:step"
std::pair<std::string, GridAxis> parse_named_axis(const std::string& spec);

// Opens a file for writing; throws ConfigError when it cannot.
std::ofstream open_output(const std::string& path);

// MISREPORT_THREADS and MISREPORT_SEED apply unless the flag itself was given
// on the command line. The value from a config file loses to the environment.
std::optional<int> env_threads();
std::optional<std::uint64_t> env_seed();
bool flag_given(std::span<const std::string> args, const std::string& flag);
void set_threads(int threads);

}  // namespace cli
}  // namespace misreport
