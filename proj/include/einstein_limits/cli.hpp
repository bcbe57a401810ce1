#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "einstein_limits/catalog.hpp"
#include "einstein_limits/geometry.hpp"
#include "einstein_limits/report.hpp"

namespace elim {

/// Bad command line or inconsistent options (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum ExitCode : int { kExitPass = 0, kExitFailed = 1, kExitConfig = 2, kExitComputation = 3 };

struct RunConfig {
  std::string command;  // curvature | verify | converge | report
  std::string metric;   // family name or definition file; empty picks the command default
  std::string p;        // Kasner exponents
  std::string K, CU, Cinf, Lprofile, Gprofile;
  std::vector<std::string> perturb;  // target:profile:exponent
  std::vector<double> ti;
  int grid = 9;
  VerificationMode mode = VerificationMode::Auto;
  std::string suite = "all";
  std::string out;  // JSON path; stdout when empty
  std::string csv;  // converge only
};

/// Throws ConfigError; `--help` is reported through `help` and returns nullopt.
std::optional<RunConfig> parse_command_line(int argc, const char* const* argv, std::string* help = nullptr);

/// The JSON report for a config. Sets `exit_code` to pass or failed; errors
/// propagate as exceptions.
Json run_report(const RunConfig& config, int& exit_code);

/// Parses, runs, writes the report and maps errors to exit codes.
int run_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// The names accepted by `--suite`.
std::vector<std::string> suite_names();

}  // namespace elim
