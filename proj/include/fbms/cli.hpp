#pragma once

/// Command-line front end: `fbms <subcommand> [flags]`.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbms/export.hpp"

namespace fbms::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumeric = 3,
  kExitInvariant = 4,
};

struct CliConfig {
  std::string subcommand;
  int m = 2;
  int n = 2;
  int k = 1;
  double radius = 0.5;
  /// Either a comma list "a,b,c" or a range "lo:hi:count".
  std::string eps_grid;
  double tol_abs = 1e-12;
  double tol_rel = 1e-12;
  double tol_root = 1e-13;
  double radius_cap = 1e15;
  int quad_nodes = 256;
  int segments = 128;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> config;

  [[nodiscard]] io::Json to_json() const;
  /// Name of the run directory below `out`.
  [[nodiscard]] std::string run_name() const;
};

inline const std::vector<std::string> kSubcommands = {
    "classify", "family", "annulus", "catenoid", "critical-catenoid", "uniqueness", "balance",
    "verify-all"};

/// Throws Error(InvalidArgument) naming the offending flag.
void validate(const CliConfig& config);

/// Expands `eps_grid`; empty input yields `fallback`.
[[nodiscard]] std::vector<double> parse_grid(const std::string& spec,
                                             const std::vector<double>& fallback);

/// Parses flags, merges the optional JSON config file (flags win) and
/// validates. Throws Error(InvalidArgument) on any problem.
[[nodiscard]] CliConfig parse(const std::vector<std::string>& args);

/// Runs a validated configuration and returns the exit code.
[[nodiscard]] int execute(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Full pipeline: parse, execute, map errors to exit codes. `args` excludes
/// the program name.
[[nodiscard]] int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace fbms::cli
