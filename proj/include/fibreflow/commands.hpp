#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace fibreflow {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,    // unreadable/invalid config or I/O failure
  kExitSolver = 2,    // solver failure
  kExitMismatch = 3,  // check found a mismatch or a bound violation
};

struct PdeOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out_dir;
};

struct TwOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> guess;
  bool resample = false;
  std::optional<std::filesystem::path> out;
};

/// Writes trajectory.csv, diagnostics.csv and summary.json (plus
/// entropy_s2.csv for laminar runs) into the output directory.
int cmd_pde(const PdeOptions& options, std::ostream& log);

/// Solves for a travelling wave and writes the profile CSV.
int cmd_tw(const TwOptions& options, std::ostream& log);

/// Recomputes diagnostics from a stored run and re-certifies the bounds.
int cmd_check(const std::filesystem::path& dir, std::ostream& log);

}  // namespace fibreflow
