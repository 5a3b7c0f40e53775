#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fibreflow/model.hpp"
#include "fibreflow/pde.hpp"
#include "fibreflow/travelling.hpp"

namespace fibreflow {

/// h(x, 0) = h0 + amplitude sin(2 pi x / L).
struct InitialData {
  double h0 = 2.29;
  double amplitude = 0.1;

  /// Exact integral of h^2 - 1 over one period of length L.
  double mass(double length) const;
};

/// Either a fixed stride or an explicit list of output times.
struct OutputSchedule {
  std::optional<double> every = 1.0;
  std::vector<double> times;
};

struct RunConfig {
  ModelParams params;
  double length = 20.0;
  std::size_t nodes = 400;
  StepperConfig stepper;
  double t_end = 100.0;
  OutputSchedule output;
  InitialData ic;
  std::string out_dir = "out";

  void validate() const;
  Grid grid() const { return {length, nodes}; }
  /// Sorted output times in [0, t_end]; a stride always includes t_end.
  std::vector<double> output_times() const;
};

enum class GuessKind { Pde, Cosine, File };

/// Where the Newton guess for a travelling wave comes from: a coarse-step
/// transient run from the configured initial data, a cosine bump, or a
/// profile CSV (columns xi,H,U with an optional "# s=" header).
struct GuessSpec {
  GuessKind kind = GuessKind::Pde;
  double t_end = 150.0;
  double dt = 0.1;
  double amplitude = 0.5;
  std::string path;
};

struct TwConfig {
  ModelParams params;
  double length = 20.0;
  std::size_t nodes = 400;
  std::optional<double> mass;  // defaults to the exact mass of `ic`
  InitialData ic;
  TwSolveConfig solver;  // initial_guess is filled from `guess`
  GuessSpec guess;
  std::string out = "tw_profile.csv";

  void validate() const;
  Grid grid() const { return {length, nodes}; }
  double resolved_mass() const { return mass ? *mass : ic.mass(length); }
};

/// JSON config files. Unknown keys are rejected; every field has a default.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
TwConfig parse_tw_config(std::string_view text);
TwConfig load_tw_config(const std::filesystem::path& path);

/// Fully resolved config (defaults included) as pretty-printed JSON.
std::string dump(const RunConfig& config);
std::string dump(const TwConfig& config);

}  // namespace fibreflow
