#include "fibreflow/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fibreflow/config.hpp"
#include "fibreflow/errors.hpp"
#include "fibreflow/io.hpp"
#include "fibreflow/simulation.hpp"
#include "json.hpp"

namespace fibreflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTrajectoryFile = "trajectory.csv";
constexpr const char* kDiagnosticsFile = "diagnostics.csv";
constexpr const char* kSummaryFile = "summary.json";
constexpr const char* kEntropyFile = "entropy_s2.csv";

json number_or_null(std::optional<double> v) {
  if (!v || std::isnan(*v)) return nullptr;
  return *v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

std::string s2_row(const DiagnosticsSample& s) {
  return format_number(s.t) + ',' + format_number(s.s2.value_or(std::nan(""))) + ',' +
         format_number(s.c2_bound.value_or(std::nan("")));
}

// Compares two numbers written with format_number; NaN matches NaN.
bool same(double stored, double recomputed) {
  if (std::isnan(stored) || std::isnan(recomputed)) return std::isnan(stored) && std::isnan(recomputed);
  return std::abs(stored - recomputed) <= 1e-8 * std::max(1.0, std::abs(recomputed));
}

InitialGuess build_guess(const TwConfig& cfg, const TwOptions& options, std::ostream& log) {
  const Grid grid = cfg.grid();
  switch (cfg.guess.kind) {
    case GuessKind::Cosine:
      return CosineBump{cfg.guess.amplitude};
    case GuessKind::Pde: {
      StepperConfig stepper;
      stepper.dt = cfg.guess.dt;
      log << "guess: transient run to t = " << cfg.guess.t_end << " with dt = " << cfg.guess.dt
          << '\n';
      FieldState start = initial_condition(grid, cfg.ic.h0, cfg.ic.amplitude, cfg.params);
      return FromTrajectory{advance(std::move(start), cfg.guess.t_end, stepper, cfg.params),
                            std::nullopt};
    }
    case GuessKind::File:
      break;
  }
  const ProfileFile file = read_profile(cfg.guess.path);
  const std::size_t n = file.xi.size();
  double length = static_cast<double>(n) * (file.xi[1] - file.xi[0]);
  if (const auto it = file.header.find("L"); it != file.header.end())
    length = parse_number(it->second);
  if (std::abs(length - cfg.length) > 1e-9 * cfg.length)
    throw ConfigError("guess profile has L = " + format_number(length) + " but the config has L = " +
                      format_number(cfg.length));
  if (n != cfg.nodes && !options.resample)
    throw ConfigError("guess profile has N = " + std::to_string(n) + " but the config has N = " +
                      std::to_string(cfg.nodes) +
                      "; pass --resample to interpolate it linearly onto the config grid");
  const Grid file_grid(length, n);
  FieldState snapshot{0.0, PeriodicField(file_grid, file.H), PeriodicField(file_grid, file.U)};
  std::optional<double> speed;
  if (const auto it = file.header.find("s"); it != file.header.end())
    speed = parse_number(it->second);
  return FromTrajectory{std::move(snapshot), speed};
}

}  // namespace

int cmd_pde(const PdeOptions& options, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_run_config(options.config);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (options.out_dir) cfg.out_dir = options.out_dir->string();
  const fs::path dir(cfg.out_dir);
  const bool laminar = cfg.params.profile == FlowProfile::Laminar;

  try {
    fs::create_directories(dir);
    CsvWriter trajectory(dir / kTrajectoryFile, kTrajectoryHeader);
    CsvWriter diagnostics(dir / kDiagnosticsFile, kDiagnosticsHeader);
    std::optional<CsvWriter> entropy;
    if (laminar) entropy.emplace(dir / kEntropyFile, "t,s2,c2_bound");

    log << "pde: " << to_string(cfg.params.profile) << " a=" << cfg.params.a
        << " b=" << cfg.params.b << " c=" << cfg.params.c << " N=" << cfg.nodes
        << " dt=" << cfg.stepper.dt << " t_end=" << cfg.t_end << '\n';
    const RunResult result = run(cfg, [&](const FieldState& s, const DiagnosticsSample& d) {
      write_snapshot(trajectory, s);
      write_diagnostics(diagnostics, d);
      if (entropy) {
        entropy->write_line(s2_row(d));
        entropy->flush();
      }
    });

    const auto& samples = result.diagnostics;
    const CertificationReport report = certify(samples, cfg.params);
    if (result.trajectory.failed) {
      trajectory.mark_failure(result.trajectory.failure);
      diagnostics.mark_failure(result.trajectory.failure);
      if (entropy) entropy->mark_failure(result.trajectory.failure);
    }

    json summary;
    summary["status"] = result.trajectory.failed ? "failed" : "ok";
    if (result.trajectory.failed) summary["failure"] = result.trajectory.failure;
    summary["config"] = json::parse(dump(cfg));
    summary["samples"] = samples.size();
    json files = {kTrajectoryFile, kDiagnosticsFile};
    if (laminar) files.push_back(kEntropyFile);
    summary["files"] = files;
    if (!samples.empty()) {
      const double m0 = samples.front().mass, m1 = samples.back().mass;
      summary["initial_mass"] = m0;
      summary["final_mass"] = m1;
      summary["relative_mass_drift"] = (m1 - m0) / m0;
      summary["speed_estimate"] = number_or_null(samples.back().speed_estimate);
      summary["final_time"] = samples.back().t;
    }
    summary["certification"] = {
        {"passed", report.passed},
        {"summary", report.summary},
        {"min_energy_margin", samples.empty() ? json(nullptr) : json(report.min_energy_margin)},
        {"min_entropy_margin", number_or_null(report.min_entropy_margin)},
        {"min_s2_margin_best_effort", number_or_null(report.min_s2_margin)}};
    write_text(dir / kSummaryFile, summary.dump(2));

    log << "certification " << report.summary << '\n';
    if (!samples.empty()) {
      log << "mass drift " << summary["relative_mass_drift"].get<double>() << ", speed estimate "
          << samples.back().speed_estimate << '\n';
    }
    if (result.trajectory.failed) {
      log << "error: solver failure " << result.trajectory.failure << '\n';
      return kExitSolver;
    }
    log << "wrote " << dir.string() << '\n';
    return kExitOk;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_tw(const TwOptions& options, std::ostream& log) {
  TwConfig cfg;
  try {
    cfg = load_tw_config(options.config);
    if (options.guess) {
      cfg.guess.kind = GuessKind::File;
      cfg.guess.path = options.guess->string();
    }
    if (options.out) cfg.out = options.out->string();
    cfg.validate();
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const double M = cfg.resolved_mass();
  TwSolveConfig solver = cfg.solver;
  try {
    solver.initial_guess = build_guess(cfg, options, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateFilmError& e) {
    log << "error: guess transient failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConvergenceError& e) {
    log << "error: guess transient failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const fs::path out(cfg.out);
  try {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    try {
      const TravellingWave wave = solve_tw(solver, M, cfg.params, cfg.grid());
      const double violation = first_integral_check(wave, cfg.params);
      const FluxConstant flux = flux_constant(wave, cfg.params);
      write_profile(out, wave, violation, "converged");
      log << "tw: s=" << format_number(wave.s) << " q0=" << format_number(wave.q0)
          << " M=" << format_number(M) << " iterations=" << wave.iterations
          << " residual=" << wave.residual_norm << " flux_spread=" << flux.spread
          << " first_integral_violation=" << violation << '\n'
          << "wrote " << out.string() << '\n';
      return kExitOk;
    } catch (const TwConvergenceError& e) {
      write_profile(out, e.best(), std::nan(""), "failed");
      log << "error: " << e.what() << "; best iterate written to " << out.string() << '\n';
      return kExitSolver;
    } catch (const SingularMatrixError& e) {
      log << "error: " << e.what() << '\n';
      return kExitSolver;
    } catch (const DegenerateFilmError& e) {
      log << "error: " << e.what() << '\n';
      return kExitSolver;
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_check(const fs::path& dir, std::ostream& log) {
  RunConfig cfg;
  std::vector<FieldState> snapshots;
  std::vector<DiagnosticsSample> stored;
  std::optional<CsvTable> stored_s2;
  bool run_failed = false;
  try {
    for (const char* name : {kSummaryFile, kTrajectoryFile, kDiagnosticsFile})
      if (!fs::is_regular_file(dir / name))
        throw Error("missing " + (dir / name).string());
    std::ifstream in(dir / kSummaryFile);
    const json summary = json::parse(in);
    cfg = parse_run_config(summary.at("config").dump());
    run_failed = summary.at("status").get<std::string>() != "ok";
    snapshots = read_trajectory(dir / kTrajectoryFile, cfg.length);
    stored = read_diagnostics(dir / kDiagnosticsFile);
    if (fs::is_regular_file(dir / kEntropyFile)) stored_s2 = read_csv(dir / kEntropyFile);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<DiagnosticsSample> fresh;
  try {
    fresh = evaluate(snapshots, cfg.params);
  } catch (const Error& e) {
    log << "error: cannot evaluate stored fields: " << e.what() << '\n';
    return kExitMismatch;
  }
  if (fresh.size() != stored.size()) {
    log << "mismatch: " << stored.size() << " diagnostics rows but " << fresh.size()
        << " snapshots\n";
    return kExitMismatch;
  }
  static constexpr const char* kNames[] = {"t",        "mass",     "energy",
                                           "cum_dissipation", "c0_bound", "entropy_integral",
                                           "c1_bound", "c3_bound", "s1",
                                           "peak_x",   "peak_h",   "speed_estimate"};
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    const DiagnosticsSample& a = stored[k];
    const DiagnosticsSample& b = fresh[k];
    const double sa[] = {a.t,        a.mass,     a.energy, a.cum_dissipation, a.c0_bound,
                         a.entropy_integral, a.c1_bound, a.c3_bound, a.s1, a.peak_x,
                         a.peak_h,   a.speed_estimate};
    const double sb[] = {b.t,        b.mass,     b.energy, b.cum_dissipation, b.c0_bound,
                         b.entropy_integral, b.c1_bound, b.c3_bound, b.s1, b.peak_x,
                         b.peak_h,   b.speed_estimate};
    for (std::size_t c = 0; c < std::size(sa); ++c) {
      if (!same(sa[c], sb[c])) {
        log << "mismatch: diagnostics.csv row " << k + 1 << " (t = " << format_number(a.t)
            << "), column " << kNames[c] << ": stored " << format_number(sa[c])
            << ", recomputed " << format_number(sb[c]) << '\n';
        return kExitMismatch;
      }
    }
    if (a.certified != b.certified) {
      log << "mismatch: diagnostics.csv row " << k + 1 << ", column certified\n";
      return kExitMismatch;
    }
    if (stored_s2) {
      if (k >= stored_s2->rows.size()) {
        log << "mismatch: entropy_s2.csv has too few rows\n";
        return kExitMismatch;
      }
      const auto& row = stored_s2->rows[k];
      if (row.size() != 3 || !same(parse_number(row[1]), b.s2.value_or(std::nan(""))) ||
          !same(parse_number(row[2]), b.c2_bound.value_or(std::nan("")))) {
        log << "mismatch: entropy_s2.csv row " << k + 1 << '\n';
        return kExitMismatch;
      }
    }
  }

  const CertificationReport report = certify(fresh, cfg.params);
  log << "recomputed " << fresh.size() << " samples; certification " << report.summary << '\n';
  if (!report.passed) return kExitMismatch;
  if (run_failed) {
    log << "stored run is marked as failed\n";
    return kExitMismatch;
  }
  log << "check passed\n";
  return kExitOk;
}

}  // namespace fibreflow
