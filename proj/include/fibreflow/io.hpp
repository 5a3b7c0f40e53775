#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fibreflow/diagnostics.hpp"
#include "fibreflow/pde.hpp"
#include "fibreflow/travelling.hpp"

namespace fibreflow {

/// Shortest decimal that round-trips to the same binary64; "nan" for NaN.
std::string format_number(double value);

/// Inverse of format_number; throws Error on anything else.
double parse_number(std::string_view text);

inline constexpr std::string_view kTrajectoryHeader = "t,x,h,u";
inline constexpr std::string_view kDiagnosticsHeader =
    "t,mass,energy,cum_dissipation,c0_bound,entropy_integral,c1_bound,c3_bound,s1,peak_x,peak_h,"
    "speed_estimate,certified";

/// Line-oriented CSV writer that flushes after every record group. A failed
/// run ends with a "# FAILED ..." comment line.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header);

  void write_line(const std::string& line) { out_ << line << '\n'; }
  void flush() { out_.flush(); }
  void mark_failure(const std::string& message);

 private:
  std::ofstream out_;
};

/// Appends the snapshot as N rows t,x,h,u.
void write_snapshot(CsvWriter& out, const FieldState& state);

/// Appends one diagnostics row.
void write_diagnostics(CsvWriter& out, const DiagnosticsSample& sample);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // lines starting with '#', without the '#'
};

/// Reads a comma-separated file with a header row; '#' lines are collected as
/// comments. Throws Error on ragged rows or a missing header.
CsvTable read_csv(const std::filesystem::path& path);

/// Snapshots from a t,x,h,u file on a grid of the given length.
std::vector<FieldState> read_trajectory(const std::filesystem::path& path, double length);

/// Rows of a diagnostics file (s2 and c2_bound are not stored there).
std::vector<DiagnosticsSample> read_diagnostics(const std::filesystem::path& path);

/// Travelling-wave profile: "# key=value" header lines then xi,H,U.
void write_profile(const std::filesystem::path& path, const TravellingWave& wave,
                   double first_integral_violation, std::string_view status);

struct ProfileFile {
  std::map<std::string, std::string> header;
  std::vector<double> xi;
  std::vector<double> H;
  std::vector<double> U;
};

ProfileFile read_profile(const std::filesystem::path& path);

}  // namespace fibreflow
