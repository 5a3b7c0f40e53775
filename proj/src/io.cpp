#include "fibreflow/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "fibreflow/errors.hpp"

namespace fibreflow {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t column(const CsvTable& table, std::string_view name) {
  for (std::size_t k = 0; k < table.columns.size(); ++k)
    if (table.columns[k] == name) return k;
  throw Error("missing column '" + std::string(name) + "'");
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return {buf.data(), end};
}

double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw Error("malformed number '" + std::string(text) + "'");
  return value;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header) : out_(path) {
  if (!out_) throw Error("cannot write " + path.string());
  out_ << header << '\n';
}

void CsvWriter::mark_failure(const std::string& message) {
  out_ << "# FAILED " << message << '\n';
  out_.flush();
}

void write_snapshot(CsvWriter& out, const FieldState& state) {
  const std::string t = format_number(state.t);
  for (std::size_t i = 0; i < state.h.size(); ++i)
    out.write_line(t + ',' + format_number(state.grid().x(i)) + ',' + format_number(state.h[i]) +
                   ',' + format_number(state.u[i]));
  out.flush();
}

void write_diagnostics(CsvWriter& out, const DiagnosticsSample& s) {
  std::string line;
  for (double v : {s.t, s.mass, s.energy, s.cum_dissipation, s.c0_bound, s.entropy_integral,
                   s.c1_bound, s.c3_bound, s.s1, s.peak_x, s.peak_h, s.speed_estimate}) {
    line += format_number(v);
    line += ',';
  }
  line += s.certified ? "pass" : "fail";
  out.write_line(line);
  out.flush();
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    std::vector<std::string> cells = split(line);
    if (!have_header) {
      table.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size())
      throw Error(path.string() + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                  std::to_string(cells.size()) + " cells, expected " +
                  std::to_string(table.columns.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(path.string() + ": missing header row");
  return table;
}

std::vector<FieldState> read_trajectory(const std::filesystem::path& path, double length) {
  const CsvTable table = read_csv(path);
  const std::size_t ct = column(table, "t"), ch = column(table, "h"), cu = column(table, "u");
  std::vector<FieldState> out;
  std::size_t k = 0;
  while (k < table.rows.size()) {
    const std::string& stamp = table.rows[k][ct];
    std::vector<double> h, u;
    for (; k < table.rows.size() && table.rows[k][ct] == stamp; ++k) {
      h.push_back(parse_number(table.rows[k][ch]));
      u.push_back(parse_number(table.rows[k][cu]));
    }
    const Grid grid(length, h.size());
    if (!out.empty() && out.front().grid() != grid)
      throw Error(path.string() + ": snapshot at t = " + stamp + " has a different node count");
    out.push_back(FieldState{parse_number(stamp), PeriodicField(grid, std::move(h)),
                             PeriodicField(grid, std::move(u))});
  }
  return out;
}

std::vector<DiagnosticsSample> read_diagnostics(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  std::ostringstream expected_header;
  for (std::size_t k = 0; k < table.columns.size(); ++k)
    expected_header << (k ? "," : "") << table.columns[k];
  if (expected_header.str() != kDiagnosticsHeader)
    throw Error(path.string() + ": unexpected header '" + expected_header.str() + "'");
  std::vector<DiagnosticsSample> out;
  for (const auto& row : table.rows) {
    DiagnosticsSample s;
    double* fields[] = {&s.t,        &s.mass,     &s.energy, &s.cum_dissipation, &s.c0_bound,
                        &s.entropy_integral, &s.c1_bound, &s.c3_bound, &s.s1, &s.peak_x,
                        &s.peak_h,   &s.speed_estimate};
    for (std::size_t k = 0; k < std::size(fields); ++k) *fields[k] = parse_number(row[k]);
    if (row.back() != "pass" && row.back() != "fail")
      throw Error(path.string() + ": certified must be pass or fail");
    s.certified = row.back() == "pass";
    out.push_back(s);
  }
  return out;
}

void write_profile(const std::filesystem::path& path, const TravellingWave& wave,
                   double first_integral_violation, std::string_view status) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# s=" << format_number(wave.s) << '\n'
      << "# q0=" << format_number(wave.q0) << '\n'
      << "# M=" << format_number(wave.M) << '\n'
      << "# L=" << format_number(wave.grid().length()) << '\n'
      << "# first_integral_violation=" << format_number(first_integral_violation) << '\n'
      << "# N=" << wave.grid().size() << '\n'
      << "# iterations=" << wave.iterations << '\n'
      << "# residual_norm=" << format_number(wave.residual_norm) << '\n'
      << "# status=" << status << '\n'
      << "xi,H,U\n";
  for (std::size_t i = 0; i < wave.H.size(); ++i)
    out << format_number(wave.grid().x(i)) << ',' << format_number(wave.H[i]) << ','
        << format_number(wave.U[i]) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

ProfileFile read_profile(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  ProfileFile profile;
  for (std::string line : table.comments) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(' ');
      const auto e = s.find_last_not_of(' ');
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    profile.header[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const std::size_t cx = column(table, "xi"), ch = column(table, "H"), cu = column(table, "U");
  for (const auto& row : table.rows) {
    profile.xi.push_back(parse_number(row[cx]));
    profile.H.push_back(parse_number(row[ch]));
    profile.U.push_back(parse_number(row[cu]));
  }
  if (profile.xi.size() < 2) throw Error(path.string() + ": profile needs at least two rows");
  return profile;
}

}  // namespace fibreflow
