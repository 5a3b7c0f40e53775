#include "fibreflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fibreflow/errors.hpp"

namespace fibreflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// v_x = 2 h h_x, evaluated pointwise from the stored radius.
PeriodicField v_slope(const FieldState& state) {
  PeriodicField vx = d1(state.h);
  for (std::size_t i = 0; i < vx.size(); ++i) vx[i] *= 2.0 * state.h[i];
  return vx;
}

double surface_energy(const FieldState& state, const ModelParams& params) {
  const PeriodicField hx = d1(state.h);
  PeriodicField density(state.grid());
  for (std::size_t i = 0; i < density.size(); ++i)
    density[i] = state.h[i] * arc_factor(hx[i]).value;
  return 4.0 * params.b / params.a * integrate(density);
}

// integral of C0 and sqrt(C0) over [0, t]; sqrt(C0) = alpha + beta t.
struct C0Integrals {
  double c0;
  double sqrt_c0;
};

C0Integrals c0_integrals(double t, double E0, double M) {
  const double alpha = std::sqrt(E0);
  const double beta = 0.5 * std::sqrt(2.0 * M);
  const double end = alpha + beta * t;
  // (end^3 - alpha^3) / (3 beta) without cancellation for small beta t
  const double c0 = t * (end * end + end * alpha + alpha * alpha) / 3.0;
  return {c0, alpha * t + 0.5 * beta * t * t};
}

}  // namespace

double mass(const FieldState& state) { return integrate(state.v()); }

double energy(const FieldState& state, const ModelParams& params) {
  const PeriodicField v = state.v();
  return 0.5 * (integrate(v * state.u * state.u) + surface_energy(state, params));
}

double dissipation_rate(const FieldState& state, const ModelParams& params) {
  const PeriodicField ux = d1(state.u);
  PeriodicField density(state.grid());
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = state.h[i] * state.h[i] - 1.0;
    const double u = state.u[i];
    density[i] = params.c * v * ux[i] * ux[i] + u * u * v / mobility_g(state.h[i], params);
  }
  return integrate(density);
}

double entropy_integral(const FieldState& state) {
  const PeriodicField vx = v_slope(state);
  PeriodicField density(state.grid());
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = state.h[i] * state.h[i] - 1.0;
    if (!(v > 0.0)) throw DegenerateFilmError(i, state.h[i]);
    density[i] = vx[i] * vx[i] / v;
  }
  return integrate(density);
}

double entropy_s1(const FieldState& state, const ModelParams& params) {
  if (params.profile != FlowProfile::Plug)
    throw ConfigError("entropy_s1 is defined for the plug-flow model only");
  const double a = params.a, c = params.c;
  const PeriodicField vx = v_slope(state);
  PeriodicField density(state.grid());
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = state.h[i] * state.h[i] - 1.0;
    if (!(v > 0.0)) throw DegenerateFilmError(i, state.h[i]);
    const double w = state.u[i] + c / a * vx[i] / v;
    density[i] = v * w * w + 2.0 * c / (a * a) * (v - std::log(v));
  }
  return 0.5 * (integrate(density) + surface_energy(state, params));
}

std::optional<double> entropy_s2(const FieldState& state, const ModelParams& params,
                                 const EntropyPotential& potential) {
  if (params.profile != FlowProfile::Laminar)
    throw ConfigError("entropy_s2 is defined for the laminar model only");
  if (state.h.min() < potential.floor()) return std::nullopt;
  const double a = params.a, c = params.c, e0 = params.epsilon0;
  const PeriodicField vx = v_slope(state);
  PeriodicField density(state.grid());
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = state.h[i] * state.h[i] - 1.0;
    const double w = state.u[i] + c / (a + e0) * vx[i] / v;
    density[i] = v * w * w + c * c * e0 / (a * (a + e0) * (a + e0)) * vx[i] * vx[i] / v +
                 4.0 * c / (a * (a + e0)) * (8.0 * v - potential(state.h[i]));
  }
  return 0.5 * (integrate(density) + surface_energy(state, params));
}

double c0_bound(double t, double E0, double M) {
  // Expanded square, so that C0(0) == E0 exactly.
  return E0 + std::sqrt(E0) * std::sqrt(2.0 * M) * t + 0.5 * M * t * t;
}

double c1_bound(double t, double S1_0, double M, double E0, const ModelParams& params) {
  const C0Integrals in = c0_integrals(t, E0, M);
  return S1_0 + params.c * in.c0 + std::sqrt(2.0 * M) * in.sqrt_c0;
}

double c3_bound(double t, double S1_0, double M, double E0, const ModelParams& params,
                std::optional<double> epsilon) {
  const double eps = epsilon.value_or(params.epsilon);
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  const double ratio = params.a / params.c;
  return ratio * ratio *
         (2.0 / (1.0 - eps) * c0_bound(t, E0, M) + 2.0 / eps * c1_bound(t, S1_0, M, E0, params));
}

double c2_bound(double t, double S2_0, double M, double E0, const ModelParams& params) {
  const double a = params.a, c = params.c, e0 = params.epsilon0;
  const C0Integrals in = c0_integrals(t, E0, M);
  return S2_0 + a * c / (a + e0) * in.c0 + std::sqrt(2.0 * M) * in.sqrt_c0 +
         16.0 * c * M / (e0 * (a + e0)) * t;
}

std::optional<Peak> locate_peak(const PeriodicField& h) {
  const auto it = std::max_element(h.begin(), h.end());
  const double hmax = *it, hmin = h.min();
  if (!(hmax - hmin > 1e-12 * std::max(1.0, std::abs(hmax)))) return std::nullopt;
  const auto i = static_cast<std::ptrdiff_t>(it - h.begin());
  const double fm = h.at(i - 1), f0 = hmax, fp = h.at(i + 1);
  const double curvature = fm - 2.0 * f0 + fp;
  double offset = 0.0;
  if (curvature < 0.0) offset = 0.5 * (fm - fp) / curvature;
  const double dx = h.grid().dx();
  double x = (static_cast<double>(i) + offset) * dx;
  const double L = h.grid().length();
  x = std::fmod(x + L, L);
  return Peak{x, f0 - 0.25 * (fm - fp) * offset};
}

std::optional<double> fit_speed(std::span<const double> times, std::span<const double> positions,
                                double window) {
  const std::size_t n = times.size();
  if (n < 3 || positions.size() != n) return std::nullopt;
  const auto count = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(window * static_cast<double>(n))));
  const std::size_t first = n - std::min(count, n);
  double tm = 0.0, xm = 0.0;
  for (std::size_t k = first; k < n; ++k) tm += times[k], xm += positions[k];
  const double m = static_cast<double>(n - first);
  tm /= m, xm /= m;
  double num = 0.0, den = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    num += (times[k] - tm) * (positions[k] - xm);
    den += (times[k] - tm) * (times[k] - tm);
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

namespace {

double unwrap(double previous, double wrapped, double L) {
  return previous + std::remainder(wrapped - previous, L);
}

// Bounds are anchored at the first sample of the run.
SampleVerdict verdict(const DiagnosticsSample& s, const DiagnosticsSample& first,
                      const ModelParams& params, std::optional<double> epsilon) {
  const double tau = s.t - first.t;
  const double c0 = c0_bound(tau, first.energy, first.mass);
  SampleVerdict v{s.t, c0 - (s.energy + s.cum_dissipation), std::nullopt, std::nullopt, true};
  v.pass = v.energy_margin > -64.0 * std::numeric_limits<double>::epsilon() * c0;
  if (params.profile == FlowProfile::Plug) {
    v.entropy_margin =
        c3_bound(tau, first.s1, first.mass, first.energy, params, epsilon) - s.entropy_integral;
    v.pass = v.pass && *v.entropy_margin > 0.0;
  } else if (first.s2 && s.s2) {
    v.s2_margin = c2_bound(tau, *first.s2, first.mass, first.energy, params) - *s.s2;
  }
  return v;
}

}  // namespace

WaveTrack track_wave(std::span<const FieldState> snapshots, double window) {
  WaveTrack track;
  if (snapshots.size() < 3) {
    track.message = "need at least 3 snapshots to track a wave";
    return track;
  }
  const double L = snapshots.front().grid().length();
  for (const FieldState& s : snapshots) {
    const auto peak = locate_peak(s.h);
    if (!peak) {
      track.message = "undefined peak at t = " + std::to_string(s.t) + " (flat profile)";
      track.times.clear();
      track.positions.clear();
      track.heights.clear();
      return track;
    }
    const double x = track.positions.empty() ? peak->x : unwrap(track.positions.back(), peak->x, L);
    track.times.push_back(s.t);
    track.positions.push_back(x);
    track.heights.push_back(peak->h);
  }
  track.speed = fit_speed(track.times, track.positions, window);
  return track;
}

DiagnosticsAccumulator::DiagnosticsAccumulator(const ModelParams& params) : params_(params) {
  if (params_.profile == FlowProfile::Laminar) potential_.emplace(params_);
}

const DiagnosticsSample& DiagnosticsAccumulator::add(const FieldState& state) {
  const bool plug = params_.profile == FlowProfile::Plug;
  DiagnosticsSample s;
  s.t = state.t;
  s.mass = mass(state);
  s.energy = energy(state, params_);
  s.dissipation_rate = dissipation_rate(state, params_);
  s.entropy_integral = entropy_integral(state);
  s.s1 = plug ? entropy_s1(state, params_) : kNaN;
  if (potential_) s.s2 = entropy_s2(state, params_, *potential_);

  if (samples_.empty()) {
    length_ = state.grid().length();
    s.cum_dissipation = 0.0;
  } else {
    const DiagnosticsSample& prev = samples_.back();
    s.cum_dissipation =
        prev.cum_dissipation + 0.5 * (s.t - prev.t) * (s.dissipation_rate + prev.dissipation_rate);
  }
  const DiagnosticsSample& first = samples_.empty() ? s : samples_.front();
  const double tau = s.t - first.t;
  s.c0_bound = c0_bound(tau, first.energy, first.mass);
  s.c1_bound = plug ? c1_bound(tau, first.s1, first.mass, first.energy, params_) : kNaN;
  s.c3_bound = plug ? c3_bound(tau, first.s1, first.mass, first.energy, params_) : kNaN;
  if (first.s2 && s.s2) s.c2_bound = c2_bound(tau, *first.s2, first.mass, first.energy, params_);

  if (const auto peak = locate_peak(state.h)) {
    const double x = peak_positions_.empty() ? peak->x : unwrap(peak_positions_.back(), peak->x, length_);
    peak_times_.push_back(s.t);
    peak_positions_.push_back(x);
    s.peak_x = peak->x;
    s.peak_h = peak->h;
  } else {
    s.peak_x = kNaN;
    s.peak_h = state.h.max();
  }
  s.speed_estimate = fit_speed(peak_times_, peak_positions_).value_or(kNaN);

  samples_.push_back(s);
  samples_.back().certified = verdict(samples_.back(), samples_.front(), params_, std::nullopt).pass;
  return samples_.back();
}

std::vector<DiagnosticsSample> evaluate(std::span<const FieldState> snapshots,
                                        const ModelParams& params) {
  DiagnosticsAccumulator acc(params);
  for (const FieldState& s : snapshots) acc.add(s);
  return acc.samples();
}

CertificationReport certify(std::span<const DiagnosticsSample> samples, const ModelParams& params,
                            std::optional<double> epsilon) {
  CertificationReport report;
  if (samples.empty()) {
    report.summary = "no samples";
    return report;
  }
  const DiagnosticsSample& first = samples.front();
  report.min_energy_margin = std::numeric_limits<double>::infinity();
  std::size_t failures = 0;
  for (const DiagnosticsSample& s : samples) {
    const SampleVerdict v = verdict(s, first, params, epsilon);
    if (v.entropy_margin)
      report.min_entropy_margin =
          std::min(report.min_entropy_margin.value_or(*v.entropy_margin), *v.entropy_margin);
    if (v.s2_margin)
      report.min_s2_margin = std::min(report.min_s2_margin.value_or(*v.s2_margin), *v.s2_margin);
    report.min_energy_margin = std::min(report.min_energy_margin, v.energy_margin);
    if (!v.pass) ++failures;
    report.samples.push_back(v);
  }
  report.passed = failures == 0;
  std::ostringstream out;
  out << (report.passed ? "pass" : "FAIL") << ": " << samples.size() - failures << "/"
      << samples.size() << " samples certified; min energy margin " << report.min_energy_margin;
  if (report.min_entropy_margin) out << "; min entropy margin " << *report.min_entropy_margin;
  if (report.min_s2_margin) out << "; min S2 margin (best-effort) " << *report.min_s2_margin;
  report.summary = out.str();
  return report;
}

}  // namespace fibreflow
