#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fibreflow/model.hpp"
#include "fibreflow/pde.hpp"

namespace fibreflow {

/// integrate(v).
double mass(const FieldState& state);

/// E = 1/2 integral (v u^2 + (4b/a) h Phi(h_x)).
double energy(const FieldState& state, const ModelParams& params);

/// Rate c integral(v u_x^2) + integral(u^2 v / g) whose time integral is I(t).
double dissipation_rate(const FieldState& state, const ModelParams& params);

/// integral v_x^2 / v with v_x = 2 h d1(h).
double entropy_integral(const FieldState& state);

/// S1 = 1/2 integral [v (u + (c/a) v_x/v)^2 + (4b/a) h Phi(h_x) + (2c/a^2)(v - log v)].
/// Plug flow only.
double entropy_s1(const FieldState& state, const ModelParams& params);

/// S2 for the laminar model; empty when min h is below the potential's floor.
std::optional<double> entropy_s2(const FieldState& state, const ModelParams& params,
                                 const EntropyPotential& potential);

/// C0(t) = (sqrt(E0) + sqrt(2M)/2 t)^2.
double c0_bound(double t, double E0, double M);

/// C1(t) = S1(0) + int_0^t (c C0 + sqrt(2M) sqrt(C0)), in closed form.
double c1_bound(double t, double S1_0, double M, double E0, const ModelParams& params);

/// C3(t) = (a/c)^2 [2/(1-eps) C0 + 2/eps C1]; eps defaults to params.epsilon.
double c3_bound(double t, double S1_0, double M, double E0, const ModelParams& params,
                std::optional<double> epsilon = std::nullopt);

/// C2(t) = S2(0) + int_0^t (ac/(a+eps0) C0 + sqrt(2M) sqrt(C0) + 16cM/(eps0 (a+eps0))).
double c2_bound(double t, double S2_0, double M, double E0, const ModelParams& params);

struct Peak {
  double x;
  double h;
};

/// Argmax of h refined by a three-point parabola; empty for a flat profile.
std::optional<Peak> locate_peak(const PeriodicField& h);

struct WaveTrack {
  std::vector<double> times;
  std::vector<double> positions;  // unwrapped peak positions
  std::vector<double> heights;
  std::optional<double> speed;
  std::string message;  // empty unless the track is undefined
};

/// Peak positions of every snapshot, unwrapped modulo L, and the speed from a
/// least-squares line through the trailing `window` fraction of the samples.
WaveTrack track_wave(std::span<const FieldState> snapshots, double window = 0.5);

/// Least-squares slope of positions against times over the trailing window.
std::optional<double> fit_speed(std::span<const double> times, std::span<const double> positions,
                                double window = 0.5);

struct DiagnosticsSample {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double dissipation_rate = 0.0;
  double cum_dissipation = 0.0;
  double c0_bound = 0.0;
  double entropy_integral = 0.0;
  double s1 = 0.0;        // nan for laminar runs
  double c1_bound = 0.0;  // nan for laminar runs
  double c3_bound = 0.0;  // nan for laminar runs
  std::optional<double> s2;
  std::optional<double> c2_bound;
  double peak_x = 0.0;  // nan for a flat profile
  double peak_h = 0.0;
  double speed_estimate = 0.0;  // nan until three peaks are known
  bool certified = false;
};

/// Folds snapshots into diagnostics samples in time order. The first sample
/// fixes E0, S1(0), S2(0) and M for the bounds; I(t) is accumulated with the
/// trapezoidal rule over samples.
class DiagnosticsAccumulator {
 public:
  explicit DiagnosticsAccumulator(const ModelParams& params);

  const DiagnosticsSample& add(const FieldState& state);
  const std::vector<DiagnosticsSample>& samples() const noexcept { return samples_; }

 private:
  ModelParams params_;
  std::optional<EntropyPotential> potential_;
  std::vector<DiagnosticsSample> samples_;
  std::vector<double> peak_times_;
  std::vector<double> peak_positions_;
  double length_ = 0.0;
};

std::vector<DiagnosticsSample> evaluate(std::span<const FieldState> snapshots,
                                        const ModelParams& params);

struct SampleVerdict {
  double t;
  double energy_margin;                 // C0 - (E + I)
  std::optional<double> entropy_margin;  // C3 - integral v_x^2/v, plug only
  std::optional<double> s2_margin;       // C2 - S2, laminar best-effort
  bool pass;
};

struct CertificationReport {
  std::vector<SampleVerdict> samples;
  bool passed = true;
  double min_energy_margin = 0.0;
  std::optional<double> min_entropy_margin;
  std::optional<double> min_s2_margin;
  std::string summary;
};

/// Checks E + I <= C0 at every sample and, for plug flow, the v_x^2/v bound
/// against C3 with the given eps (params.epsilon by default). The laminar S2
/// inequality is reported but does not affect the verdict. The t = 0 sample
/// holds the energy bound with equality, so margins down to -64 ulp of C0 pass.
CertificationReport certify(std::span<const DiagnosticsSample> samples, const ModelParams& params,
                            std::optional<double> epsilon = std::nullopt);

}  // namespace fibreflow
