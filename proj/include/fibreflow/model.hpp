#pragma once

#include <string_view>
#include <vector>

namespace fibreflow {

/// Cross-sectional velocity profile closure used for the drag term.
enum class FlowProfile { Plug, Laminar };

std::string_view to_string(FlowProfile profile);
FlowProfile parse_profile(std::string_view name);

/// Dimensionless constants of the control-volume model.
///
/// `a` is the squared Froude number, `b` the reciprocal Bond number and `c`
/// the ratio of axial viscous to gravitational forces. `epsilon` is the
/// interpolation parameter of the plug-flow v_x^2/v bound and `epsilon0` the
/// laminar entropy parameter. `g_floor` and `g_ref` configure the laminar
/// entropy potential (see EntropyPotential).
struct ModelParams {
  double a = 0.2;
  double b = 10.0;
  double c = 1.0;
  FlowProfile profile = FlowProfile::Plug;
  double epsilon = 0.5;
  double epsilon0 = 0.1;
  double g_floor = 1.05;
  double g_ref = 0.0;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

/// f(z) = (1 + z^2)^(-1/2).
double slope_factor(double z);

struct ArcFactor {
  double value;   // Phi(z) = (1 + z^2)^(1/2)
  double first;   // Phi'(z) = z f(z)
  double second;  // Phi''(z) = f(z)^3
};

ArcFactor arc_factor(double z);

/// Laminar profile integral I(h) = [4h^4 ln h + (h^2-1)(1-3h^2)] / 16.
///
/// For h - 1 < 1e-2 a Taylor series about h = 1 replaces the closed form,
/// which otherwise cancels two O(1) terms down to O((h-1)^3).
double laminar_I(double h);
double laminar_I_derivative(double h);

/// Drag mobility g(h): h^2 - 1 (plug) or I(h)/(h^2 - 1) (laminar).
/// Throws DomainError for h <= 1, where u/g is undefined.
double mobility_g(double h, const ModelParams& params);
double mobility_g_derivative(double h, const ModelParams& params);

/// kappa = f(h_x)/h - f(h_x)^3 h_xx.
double curvature(double h, double hx, double hxx);

/// Laminar entropy potential G with G'(h) = h / g(h).
///
/// The additive constant is fixed by G(2) = params.g_ref. The integrand
/// behaves like 6/(h-1)^2 near the fibre, so G diverges as h -> 1 and is only
/// available for h >= params.g_floor. Values are served from an immutable
/// table in log(h - 1) built once at construction; beyond the table the
/// integral is continued by Gauss-Legendre panels.
class EntropyPotential {
 public:
  static constexpr double kReferenceRadius = 2.0;

  explicit EntropyPotential(const ModelParams& params);

  double operator()(double h) const;
  double derivative(double h) const;
  double floor() const noexcept { return floor_; }

 private:
  double integrand_t(double t) const;

  ModelParams params_;
  double floor_;
  double t_min_;
  double dt_;
  long k_min_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

}  // namespace fibreflow
