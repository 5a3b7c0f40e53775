#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fibreflow/errors.hpp"
#include "fibreflow/grid.hpp"
#include "fibreflow/linalg.hpp"
#include "fibreflow/model.hpp"
#include "fibreflow/pde.hpp"

namespace fibreflow {

/// Periodic travelling wave (H, U)(xi), xi = x - s t, with V = H^2 - 1.
/// q0 is the flux constant -V (s - a U).
struct TravellingWave {
  PeriodicField H;
  PeriodicField U;
  double s = 0.0;
  double M = 0.0;
  double q0 = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;

  const Grid& grid() const noexcept { return H.grid(); }
};

/// Initial guess from a (late-time) transient snapshot. When `speed` is not
/// given it is estimated by least squares from the continuity equation.
struct FromTrajectory {
  FieldState snapshot;
  std::optional<double> speed;
};

/// H = Hbar + amplitude cos(2 pi xi / L) rescaled to the mass, U = g(H),
/// s0 = a M / L (plug) or a mean(U) (laminar).
struct CosineBump {
  double amplitude = 0.5;
};

using InitialGuess = std::variant<FromTrajectory, CosineBump>;

struct TwSolveConfig {
  /// Node and value of the phase condition H(pin_index) = pin_value. When
  /// pin_value is empty the guess is rolled so its steepest descent sits at
  /// node 0 and the pin takes the guess value there.
  std::size_t pin_index = 0;
  std::optional<double> pin_value;
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 8;
  InitialGuess initial_guess = CosineBump{};
};

/// Guess fields and speed, on the solve grid.
struct TwGuess {
  PeriodicField H;
  PeriodicField U;
  double s = 0.0;
};

TwGuess make_guess(const InitialGuess& guess, const Grid& grid, double M,
                   const ModelParams& params);

/// Rolls `guess` so that argmin d1(H) sits at node 0; returns the pin value.
double pin_at_steepest_descent(TwGuess& guess);

/// Least-squares speed from -s V' + a (U V)' = 0.
double estimate_speed(const PeriodicField& H, const PeriodicField& U, const ModelParams& params);

/// Residual of the discrete travelling-wave system, length 2N + 1:
///   [0, N)        momentum: -s d1(U) + a d1(U^2/2) + b d1(kappa) - c Dvisc/V - 1 + U/g
///   [N, 2N-1)     flux: (q_i - q_{i-1}) / dx, i = 1..N-1, q = -V (s - a U)
///   2N-1          mass: integrate(H^2 - 1) - M
///   2N            pin:  H[pin_index] - pin_value
/// Unknown ordering for the Jacobian: H_0..H_{N-1}, U_0..U_{N-1}, s.
std::vector<double> tw_residual(const PeriodicField& H, const PeriodicField& U, double s,
                                double M, std::size_t pin_index, double pin_value,
                                const ModelParams& params);

DenseMatrix tw_jacobian(const PeriodicField& H, const PeriodicField& U, double s,
                        std::size_t pin_index, const ModelParams& params);

/// Centered continuity residual -s d1(V) + a d1(U V) at every node.
PeriodicField tw_continuity_centered(const PeriodicField& H, const PeriodicField& U, double s,
                                     const ModelParams& params);

/// Raised when Newton fails; carries the best iterate seen.
class TwConvergenceError : public ConvergenceError {
 public:
  TwConvergenceError(const std::string& what, TravellingWave best)
      : ConvergenceError(what, best.residual_norm, best.iterations), best_(std::move(best)) {}

  const TravellingWave& best() const noexcept { return best_; }

 private:
  TravellingWave best_;
};

/// Newton solve of the nonlinear eigenvalue problem for (H, U, s).
TravellingWave solve_tw(const TwSolveConfig& config, double M, const ModelParams& params,
                        const Grid& grid);

/// Newton solve from an explicit guess with a fixed pin.
TravellingWave solve_tw(TwGuess guess, std::size_t pin_index, double pin_value,
                        const TwSolveConfig& config, double M, const ModelParams& params);

struct FluxConstant {
  double q0;
  double spread;  // max deviation / |q0|, absolute when |q0| is tiny
};

FluxConstant flux_constant(const TravellingWave& wave, const ModelParams& params);

/// Maximum violation of the first integral
///   f(H') = A H + B / H + q0^2 / (4 a b H V)
/// along the wave, with A and B built by cumulative trapezoid quadrature from
/// xi = 0. Vanishes at xi = 0 by construction and converges at O(dx^2).
double first_integral_check(const TravellingWave& wave, const ModelParams& params);

/// U_c and q0/a from the two periodicity conditions of the first integral.
struct ClosedFormSpeed {
  double u_c;
  double q0_over_a;
  double delta;
};

/// Throws DomainError when the 2x2 determinant is numerically zero (which is
/// the case for every uniform state).
ClosedFormSpeed closed_form_speed(const TravellingWave& wave, const ModelParams& params);

struct TouchdownReport {
  bool touchdown = false;
  std::string message;
  double u_deviation = 0.0;          // max |U - s/a|
  double mean_radius = 0.0;          // (integral of H^2) / L
  double mean_radius_formula = 0.0;  // (integral H^2/g) / (integral 1/g)
  std::optional<double> plug_gap;    // mean_radius - (s/a + 1), plug only
};

/// Relations for waves with vanishing flux constant (U == s/a).
TouchdownReport touchdown_relations(const TravellingWave& wave, const ModelParams& params,
                                    double q0_tol = 1e-8);

/// Root count of (H^2 - 1)(H - B0) = -q0^2/(4ab) for H > 1 via the threshold
/// ((B0 + sqrt(B0^2 + 3))^2 - 9)(2 B0 - sqrt(B0^2 + 3)) / 27.
struct TwoRootCriterion {
  double lhs;        // q0^2 / (4ab)
  double threshold;  // value of the cubic's local extremum
  int roots;         // 0, 1 or 2
};

TwoRootCriterion two_root_criterion(double b0, double q0, const ModelParams& params);

}  // namespace fibreflow
