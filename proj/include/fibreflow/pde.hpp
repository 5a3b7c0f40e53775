#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fibreflow/grid.hpp"
#include "fibreflow/linalg.hpp"
#include "fibreflow/model.hpp"

namespace fibreflow {

/// Film radius h and mean axial velocity u at time t. v = h^2 - 1 is derived.
struct FieldState {
  double t = 0.0;
  PeriodicField h;
  PeriodicField u;

  const Grid& grid() const noexcept { return h.grid(); }
  PeriodicField v() const;
  /// Throws DegenerateFilmError when some v_i <= v_floor.
  void validate(double v_floor = 1e-10) const;
};

enum class JacobianMode { Analytic, FiniteDifference };
enum class TimeScheme { BackwardEuler, CrankNicolson };

struct StepperConfig {
  double dt = 1e-3;
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  JacobianMode jacobian_mode = JacobianMode::Analytic;
  TimeScheme scheme = TimeScheme::BackwardEuler;
  double v_floor = 1e-10;
  int max_halvings = 8;

  void validate() const;
};

/// h(x, 0) = h0 + amplitude sin(2 pi x / L), u(x, 0) = g(h(x, 0)).
FieldState initial_condition(const Grid& grid, double h0, double amplitude,
                             const ModelParams& params);

/// Unknowns and residual rows are interleaved per node:
/// index 2i holds h_i (row: mass), index 2i + 1 holds u_i (row: momentum).
std::vector<double> pack(const FieldState& state);
FieldState unpack(const Grid& grid, double t, std::span<const double> x);

/// Half-width of the periodic band of the interleaved Jacobian.
inline constexpr std::size_t kJacobianHalfWidth = 7;

/// Residual of one implicit time step from `prev` to `next` (dt = next.t - prev.t
/// is not used; `dt` is passed explicitly):
///   row 2i:   (v_i - v_i^old)/dt + a d1(u v)_i
///   row 2i+1: (u_i - u_i^old)/dt + a d1(u^2/2)_i + b d1(kappa)_i
///             - c Dvisc(u; v)_i / v_i - 1 + u_i/g(h_i)
/// with spatial terms at the new level (backward Euler) or averaged with the
/// old level (Crank-Nicolson).
std::vector<double> residual(const FieldState& next, const FieldState& prev, double dt,
                             const ModelParams& params,
                             TimeScheme scheme = TimeScheme::BackwardEuler);

CyclicBandedMatrix residual_jacobian(const FieldState& next, double dt,
                                     const ModelParams& params,
                                     TimeScheme scheme = TimeScheme::BackwardEuler);

CyclicBandedMatrix residual_jacobian_fd(const FieldState& next, const FieldState& prev,
                                        double dt, const ModelParams& params,
                                        TimeScheme scheme = TimeScheme::BackwardEuler);

struct StepReport {
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Advances `state` by cfg.dt with a damped Newton iteration.
FieldState step(const FieldState& state, const StepperConfig& cfg, const ModelParams& params,
                StepReport* report = nullptr);

/// Same as step() with an explicit step size (used to land on output times).
FieldState step(const FieldState& state, double dt, const StepperConfig& cfg,
                const ModelParams& params, StepReport* report = nullptr);

/// Snapshots at the requested output times.
struct Trajectory {
  std::vector<FieldState> snapshots;
  bool failed = false;
  std::string failure;
};

}  // namespace fibreflow
