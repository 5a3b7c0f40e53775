#include "fibreflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fibreflow/errors.hpp"
#include "spatial_operator.hpp"

namespace fibreflow {

using detail::MomentumOperator;
using detail::Var;

PeriodicField FieldState::v() const {
  PeriodicField out(h.grid());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i] * h[i] - 1.0;
  return out;
}

void FieldState::validate(double v_floor) const {
  if (!(h.grid() == u.grid())) throw ConfigError("h and u live on different grids");
  detail::require_film(h.values(), v_floor);
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("stepper dt must be positive");
  if (!(newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be >= 1");
  if (!(v_floor >= 0.0)) throw ConfigError("v_floor must be non-negative");
  if (max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
}

FieldState initial_condition(const Grid& grid, double h0, double amplitude,
                             const ModelParams& params) {
  if (!(h0 - std::abs(amplitude) > 1.0))
    throw ConfigError("initial film touches the fibre: h0 - |amplitude| must exceed 1");
  const double k = 2.0 * std::numbers::pi / grid.length();
  FieldState state{0.0, PeriodicField::sample(grid, [&](double x) {
                          return h0 + amplitude * std::sin(k * x);
                        }),
                   PeriodicField(grid)};
  for (std::size_t i = 0; i < grid.size(); ++i) state.u[i] = mobility_g(state.h[i], params);
  return state;
}

std::vector<double> pack(const FieldState& state) {
  const std::size_t n = state.h.size();
  std::vector<double> x(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    x[2 * i] = state.h[i];
    x[2 * i + 1] = state.u[i];
  }
  return x;
}

FieldState unpack(const Grid& grid, double t, std::span<const double> x) {
  FieldState state{t, PeriodicField(grid), PeriodicField(grid)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    state.h[i] = x[2 * i];
    state.u[i] = x[2 * i + 1];
  }
  return state;
}

namespace {

double theta_of(TimeScheme scheme) { return scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0; }

// Spatial part of both equations, interleaved like the residual.
std::vector<double> spatial(const FieldState& s, const ModelParams& params) {
  const std::size_t n = s.h.size();
  const double dx = s.grid().dx();
  std::vector<double> mom(n);
  MomentumOperator(params, dx).evaluate(s.h.values(), s.u.values(), mom);
  std::vector<double> out(2 * n);
  const double scale = params.a * 0.5 / dx;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double fp = s.u[ip] * (s.h[ip] * s.h[ip] - 1.0);
    const double fm = s.u[im] * (s.h[im] * s.h[im] - 1.0);
    out[2 * i] = (fp - fm) * scale;
    out[2 * i + 1] = mom[i];
  }
  return out;
}

double max_abs(std::span<const double> r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<double> residual(const FieldState& next, const FieldState& prev, double dt,
                             const ModelParams& params, TimeScheme scheme) {
  detail::require_film(next.h.values(), 0.0);
  const std::size_t n = next.h.size();
  const double theta = theta_of(scheme);
  std::vector<double> r = spatial(next, params);
  std::vector<double> old;
  if (theta < 1.0) old = spatial(prev, params);
  for (std::size_t i = 0; i < n; ++i) {
    const double v_new = next.h[i] * next.h[i] - 1.0;
    const double v_old = prev.h[i] * prev.h[i] - 1.0;
    double& rm = r[2 * i];
    double& ru = r[2 * i + 1];
    rm *= theta;
    ru *= theta;
    if (theta < 1.0) {
      rm += (1.0 - theta) * old[2 * i];
      ru += (1.0 - theta) * old[2 * i + 1];
    }
    rm += (v_new - v_old) / dt;
    ru += (next.u[i] - prev.u[i]) / dt;
  }
  return r;
}

CyclicBandedMatrix residual_jacobian(const FieldState& next, double dt,
                                     const ModelParams& params, TimeScheme scheme) {
  detail::require_film(next.h.values(), 0.0);
  const std::size_t n = next.h.size();
  const double theta = theta_of(scheme);
  const double dx = next.grid().dx();
  CyclicBandedMatrix jac(2 * n, kJacobianHalfWidth);

  MomentumOperator(params, dx).jacobian(
      next.h.values(), next.u.values(), [&](std::size_t row, Var var, std::size_t col, double v) {
        jac.add(2 * row + 1, 2 * col + (var == Var::U ? 1 : 0), theta * v);
      });

  const double scale = theta * params.a * 0.5 / dx;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    jac.add(2 * i, 2 * i, 2.0 * next.h[i] / dt);
    jac.add(2 * i, 2 * ip, scale * next.u[ip] * 2.0 * next.h[ip]);
    jac.add(2 * i, 2 * ip + 1, scale * (next.h[ip] * next.h[ip] - 1.0));
    jac.add(2 * i, 2 * im, -scale * next.u[im] * 2.0 * next.h[im]);
    jac.add(2 * i, 2 * im + 1, -scale * (next.h[im] * next.h[im] - 1.0));
    jac.add(2 * i + 1, 2 * i + 1, 1.0 / dt);
  }
  return jac;
}

CyclicBandedMatrix residual_jacobian_fd(const FieldState& next, const FieldState& prev,
                                        double dt, const ModelParams& params,
                                        TimeScheme scheme) {
  const std::size_t n = next.h.size();
  const Grid& grid = next.grid();
  CyclicBandedMatrix jac(2 * n, kJacobianHalfWidth);
  std::vector<double> x = pack(next);
  const std::vector<double> r0 = residual(next, prev, dt, params, scheme);
  const auto w = static_cast<std::ptrdiff_t>(kJacobianHalfWidth);
  const auto nn = static_cast<std::ptrdiff_t>(2 * n);
  for (std::size_t j = 0; j < 2 * n; ++j) {
    const double saved = x[j];
    const double step = 1e-7 * std::max(1.0, std::abs(saved));
    x[j] = saved + step;
    const std::vector<double> r1 = residual(unpack(grid, next.t, x), prev, dt, params, scheme);
    x[j] = saved;
    for (std::ptrdiff_t off = -w; off <= w; ++off) {
      const auto i = static_cast<std::size_t>((static_cast<std::ptrdiff_t>(j) + off + nn) % nn);
      jac.add(i, j, (r1[i] - r0[i]) / step);
    }
  }
  return jac;
}

FieldState step(const FieldState& state, const StepperConfig& cfg, const ModelParams& params,
                StepReport* report) {
  return step(state, cfg.dt, cfg, params, report);
}

FieldState step(const FieldState& state, double dt, const StepperConfig& cfg,
                const ModelParams& params, StepReport* report) {
  state.validate(cfg.v_floor);
  const Grid& grid = state.grid();
  const double t_new = state.t + dt;
  std::vector<double> x = pack(state);
  FieldState current = state;
  current.t = t_new;
  std::vector<double> r = residual(current, state, dt, params, cfg.scheme);
  double norm = max_abs(r);

  for (int it = 0;; ++it) {
    if (norm <= cfg.newton_tol) {
      if (report != nullptr) *report = {it, norm};
      return current;
    }
    if (it >= cfg.newton_max_iter)
      throw ConvergenceError("time step Newton iteration did not converge at t = " +
                                 std::to_string(t_new),
                             norm, it);

    const CyclicBandedMatrix jac =
        cfg.jacobian_mode == JacobianMode::Analytic
            ? residual_jacobian(current, dt, params, cfg.scheme)
            : residual_jacobian_fd(current, state, dt, params, cfg.scheme);
    for (double& v : r) v = -v;
    const std::vector<double> delta = solve_cyclic_banded(jac, r);

    double lambda = 1.0;
    bool accepted = false;
    std::size_t bad_node = 0;
    double bad_h = 0.0;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, lambda *= 0.5) {
      std::vector<double> trial(x);
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] += lambda * delta[k];
      FieldState candidate = unpack(grid, t_new, trial);
      try {
        candidate.validate(cfg.v_floor);
      } catch (const DegenerateFilmError& e) {
        bad_node = e.node();
        bad_h = e.h();
        continue;
      }
      std::vector<double> r_trial = residual(candidate, state, dt, params, cfg.scheme);
      const double trial_norm = max_abs(r_trial);
      if (trial_norm < norm || halving == cfg.max_halvings) {
        x = std::move(trial);
        current = std::move(candidate);
        r = std::move(r_trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw DegenerateFilmError(bad_node, bad_h);
  }
}

}  // namespace fibreflow
