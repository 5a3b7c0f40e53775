#include "fibreflow/travelling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatial_operator.hpp"

namespace fibreflow {

using detail::MomentumOperator;
using detail::Var;

namespace {

double max_abs(std::span<const double> r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double dx) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * dx * (f[i] + f[i - 1]);
  return out;
}

}  // namespace

double estimate_speed(const PeriodicField& H, const PeriodicField& U, const ModelParams& params) {
  PeriodicField V(H.grid());
  PeriodicField UV(H.grid());
  for (std::size_t i = 0; i < H.size(); ++i) {
    V[i] = H[i] * H[i] - 1.0;
    UV[i] = U[i] * V[i];
  }
  const PeriodicField dV = d1(V);
  const PeriodicField dUV = d1(UV);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    num += dUV[i] * dV[i];
    den += dV[i] * dV[i];
  }
  if (!(den > 0.0)) throw DomainError("estimate_speed: flat profile has no defined speed");
  return params.a * num / den;
}

TwGuess make_guess(const InitialGuess& guess, const Grid& grid, double M,
                   const ModelParams& params) {
  if (const auto* from = std::get_if<FromTrajectory>(&guess)) {
    PeriodicField H = from->snapshot.grid() == grid ? from->snapshot.h
                                                    : resample_linear(from->snapshot.h, grid);
    PeriodicField U = from->snapshot.grid() == grid ? from->snapshot.u
                                                    : resample_linear(from->snapshot.u, grid);
    const double s = from->speed ? *from->speed : estimate_speed(H, U, params);
    return {std::move(H), std::move(U), s};
  }
  const double amplitude = std::get<CosineBump>(guess).amplitude;
  const double L = grid.length();
  const double k = 2.0 * std::numbers::pi / L;
  PeriodicField H = PeriodicField::sample(grid, [&](double x) {
    return std::sqrt(1.0 + M / L) + amplitude * std::cos(k * x);
  });
  // Rescale so integrate(H^2) = M + L.
  for (int pass = 0; pass < 50; ++pass) {
    const double target = M + L;
    const double current = integrate(H * H);
    const double factor = std::sqrt(target / current);
    for (double& h : H) h *= factor;
    if (std::abs(factor - 1.0) < 1e-15) break;
  }
  if (!(H.min() > 1.0))
    throw ConfigError("cosine guess touches the fibre; reduce the amplitude");
  PeriodicField U(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) U[i] = mobility_g(H[i], params);
  double s = 0.0;
  if (params.profile == FlowProfile::Plug) {
    s = params.a * M / L;
  } else {
    double mean = 0.0;
    for (double u : U) mean += u;
    s = params.a * mean / static_cast<double>(grid.size());
  }
  return {std::move(H), std::move(U), s};
}

double pin_at_steepest_descent(TwGuess& guess) {
  const PeriodicField slope = d1(guess.H);
  const auto it = std::min_element(slope.begin(), slope.end());
  const auto idx = static_cast<std::ptrdiff_t>(it - slope.begin());
  guess.H = shift(guess.H, -idx);
  guess.U = shift(guess.U, -idx);
  return guess.H[0];
}

std::vector<double> tw_residual(const PeriodicField& H, const PeriodicField& U, double s,
                                double M, std::size_t pin_index, double pin_value,
                                const ModelParams& params) {
  detail::require_film(H.values(), 0.0);
  const std::size_t n = H.size();
  const double dx = H.grid().dx();
  std::vector<double> r(2 * n + 1);
  MomentumOperator(params, dx).evaluate(H.values(), U.values(), std::span(r).first(n));
  const double inv2dx = 0.5 / dx;
  for (std::size_t i = 0; i < n; ++i)
    r[i] -= s * (U[(i + 1) % n] - U[(i + n - 1) % n]) * inv2dx;

  const auto flux = [&](std::size_t i) {
    const double v = H[i] * H[i] - 1.0;
    return -v * (s - params.a * U[i]);
  };
  for (std::size_t i = 1; i < n; ++i) r[n + i - 1] = (flux(i) - flux(i - 1)) / dx;

  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass += H[i] * H[i] - 1.0;
  r[2 * n - 1] = mass * dx - M;
  r[2 * n] = H[pin_index] - pin_value;
  return r;
}

DenseMatrix tw_jacobian(const PeriodicField& H, const PeriodicField& U, double s,
                        std::size_t pin_index, const ModelParams& params) {
  detail::require_film(H.values(), 0.0);
  const std::size_t n = H.size();
  const double dx = H.grid().dx();
  const std::size_t col_s = 2 * n;
  DenseMatrix jac(2 * n + 1, 2 * n + 1);

  MomentumOperator(params, dx).jacobian(
      H.values(), U.values(), [&](std::size_t row, Var var, std::size_t col, double v) {
        jac(row, var == Var::U ? n + col : col) += v;
      });
  const double inv2dx = 0.5 / dx;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    jac(i, n + ip) -= s * inv2dx;
    jac(i, n + im) += s * inv2dx;
    jac(i, col_s) = -(U[ip] - U[im]) * inv2dx;
  }

  // dq_i: q = -V s + a U V
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t row = n + i - 1;
    for (std::size_t j : {i, i - 1}) {
      const double sign = (j == i) ? 1.0 : -1.0;
      const double v = H[j] * H[j] - 1.0;
      jac(row, j) += sign * 2.0 * H[j] * (params.a * U[j] - s) / dx;
      jac(row, n + j) += sign * params.a * v / dx;
      jac(row, col_s) += sign * (-v) / dx;
    }
  }
  for (std::size_t j = 0; j < n; ++j) jac(2 * n - 1, j) = 2.0 * H[j] * dx;
  jac(2 * n, pin_index) = 1.0;
  return jac;
}

PeriodicField tw_continuity_centered(const PeriodicField& H, const PeriodicField& U, double s,
                                     const ModelParams& params) {
  PeriodicField q(H.grid());
  for (std::size_t i = 0; i < H.size(); ++i) q[i] = -s * (H[i] * H[i] - 1.0) + params.a * U[i] * (H[i] * H[i] - 1.0);
  return d1(q);
}

TravellingWave solve_tw(const TwSolveConfig& config, double M, const ModelParams& params,
                        const Grid& grid) {
  TwGuess guess = make_guess(config.initial_guess, grid, M, params);
  std::size_t pin_index = config.pin_index;
  double pin_value = 0.0;
  if (config.pin_value) {
    pin_value = *config.pin_value;
  } else {
    pin_value = pin_at_steepest_descent(guess);
    pin_index = 0;
  }
  return solve_tw(std::move(guess), pin_index, pin_value, config, M, params);
}

TravellingWave solve_tw(TwGuess guess, std::size_t pin_index, double pin_value,
                        const TwSolveConfig& config, double M, const ModelParams& params) {
  const Grid grid = guess.H.grid();
  const std::size_t n = grid.size();
  if (pin_index >= n) throw ConfigError("pin_index outside the grid");
  if (!(pin_value >= guess.H.min() && pin_value <= guess.H.max()))
    throw ConfigError("pin value is not attained by the initial guess");
  if (!(M > 0.0)) throw ConfigError("mass M must be positive");
  detail::require_film(guess.H.values(), 0.0);

  PeriodicField H = std::move(guess.H);
  PeriodicField U = std::move(guess.U);
  double s = guess.s;

  const auto assemble = [&](int iterations, double norm) {
    TravellingWave wave{H, U, s, M, 0.0, iterations, norm};
    wave.q0 = flux_constant(wave, params).q0;
    return wave;
  };

  std::vector<double> r = tw_residual(H, U, s, M, pin_index, pin_value, params);
  double norm = max_abs(r);
  double previous_update = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    if (norm <= config.tol) return assemble(it, norm);
    if (it >= config.max_iter)
      throw TwConvergenceError("travelling-wave Newton iteration did not converge",
                               assemble(it, norm));

    DenseMatrix jac = tw_jacobian(H, U, s, pin_index, params);
    for (double& v : r) v = -v;
    std::vector<double> delta;
    try {
      delta = solve_dense(std::move(jac), r);
    } catch (const SingularMatrixError& e) {
      throw TwConvergenceError(
          std::string("singular travelling-wave Jacobian (pin value may not be attainable): ") +
              e.what(),
          assemble(it, norm));
    }

    // Newton has reached the rounding floor of the residual: the update no
    // longer changes the iterate at working precision.
    const double update = max_abs(delta);
    const double scale = std::max({1.0, H.max(), std::abs(s)});
    if (update <= 1e-13 * scale && previous_update <= 1e-9 * scale &&
        norm <= 10.0 * config.tol)
      return assemble(it, norm);
    previous_update = update;

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= config.max_halvings; ++halving, lambda *= 0.5) {
      PeriodicField H_try = H, U_try = U;
      for (std::size_t i = 0; i < n; ++i) {
        H_try[i] += lambda * delta[i];
        U_try[i] += lambda * delta[n + i];
      }
      if (!(H_try.min() > 1.0)) continue;
      const double s_try = s + lambda * delta[2 * n];
      std::vector<double> r_try = tw_residual(H_try, U_try, s_try, M, pin_index, pin_value, params);
      const double norm_try = max_abs(r_try);
      if (norm_try < norm || halving == config.max_halvings) {
        H = std::move(H_try);
        U = std::move(U_try);
        s = s_try;
        r = std::move(r_try);
        norm = norm_try;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw TwConvergenceError("travelling-wave Newton step drove the film onto the fibre",
                               assemble(it, norm));
  }
}

FluxConstant flux_constant(const TravellingWave& wave, const ModelParams& params) {
  const std::size_t n = wave.H.size();
  std::vector<double> q(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = wave.H[i] * wave.H[i] - 1.0;
    q[i] = -v * (wave.s - params.a * wave.U[i]);
    mean += q[i];
  }
  mean /= static_cast<double>(n);
  double dev = 0.0;
  for (double qi : q) dev = std::max(dev, std::abs(qi - mean));
  const double spread = std::abs(mean) > 1e-12 ? dev / std::abs(mean) : dev;
  return {mean, spread};
}

double first_integral_check(const TravellingWave& wave, const ModelParams& params) {
  const std::size_t n = wave.H.size();
  const Grid& grid = wave.grid();
  const double dx = grid.dx();
  const double a = params.a, b = params.b, c = params.c;
  const double q0 = wave.q0;
  const double u_c = wave.s / a;

  PeriodicField V(grid);
  for (std::size_t i = 0; i < n; ++i) {
    V[i] = wave.H[i] * wave.H[i] - 1.0;
    if (!(V[i] > 0.0)) throw DegenerateFilmError(i, wave.H[i]);
  }
  const PeriodicField dV = d1(V);
  PeriodicField log_slope(grid);
  for (std::size_t i = 0; i < n; ++i) log_slope[i] = dV[i] / V[i];
  const PeriodicField dlog_slope = d1(log_slope);
  const PeriodicField dH = d1(wave.H);

  // G'(xi)
  std::vector<double> gprime(n + 1), gprime_h2(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const std::size_t i = j % n;
    const double g = mobility_g(wave.H[i], params);
    gprime[j] = (u_c / g + q0 / (a * V[i] * g) - 1.0 + (c * q0 / a) * dlog_slope[i] / V[i]) / b;
    gprime_h2[j] = gprime[j] * wave.H[i] * wave.H[i];
  }
  const std::vector<double> G = cumulative_trapezoid(gprime, dx);
  const std::vector<double> Bint = cumulative_trapezoid(gprime_h2, dx);

  const double coupling = q0 * q0 / (4.0 * a * b);
  // kappa + q0^2/(2ab V^2) + G is constant along the wave.
  const detail::MomentumOperator op(params, dx);
  const double kappa0 = op.kappa(wave.H.values(), 0);
  const double K = kappa0 + 2.0 * coupling / (V[0] * V[0]);
  const double h0 = wave.H[0];
  const double f0 = slope_factor(dH[0]);
  const double A0 = 0.5 * K;
  const double B0 = h0 * f0 - A0 * h0 * h0 - coupling / V[0];

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double A = 0.5 * (K - G[i]);
    const double B = B0 + 0.5 * Bint[i];
    const double h = wave.H[i];
    const double rhs = A * h + B / h + coupling / (h * V[i]);
    worst = std::max(worst, std::abs(slope_factor(dH[i]) - rhs));
  }
  return worst;
}

ClosedFormSpeed closed_form_speed(const TravellingWave& wave, const ModelParams& params) {
  const Grid& grid = wave.grid();
  const std::size_t n = grid.size();
  const double L = grid.length();
  PeriodicField V(grid);
  for (std::size_t i = 0; i < n; ++i) {
    V[i] = wave.H[i] * wave.H[i] - 1.0;
    if (!(V[i] > 0.0)) throw DegenerateFilmError(i, wave.H[i]);
  }
  const PeriodicField dV = d1(V);
  double inv_g = 0, h2_g = 0, inv_vg = 0, h2_vg = 0, v_g = 0, dv2_v3 = 0, h2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = mobility_g(wave.H[i], params);
    const double hh = wave.H[i] * wave.H[i];
    inv_g += 1.0 / g;
    h2_g += hh / g;
    inv_vg += 1.0 / (V[i] * g);
    h2_vg += hh / (V[i] * g);
    v_g += V[i] / g;
    dv2_v3 += dV[i] * dV[i] / (V[i] * V[i] * V[i]);
    h2 += hh;
  }
  const double dx = grid.dx();
  inv_g *= dx, h2_g *= dx, inv_vg *= dx, h2_vg *= dx, v_g *= dx, dv2_v3 *= dx, h2 *= dx;
  const double c = params.c;
  const double t1 = inv_g * h2_vg, t2 = h2_g * inv_vg, t3 = c * v_g * dv2_v3;
  const double delta = t1 - t2 - t3;
  if (!(std::abs(delta) > 1e-12 * (std::abs(t1) + std::abs(t2) + std::abs(t3))))
    throw DomainError("closed_form_speed: degenerate determinant (Delta = " +
                      std::to_string(delta) + ")");
  const double u_c = (L * h2_vg - h2 * inv_vg + c * (L - h2) * dv2_v3) / delta;
  const double q0_over_a = -(L * h2_g - h2 * inv_g) / delta;
  return {u_c, q0_over_a, delta};
}

TouchdownReport touchdown_relations(const TravellingWave& wave, const ModelParams& params,
                                    double q0_tol) {
  TouchdownReport report;
  const FluxConstant flux = flux_constant(wave, params);
  const double scale = std::max(1.0, std::abs(wave.s) * integrate(wave.H * wave.H) / wave.grid().length());
  if (std::abs(flux.q0) > q0_tol * scale) {
    report.message = "not a touchdown wave (q0 = " + std::to_string(flux.q0) + ")";
    return report;
  }
  report.touchdown = true;
  const double u_c = wave.s / params.a;
  double inv_g = 0.0, h2_g = 0.0, h2 = 0.0;
  for (std::size_t i = 0; i < wave.H.size(); ++i) {
    report.u_deviation = std::max(report.u_deviation, std::abs(wave.U[i] - u_c));
    const double g = mobility_g(wave.H[i], params);
    inv_g += 1.0 / g;
    h2_g += wave.H[i] * wave.H[i] / g;
    h2 += wave.H[i] * wave.H[i];
  }
  report.mean_radius = h2 * wave.grid().dx() / wave.grid().length();
  report.mean_radius_formula = h2_g / inv_g;
  if (params.profile == FlowProfile::Plug) report.plug_gap = report.mean_radius - (u_c + 1.0);
  report.message = "touchdown relations evaluated";
  return report;
}

TwoRootCriterion two_root_criterion(double b0, double q0, const ModelParams& params) {
  const double lhs = q0 * q0 / (4.0 * params.a * params.b);
  const double root = std::sqrt(b0 * b0 + 3.0);
  const double threshold = ((b0 + root) * (b0 + root) - 9.0) * (2.0 * b0 - root) / 27.0;
  int roots = 0;
  if (b0 > 1.0) {
    const double tol = 1e-12 * std::max(1.0, std::abs(threshold));
    if (std::abs(lhs - threshold) <= tol || lhs == 0.0) {
      roots = 1;
    } else if (lhs < threshold) {
      roots = 2;
    }
  }
  return {lhs, threshold, roots};
}

}  // namespace fibreflow
