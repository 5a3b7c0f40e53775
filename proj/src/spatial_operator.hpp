#pragma once

// Momentum spatial operator shared by the transient and travelling-wave
// solvers. Works on raw nodal arrays; the Keller-box auxiliaries
// k = d1 h, p = d1 k, w = d1 u are formed on the fly.

#include <cmath>
#include <cstddef>
#include <span>

#include "fibreflow/errors.hpp"
#include "fibreflow/model.hpp"

namespace fibreflow::detail {

enum class Var { H, U };

class MomentumOperator {
 public:
  MomentumOperator(const ModelParams& params, double dx) : params_(params), dx_(dx) {}

  /// out_i = a d1(u^2/2) + b d1(kappa) - c Dvisc(u; v)/v - 1 + u/g(h).
  void evaluate(std::span<const double> h, std::span<const double> u,
                std::span<double> out) const {
    const std::size_t n = h.size();
    const double a = params_.a, b = params_.b, c = params_.c;
    const double inv2dx = 0.5 / dx_;
    const double invdx2 = 1.0 / (dx_ * dx_);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
      const double vi = h[i] * h[i] - 1.0;
      const double vp = 0.5 * (vi + h[ip] * h[ip] - 1.0);
      const double vm = 0.5 * (vi + h[im] * h[im] - 1.0);
      const double adv = a * (u[ip] * u[ip] - u[im] * u[im]) * 0.5 * inv2dx;
      const double cap = b * (kappa(h, ip) - kappa(h, im)) * inv2dx;
      const double visc = (vp * (u[ip] - u[i]) - vm * (u[i] - u[im])) * invdx2;
      out[i] = adv + cap - c * visc / vi - 1.0 + u[i] / mobility_g(h[i], params_);
    }
  }

  /// Calls emit(row, var, col, value) for every Jacobian entry of evaluate().
  template <class Emit>
  void jacobian(std::span<const double> h, std::span<const double> u, Emit&& emit) const {
    const std::size_t n = h.size();
    const double a = params_.a, b = params_.b, c = params_.c;
    const double inv2dx = 0.5 / dx_;
    const double invdx2 = 1.0 / (dx_ * dx_);
    const double inv4dx2 = 0.25 * invdx2;
    const auto wrap = [n](std::size_t i, long off) {
      return static_cast<std::size_t>((static_cast<long>(i) + off + 2 * static_cast<long>(n)) %
                                      static_cast<long>(n));
    };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = wrap(i, 1), im = wrap(i, -1);
      // advection
      emit(i, Var::U, ip, a * u[ip] * inv2dx);
      emit(i, Var::U, im, -a * u[im] * inv2dx);

      // capillary: b (kappa_{i+1} - kappa_{i-1}) / (2 dx)
      for (int side : {1, -1}) {
        const std::size_t j = wrap(i, side);
        const double coef = side * b * inv2dx;
        const double hj = h[j];
        const double k = (h[wrap(j, 1)] - h[wrap(j, -1)]) * inv2dx;
        const double kp1 = (h[wrap(j, 2)] - h[j]) * inv2dx;
        const double km1 = (h[j] - h[wrap(j, -2)]) * inv2dx;
        const double p = (kp1 - km1) * inv2dx;
        const double f = 1.0 / std::sqrt(1.0 + k * k);
        const double f3 = f * f * f;
        const double df = -k * f3;
        const double dkappa_dh = -f / (hj * hj);
        const double dkappa_dk = df / hj - 3.0 * f * f * df * p;
        const double dkappa_dp = -f3;
        emit(i, Var::H, j, coef * (dkappa_dh - 2.0 * dkappa_dp * inv4dx2));
        emit(i, Var::H, wrap(j, 1), coef * dkappa_dk * inv2dx);
        emit(i, Var::H, wrap(j, -1), -coef * dkappa_dk * inv2dx);
        emit(i, Var::H, wrap(j, 2), coef * dkappa_dp * inv4dx2);
        emit(i, Var::H, wrap(j, -2), coef * dkappa_dp * inv4dx2);
      }

      // viscous: -c D_i / v_i
      const double vi = h[i] * h[i] - 1.0;
      const double vp = 0.5 * (vi + h[ip] * h[ip] - 1.0);
      const double vm = 0.5 * (vi + h[im] * h[im] - 1.0);
      const double dup = u[ip] - u[i], dum = u[i] - u[im];
      const double visc = (vp * dup - vm * dum) * invdx2;
      emit(i, Var::U, ip, -c * vp * invdx2 / vi);
      emit(i, Var::U, im, -c * vm * invdx2 / vi);
      emit(i, Var::U, i, c * (vp + vm) * invdx2 / vi);
      const double dD_dvp = 0.5 * dup * invdx2;
      const double dD_dvm = -0.5 * dum * invdx2;
      const double dD_dvi = 0.5 * (dup - dum) * invdx2;
      emit(i, Var::H, ip, -c * dD_dvp / vi * 2.0 * h[ip]);
      emit(i, Var::H, im, -c * dD_dvm / vi * 2.0 * h[im]);
      emit(i, Var::H, i, (-c * dD_dvi / vi + c * visc / (vi * vi)) * 2.0 * h[i]);

      // drag
      const double g = mobility_g(h[i], params_);
      emit(i, Var::U, i, 1.0 / g);
      emit(i, Var::H, i, -u[i] * mobility_g_derivative(h[i], params_) / (g * g));
    }
  }

  double kappa(std::span<const double> h, std::size_t j) const {
    const std::size_t n = h.size();
    const double inv2dx = 0.5 / dx_;
    const double k = (h[(j + 1) % n] - h[(j + n - 1) % n]) * inv2dx;
    const double kp1 = (h[(j + 2) % n] - h[j]) * inv2dx;
    const double km1 = (h[j] - h[(j + n - 2) % n]) * inv2dx;
    return curvature(h[j], k, (kp1 - km1) * inv2dx);
  }

 private:
  const ModelParams& params_;
  double dx_;
};

/// Throws DegenerateFilmError at the first node with h^2 - 1 <= v_floor.
inline void require_film(std::span<const double> h, double v_floor) {
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!(h[i] * h[i] - 1.0 > v_floor)) throw DegenerateFilmError(i, h[i]);
}

}  // namespace fibreflow::detail
