#include "fibreflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fibreflow/errors.hpp"

namespace fibreflow {

Grid::Grid(double length, std::size_t nodes) : length_(length), nodes_(nodes) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("grid length must be positive and finite");
  if (nodes < kMinNodes)
    throw ConfigError("grid needs at least " + std::to_string(kMinNodes) +
                      " nodes, got " + std::to_string(nodes));
}

PeriodicField::PeriodicField(const Grid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

PeriodicField::PeriodicField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw ConfigError("field has " + std::to_string(values_.size()) +
                      " values but the grid has " +
                      std::to_string(grid_.size()) + " nodes");
}

double PeriodicField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double PeriodicField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

PeriodicField d1(const PeriodicField& field) {
  const std::size_t n = field.size();
  const double scale = 0.5 / field.grid().dx();
  PeriodicField out(field.grid());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (field[(i + 1) % n] - field[(i + n - 1) % n]) * scale;
  return out;
}

PeriodicField d2(const PeriodicField& field) {
  const std::size_t n = field.size();
  const double dx = field.grid().dx();
  const double scale = 1.0 / (dx * dx);
  PeriodicField out(field.grid());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (field[(i + 1) % n] - 2.0 * field[i] + field[(i + n - 1) % n]) * scale;
  return out;
}

double integrate(const PeriodicField& field) {
  double acc = 0.0;
  for (double v : field) acc += v;
  return acc * field.grid().dx();
}

PeriodicField shift(const PeriodicField& field, std::ptrdiff_t k) {
  PeriodicField out(field.grid());
  const auto n = static_cast<std::ptrdiff_t>(field.size());
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = field.at(i - k);
  return out;
}

PeriodicField operator*(const PeriodicField& lhs, const PeriodicField& rhs) {
  if (!(lhs.grid() == rhs.grid())) throw ConfigError("fields live on different grids");
  PeriodicField out(lhs.grid());
  for (std::size_t i = 0; i < lhs.size(); ++i) out[i] = lhs[i] * rhs[i];
  return out;
}

namespace {

struct Fourier {
  std::vector<double> re, im;  // coefficients k = 0..N/2
};

Fourier dft(const PeriodicField& field) {
  const std::size_t n = field.size();
  const std::size_t kmax = n / 2;
  Fourier out{std::vector<double>(kmax + 1), std::vector<double>(kmax + 1)};
  for (std::size_t k = 0; k <= kmax; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) /
                           static_cast<double>(n);
      re += field[j] * std::cos(angle);
      im -= field[j] * std::sin(angle);
    }
    out.re[k] = re / static_cast<double>(n);
    out.im[k] = im / static_cast<double>(n);
  }
  return out;
}

double evaluate(const Fourier& coeffs, std::size_t n, double theta) {
  // theta = 2 pi x / L
  const std::size_t kmax = n / 2;
  double acc = coeffs.re[0];
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double c = std::cos(static_cast<double>(k) * theta);
    const double s = std::sin(static_cast<double>(k) * theta);
    const double term = coeffs.re[k] * c - coeffs.im[k] * s;
    // The Nyquist mode of an even-length grid appears once, not twice.
    acc += (2 * k == n) ? term : 2.0 * term;
  }
  return acc;
}

}  // namespace

double interpolate_trig(const PeriodicField& field, double x) {
  const Fourier coeffs = dft(field);
  return evaluate(coeffs, field.size(), 2.0 * std::numbers::pi * x / field.grid().length());
}

PeriodicField shift_by(const PeriodicField& field, double distance) {
  const Fourier coeffs = dft(field);
  const Grid& grid = field.grid();
  const std::size_t n = field.size();
  const std::size_t kmax = n / 2;
  PeriodicField out(grid);
  // Precompute shifted coefficients so each output node is a plain sum.
  Fourier shifted = coeffs;
  const double phase0 = -2.0 * std::numbers::pi * distance / grid.length();
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double c = std::cos(static_cast<double>(k) * phase0);
    const double s = std::sin(static_cast<double>(k) * phase0);
    shifted.re[k] = coeffs.re[k] * c - coeffs.im[k] * s;
    shifted.im[k] = coeffs.re[k] * s + coeffs.im[k] * c;
    if (2 * k == n) shifted.im[k] = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = evaluate(shifted, n, 2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(n));
  return out;
}

PeriodicField resample_linear(const PeriodicField& field, const Grid& target) {
  const Grid& src = field.grid();
  if (std::abs(src.length() - target.length()) > 1e-12 * src.length())
    throw ConfigError("resample_linear: grids have different lengths");
  PeriodicField out(target);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double pos = target.x(i) / src.dx();
    const auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
    const double w = pos - static_cast<double>(j);
    out[i] = (1.0 - w) * field.at(j) + w * field.at(j + 1);
  }
  return out;
}

}  // namespace fibreflow
