#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fibreflow {

/// Uniform periodic mesh on [0, L) with N nodes x_i = i * L / N.
class Grid {
 public:
  static constexpr std::size_t kMinNodes = 8;

  Grid(double length, std::size_t nodes);

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return nodes_; }
  double dx() const noexcept { return length_ / static_cast<double>(nodes_); }
  double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx(); }

  /// Maps any signed index onto [0, N).
  std::size_t wrap(std::ptrdiff_t i) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(nodes_);
    return static_cast<std::size_t>(((i % n) + n) % n);
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double length_;
  std::size_t nodes_;
};

/// Nodal values of a periodic function on a Grid.
class PeriodicField {
 public:
  explicit PeriodicField(const Grid& grid, double fill = 0.0);
  PeriodicField(const Grid& grid, std::vector<double> values);

  template <class Fn>
  static PeriodicField sample(const Grid& grid, Fn&& fn) {
    PeriodicField out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = fn(grid.x(i));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  /// Periodic access with any signed index.
  double at(std::ptrdiff_t i) const noexcept { return values_[grid_.wrap(i)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }

  double max() const;
  double min() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Centered first difference (f_{i+1} - f_{i-1}) / (2 dx).
PeriodicField d1(const PeriodicField& field);

/// Centered second difference (f_{i+1} - 2 f_i + f_{i-1}) / dx^2.
PeriodicField d2(const PeriodicField& field);

/// Rectangle rule dx * sum_i f_i.
double integrate(const PeriodicField& field);

/// Circular shift by k nodes: result[i] = field[i - k].
PeriodicField shift(const PeriodicField& field, std::ptrdiff_t k);

/// Pointwise product.
PeriodicField operator*(const PeriodicField& lhs, const PeriodicField& rhs);

/// Trigonometric interpolation of a periodic field at arbitrary x.
double interpolate_trig(const PeriodicField& field, double x);

/// Circular shift by a real distance (trigonometric interpolation):
/// result(x) = field(x - distance).
PeriodicField shift_by(const PeriodicField& field, double distance);

/// Linear periodic resampling onto another grid.
PeriodicField resample_linear(const PeriodicField& field, const Grid& target);

}  // namespace fibreflow
