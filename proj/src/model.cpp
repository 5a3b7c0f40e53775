#include "fibreflow/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fibreflow/errors.hpp"

namespace fibreflow {

namespace {

// Coefficients of I(1 + e) = sum_k c_k e^k, k = 3..13, from symbolic
// expansion of the closed form.
constexpr std::array<double, 11> kISeries = {
    1.0 / 3.0,     1.0 / 3.0,      1.0 / 20.0,    -1.0 / 120.0,
    1.0 / 420.0,   -1.0 / 1120.0,  1.0 / 2520.0,  -1.0 / 5040.0,
    1.0 / 9240.0,  -1.0 / 15840.0, 1.0 / 25740.0};

// I'(1 + e) = sum_k d_k e^k, k = 2..12.
constexpr std::array<double, 11> kIPrimeSeries = {
    1.0,          4.0 / 3.0,     1.0 / 4.0,     -1.0 / 20.0,
    1.0 / 60.0,   -1.0 / 140.0,  1.0 / 280.0,   -1.0 / 504.0,
    1.0 / 840.0,  -1.0 / 1320.0, 1.0 / 1980.0};

constexpr double kSeriesSwitch = 1e-2;

template <std::size_t K>
double horner(const std::array<double, K>& coeffs, double e) {
  double acc = 0.0;
  for (std::size_t k = K; k-- > 0;) acc = acc * e + coeffs[k];
  return acc;
}

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

template <class F>
double gauss_legendre(F&& fn, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k)
    acc += kGlWeights[k] * fn(mid + half * kGlNodes[k]);
  return acc * half;
}

}  // namespace

std::string_view to_string(FlowProfile profile) {
  return profile == FlowProfile::Plug ? "plug" : "laminar";
}

FlowProfile parse_profile(std::string_view name) {
  if (name == "plug") return FlowProfile::Plug;
  if (name == "laminar") return FlowProfile::Laminar;
  throw ConfigError("unknown flow profile '" + std::string(name) +
                    "' (expected plug or laminar)");
}

void ModelParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw ConfigError("model parameters a, b, c must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("epsilon must lie in (0, 1)");
  if (!(epsilon0 > 0.0)) throw ConfigError("epsilon0 must be positive");
  if (!(g_floor > 1.0)) throw ConfigError("g_floor must exceed 1");
  if (!std::isfinite(g_ref)) throw ConfigError("g_ref must be finite");
}

double slope_factor(double z) { return 1.0 / std::sqrt(1.0 + z * z); }

ArcFactor arc_factor(double z) {
  const double f = slope_factor(z);
  return {std::sqrt(1.0 + z * z), z * f, f * f * f};
}

double laminar_I(double h) {
  if (!(h >= 1.0)) throw DomainError("laminar_I: h must be >= 1");
  const double e = h - 1.0;
  if (e < kSeriesSwitch) return e * e * e * horner(kISeries, e);
  const double h2 = h * h;
  return (4.0 * h2 * h2 * std::log(h) + (h2 - 1.0) * (1.0 - 3.0 * h2)) / 16.0;
}

double laminar_I_derivative(double h) {
  if (!(h >= 1.0)) throw DomainError("laminar_I_derivative: h must be >= 1");
  const double e = h - 1.0;
  if (e < kSeriesSwitch) return e * e * horner(kIPrimeSeries, e);
  const double h3 = h * h * h;
  return h3 * std::log(h) - 0.5 * h3 + 0.5 * h;
}

double mobility_g(double h, const ModelParams& params) {
  if (!(h > 1.0))
    throw DomainError("mobility_g: degenerate mobility at h = " +
                      std::to_string(h));
  const double v = h * h - 1.0;
  if (params.profile == FlowProfile::Plug) return v;
  return laminar_I(h) / v;
}

double mobility_g_derivative(double h, const ModelParams& params) {
  if (!(h > 1.0))
    throw DomainError("mobility_g_derivative: degenerate mobility at h = " +
                      std::to_string(h));
  if (params.profile == FlowProfile::Plug) return 2.0 * h;
  const double v = h * h - 1.0;
  return (laminar_I_derivative(h) * v - 2.0 * h * laminar_I(h)) / (v * v);
}

double curvature(double h, double hx, double hxx) {
  const double f = slope_factor(hx);
  return f / h - f * f * f * hxx;
}

// ---------------------------------------------------------------------------
// EntropyPotential

namespace {
constexpr double kTableStep = 1e-3;      // spacing in t = log(h - 1)
constexpr double kTableRadiusMax = 64.0;  // table covers h <= 64
}  // namespace

EntropyPotential::EntropyPotential(const ModelParams& params)
    : params_(params), floor_(params.g_floor), dt_(kTableStep) {
  if (params.profile != FlowProfile::Laminar)
    throw ConfigError("entropy potential G is defined for the laminar model only");
  if (!(floor_ > 1.0)) throw ConfigError("g_floor must exceed 1");

  // Table nodes t_k = k * dt; k = 0 is the reference radius h = 2.
  k_min_ = static_cast<long>(std::floor(std::log(floor_ - 1.0) / dt_));
  const long k_max =
      static_cast<long>(std::ceil(std::log(kTableRadiusMax - 1.0) / dt_));
  t_min_ = static_cast<double>(k_min_) * dt_;
  const std::size_t count = static_cast<std::size_t>(k_max - k_min_ + 1);
  values_.assign(count, 0.0);
  slopes_.assign(count, 0.0);

  const std::size_t ref = static_cast<std::size_t>(-k_min_);
  const auto node_t = [&](std::size_t idx) {
    return static_cast<double>(static_cast<long>(idx) + k_min_) * dt_;
  };
  const auto fn = [this](double t) { return integrand_t(t); };
  values_[ref] = params_.g_ref;
  for (std::size_t idx = ref + 1; idx < count; ++idx)
    values_[idx] =
        values_[idx - 1] + gauss_legendre(fn, node_t(idx - 1), node_t(idx));
  for (std::size_t idx = ref; idx-- > 0;)
    values_[idx] =
        values_[idx + 1] - gauss_legendre(fn, node_t(idx), node_t(idx + 1));
  for (std::size_t idx = 0; idx < count; ++idx) slopes_[idx] = fn(node_t(idx));
}

// dG/dt with h = 1 + exp(t).
double EntropyPotential::integrand_t(double t) const {
  const double e = std::exp(t);
  const double h = 1.0 + e;
  return h / mobility_g(h, params_) * e;
}

double EntropyPotential::derivative(double h) const {
  if (h < floor_)
    throw DomainError("entropy potential: h = " + std::to_string(h) +
                      " below floor " + std::to_string(floor_) +
                      " (integrand diverges at h = 1)");
  return h / mobility_g(h, params_);
}

double EntropyPotential::operator()(double h) const {
  if (h < floor_)
    throw DomainError("entropy potential: h = " + std::to_string(h) +
                      " below floor " + std::to_string(floor_) +
                      " (integrand diverges at h = 1)");
  const double t = std::log(h - 1.0);
  const double pos = (t - t_min_) / dt_;
  const std::size_t last = values_.size() - 1;
  if (pos >= static_cast<double>(last)) {
    // Continue past the table in h with panels of width <= 1.
    const double h_end = 1.0 + std::exp(t_min_ + static_cast<double>(last) * dt_);
    const auto fn = [this](double x) { return x / mobility_g(x, params_); };
    const int panels = static_cast<int>(std::ceil(h - h_end)) + 1;
    const double w = (h - h_end) / panels;
    double acc = values_[last];
    for (int p = 0; p < panels; ++p)
      acc += gauss_legendre(fn, h_end + p * w, h_end + (p + 1) * w);
    return acc;
  }
  const std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
  const double s = pos - static_cast<double>(k);
  // Cubic Hermite with exact end slopes.
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[k] + h10 * dt_ * slopes_[k] + h01 * values_[k + 1] +
         h11 * dt_ * slopes_[k + 1];
}

}  // namespace fibreflow
