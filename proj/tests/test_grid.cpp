#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fibreflow/errors.hpp"
#include "fibreflow/grid.hpp"

using namespace fibreflow;

namespace {

constexpr double kL = 20.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_error(const PeriodicField& f, auto&& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    err = std::max(err, std::abs(f[i] - exact(f.grid().x(i))));
  return err;
}

PeriodicField random_field(const Grid& grid, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  PeriodicField f(grid);
  for (double& v : f) v = dist(rng);
  return f;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g(kL, 400);
  CHECK(g.dx() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(g.x(3) == doctest::Approx(0.15));
  CHECK(g.wrap(-1) == 399);
  CHECK(g.wrap(400) == 0);
  CHECK_THROWS_AS(Grid(kL, 7), ConfigError);
  CHECK_THROWS_AS(Grid(-1.0, 16), ConfigError);
  CHECK_THROWS_AS(PeriodicField(g, std::vector<double>(3)), ConfigError);
}

TEST_CASE("difference operators annihilate constants") {
  const Grid g(kL, 32);
  const PeriodicField c(g, 3.7);
  for (double v : d1(c)) CHECK(v == 0.0);
  for (double v : d2(c)) CHECK(v == 0.0);
}

TEST_CASE("d1 of a sine") {
  const double k = kTwoPi / kL;
  double previous = 0.0;
  for (std::size_t n : {128, 256, 512}) {
    const Grid g(kL, n);
    const auto f = PeriodicField::sample(g, [&](double x) { return std::sin(k * x); });
    const double err = max_error(d1(f), [&](double x) { return k * std::cos(k * x); });
    CHECK(err <= 0.2 * g.dx() * g.dx());
    if (previous > 0.0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.02));
    previous = err;
  }
}

TEST_CASE("d2 of a cosine") {
  const double k = kTwoPi / kL;
  const Grid g(kL, 256);
  const auto f = PeriodicField::sample(g, [&](double x) { return std::cos(k * x); });
  const double err = max_error(d2(f), [&](double x) { return -k * k * std::cos(k * x); });
  CHECK(err <= 0.2 * g.dx() * g.dx());
}

TEST_CASE("second-order convergence on exp(sin)") {
  const double k = kTwoPi / kL;
  const auto f = [&](double x) { return std::exp(std::sin(k * x)); };
  const auto f1 = [&](double x) { return k * std::cos(k * x) * f(x); };
  const auto f2 = [&](double x) {
    const double c = std::cos(k * x), s = std::sin(k * x);
    return k * k * (c * c - s) * f(x);
  };
  std::vector<double> e1, e2, e11;
  for (std::size_t n : {64, 128, 256, 512}) {
    const auto field = PeriodicField::sample(Grid(kL, n), f);
    e1.push_back(max_error(d1(field), f1));
    e2.push_back(max_error(d2(field), f2));
    e11.push_back(max_error(d1(d1(field)), f2));
  }
  for (std::size_t i = 1; i < e1.size(); ++i) {
    CHECK(e1[i - 1] / e1[i] == doctest::Approx(4.0).epsilon(0.3 / 4.0));
    CHECK(e2[i - 1] / e2[i] == doctest::Approx(4.0).epsilon(0.3 / 4.0));
    CHECK(e11[i - 1] / e11[i] == doctest::Approx(4.0).epsilon(0.3 / 4.0));
  }
  // wide and compact stencils are different operators
  CHECK(e11.back() > 2.0 * e2.back());
}

TEST_CASE("telescoping, shift equivariance and summation by parts") {
  const Grid g(kL, 97);
  const PeriodicField f = random_field(g, 1);
  const PeriodicField h = random_field(g, 2);

  double sum = 0.0, scale = 0.0;
  for (double v : d1(f)) sum += v, scale += std::abs(v);
  CHECK(std::abs(sum) <= 1e-12 * scale);

  for (std::ptrdiff_t k : {1, 5, -3, 97}) {
    const PeriodicField a = d1(shift(f, k)), b = shift(d1(f), k);
    const PeriodicField c = d2(shift(f, k)), d = shift(d2(f), k);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(c[i] == d[i]);
    }
  }
  CHECK(shift(f, 1)[1] == f[0]);

  const double lhs = integrate(d1(f) * h);
  const double rhs = -integrate(f * d1(h));
  CHECK(std::abs(lhs - rhs) <= 1e-13 * (std::abs(lhs) + 1.0));
}

TEST_CASE("periodic quadrature") {
  const Grid g(kL, 64);
  CHECK(integrate(PeriodicField(g, 2.5)) == doctest::Approx(2.5 * kL).epsilon(1e-15));
  const double k = kTwoPi / kL;
  const auto sine = PeriodicField::sample(g, [&](double x) { return std::sin(k * x); });
  CHECK(std::abs(integrate(sine)) < 1e-13);

  const auto integrand = [&](double x) {
    const double h = 1.0 + 0.1 * std::sin(k * x);
    return h * h - 1.0;
  };
  const double oracle =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, kL, 15, 1e-15);
  CHECK(std::abs(integrate(PeriodicField::sample(g, integrand)) - oracle) < 1e-10);
}

TEST_CASE("interpolation and resampling") {
  const double k = kTwoPi / kL;
  const Grid g(kL, 40);
  const auto trig = [&](double x) { return 1.0 + 0.3 * std::sin(k * x) - 0.2 * std::cos(3 * k * x); };
  const auto f = PeriodicField::sample(g, trig);

  CHECK(interpolate_trig(f, 3.3) == doctest::Approx(trig(3.3)).epsilon(1e-12));
  const PeriodicField moved = shift_by(f, 1.234);
  CHECK(max_error(moved, [&](double x) { return trig(x - 1.234); }) < 1e-12);
  const PeriodicField whole = shift_by(f, 3 * g.dx());
  const PeriodicField exact = shift(f, 3);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(whole[i] == doctest::Approx(exact[i]).epsilon(1e-12));

  const PeriodicField same = resample_linear(f, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(same[i] == f[i]);
  const PeriodicField fine = resample_linear(f, Grid(kL, 80));
  CHECK(fine[2] == f[1]);
  CHECK(fine[3] == doctest::Approx(0.5 * (f[1] + f[2])));
  CHECK(fine[79] == doctest::Approx(0.5 * (f[39] + f[0])));
}
