#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "doctest.h"
#include "fibreflow/errors.hpp"
#include "fibreflow/model.hpp"

using namespace fibreflow;

namespace {

ModelParams laminar() {
  ModelParams p;
  p.profile = FlowProfile::Laminar;
  return p;
}

using Wide = boost::multiprecision::cpp_bin_float_50;

// Closed form in 50-digit arithmetic, immune to the cancellation near h = 1.
double closed_form_I(double h) {
  const Wide x(h);
  const Wide x2 = x * x;
  return static_cast<double>((4 * x2 * x2 * log(x) + (x2 - 1) * (1 - 3 * x2)) / 16);
}

double closed_form_I_prime(double h) {
  const Wide x(h);
  const Wide x3 = x * x * x;
  return static_cast<double>(x3 * log(x) - x3 / 2 + x / 2);
}

double quad(auto&& fn, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, lo, hi, 15, 1e-14);
}

}  // namespace

TEST_CASE("slope factor") {
  CHECK(slope_factor(0.0) == 1.0);
  CHECK(slope_factor(1.0) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
  for (double z : {0.5, 1.0, 3.0}) {
    CHECK(slope_factor(z) * arc_factor(z).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(slope_factor(z) == slope_factor(-z));
  }
}

TEST_CASE("arc factor and its derivatives") {
  const ArcFactor zero = arc_factor(0.0);
  CHECK(zero.value == 1.0);
  CHECK(zero.first == 0.0);
  CHECK(zero.second == 1.0);
  CHECK(arc_factor(1.0).value == doctest::Approx(1.4142135623730951).epsilon(1e-15));

  const double step = 1e-5;
  for (double z : {0.3, 2.0}) {
    const double fd = (arc_factor(z + step).value - arc_factor(z - step).value) / (2 * step);
    CHECK(std::abs(arc_factor(z).first - fd) < 1e-8);
    const double fd2 = (arc_factor(z + step).first - arc_factor(z - step).first) / (2 * step);
    CHECK(std::abs(arc_factor(z).second - fd2) < 1e-8);
    const double f = slope_factor(z);
    CHECK(arc_factor(z).second == doctest::Approx(f * f * f).epsilon(1e-15));
    CHECK(arc_factor(-z).first == -arc_factor(z).first);
  }
}

TEST_CASE("laminar profile integral") {
  CHECK(laminar_I(1.0) == 0.0);
  CHECK(laminar_I(2.0) == doctest::Approx(4.0 * std::log(2.0) - 33.0 / 16.0).epsilon(1e-14));
  CHECK(laminar_I(2.0) == doctest::Approx(0.710088).epsilon(1e-6));

  const double e = 1e-3;
  CHECK(std::abs(laminar_I(1.0 + e) / (e * e * e / 3.0) - 1.0) < 1e-2);
  CHECK_THROWS_AS(laminar_I(0.999), DomainError);

  SUBCASE("matches an extended-precision closed form") {
    for (double h : {1.0 + 1e-6, 1.0 + 1e-3, 1.005, 1.0099, 1.05, 1.5, 2.29, 4.0}) {
      const double ref = closed_form_I(h);
      CHECK(std::abs(laminar_I(h) - ref) <= 1e-12 * ref);
    }
    // The double-precision closed form is used from h - 1 = 1e-2 on, where it
    // still loses about eight digits to cancellation.
    for (double h : {1.0101, 1.02}) {
      const double ref = closed_form_I(h);
      CHECK(std::abs(laminar_I(h) - ref) <= 1e-8 * ref);
    }
  }

  SUBCASE("derivative") {
    for (double h : {1.0 + 1e-5, 1.002, 1.0099, 1.3, 2.5}) {
      const double ref = closed_form_I_prime(h);
      CHECK(std::abs(laminar_I_derivative(h) - ref) <= 1e-12 * ref);
    }
    const double ref = closed_form_I_prime(1.0101);
    CHECK(std::abs(laminar_I_derivative(1.0101) - ref) <= 1e-9 * ref);
  }
}

TEST_CASE("mobility") {
  ModelParams plug;
  CHECK(mobility_g(2.0, plug) == 3.0);
  CHECK(mobility_g(2.0, laminar()) == doctest::Approx(0.236696).epsilon(1e-6));
  CHECK(mobility_g(2.0, laminar()) == doctest::Approx(laminar_I(2.0) / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(mobility_g(1.0, plug), DomainError);
  CHECK_THROWS_AS(mobility_g(0.5, laminar()), DomainError);

  double previous = 0.0;
  for (double h : {1.0 + 1e-6, 1.0 + 1e-4, 1.01, 1.1}) {
    const double g = mobility_g(h, plug);
    CHECK(g > previous);
    previous = g;
  }
  for (double h = 1.2; h < 3.0; h += 0.3) CHECK(mobility_g(h, plug) == h * h - 1.0);

  for (const ModelParams& p : {plug, laminar()}) {
    for (double h : {1.005, 1.5, 2.3}) {
      const double step = 1e-6;
      const double fd = (mobility_g(h + step, p) - mobility_g(h - step, p)) / (2 * step);
      CHECK(mobility_g_derivative(h, p) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("curvature") {
  CHECK(curvature(2.29, 0.0, 0.0) == doctest::Approx(1.0 / 2.29).epsilon(1e-15));
  for (double q : {-1.0, 0.0, 1.0}) CHECK(curvature(1.0, 0.0, q) == doctest::Approx(1.0 - q));
  CHECK(curvature(2.0, 1.0, 0.5) == doctest::Approx(0.1767767).epsilon(1e-7));
}

TEST_CASE("entropy potential") {
  ModelParams p = laminar();
  const EntropyPotential G(p);
  CHECK(G(2.0) == p.g_ref);

  p.g_ref = 3.5;
  const EntropyPotential shifted(p);
  CHECK(shifted(2.0) == 3.5);
  CHECK(shifted(2.7) - shifted(1.3) == doctest::Approx(G(2.7) - G(1.3)).epsilon(1e-12));

  const auto integrand = [&](double h) { return h / mobility_g(h, p); };
  CHECK(std::abs((G(2.5) - G(1.5)) - quad(integrand, 1.5, 2.5)) < 1e-8);
  CHECK(std::abs((G(1.06) - G(2.0)) - quad(integrand, 2.0, 1.06)) < 1e-8);
  CHECK(std::abs((G(80.0) - G(2.0)) - quad(integrand, 2.0, 80.0)) < 1e-8 * G(80.0));
  CHECK(G(2.5) > G(1.5));
  CHECK(G.derivative(1.7) == doctest::Approx(integrand(1.7)).epsilon(1e-15));

  double previous = G(p.g_floor);
  for (double h = 1.06; h < 4.0; h += 0.0137) {
    CHECK(G(h) > previous);
    previous = G(h);
  }
  CHECK_THROWS_AS(G(1.04), DomainError);
  CHECK_THROWS_AS(EntropyPotential(ModelParams{}), ConfigError);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.a = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = ModelParams{};
  p.epsilon = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = ModelParams{};
  p.epsilon0 = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK(parse_profile("laminar") == FlowProfile::Laminar);
  CHECK_THROWS_AS(parse_profile("turbulent"), ConfigError);
}
