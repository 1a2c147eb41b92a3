#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "wedgeheat/profiles.hpp"

using namespace wedgeheat;

TEST_SUITE("profiles") {

TEST_CASE("smooth cutoff values and derivatives") {
  const auto c = SmoothCutoff::smooth(0.25, 0.5);
  CHECK(c.value(0.1) == 1.0);
  CHECK(c.value(0.6) == 0.0);
  CHECK(c.value(0.375) == doctest::Approx(0.5).epsilon(1e-15));
  for (double r : {0.26, 0.3, 0.41, 0.49}) {
    const double h = 1e-5;
    CHECK(c.d1(r) == doctest::Approx((c.value(r + h) - c.value(r - h)) / (2 * h)).epsilon(1e-6));
    CHECK(c.d2(r) == doctest::Approx((c.d1(r + h) - c.d1(r - h)) / (2 * h)).epsilon(1e-6));
  }
  // Matches to third order at both ends.
  CHECK(std::fabs(c.d1(0.25 + 1e-6)) < 1e-12);
  CHECK(std::fabs(c.d2(0.5 - 1e-6)) < 1e-6);
  CHECK(SmoothCutoff::hard(1.0).value(0.999) == 1.0);
  CHECK(SmoothCutoff::hard(1.0).value(1.0) == 0.0);
  CHECK(SmoothCutoff::none().value(1e300) == 1.0);
  CHECK_THROWS_AS(SmoothCutoff::smooth(0.5, 0.25).validate(), std::invalid_argument);
}

TEST_CASE("power profile and its Laplacian") {
  const double gamma = 0.8;
  const double order = 1.7;
  const auto cut = SmoothCutoff::smooth(0.25, 0.5);
  const auto f = RadialProfile::power_cutoff(2.0, gamma, cut);
  const auto lap = RadialProfile::power_cutoff_laplacian(2.0, gamma, cut, order);
  CHECK(f(0.1) == doctest::Approx(2.0 * std::pow(0.1, gamma)));
  CHECK(f(0.7) == 0.0);
  CHECK(f.support_end() == 0.5);
  CHECK(f.breakpoints().size() == 2);
  for (double r : {0.1, 0.3, 0.45}) {
    const double h = 1e-4;
    const double d1 = (f(r + h) - f(r - h)) / (2 * h);
    const double d2 = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h);
    CHECK(f.derivative(r) == doctest::Approx(d1).epsilon(1e-5));
    CHECK(lap(r) == doctest::Approx(d2 + d1 / r - order * order * f(r) / (r * r)).epsilon(1e-5));
  }
}

TEST_CASE("tabulated profile") {
  const auto t = RadialProfile::tabulated({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
  CHECK(t(0.5) == doctest::Approx(1.0));
  CHECK(t(2.0) == doctest::Approx(1.0));
  CHECK(t(3.5) == 0.0);
  CHECK(t.derivative(2.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(RadialProfile::tabulated({1.0, 1.0}, {0.0, 0.0}), std::invalid_argument);
}

}  // TEST_SUITE
