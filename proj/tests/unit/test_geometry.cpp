#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "wedgeheat/geometry.hpp"

using namespace wedgeheat;

TEST_SUITE("geometry") {

TEST_CASE("domain rejects endpoints") {
  CHECK_THROWS_AS(AngularDomain(0.0), std::invalid_argument);
  CHECK_THROWS_AS(AngularDomain(2.0 * kPi), std::invalid_argument);
  CHECK(AngularDomain(kPi / 2).critical_exponent() == doctest::Approx(2.0).epsilon(1e-16));
}

TEST_CASE("polar_to_cart") {
  auto [a, b] = polar_to_cart({1.0, 0.0});
  CHECK(a == 1.0);
  CHECK(b == 0.0);
  auto [c, d] = polar_to_cart({0.0, 1.234});
  CHECK(c == 0.0);
  CHECK(d == 0.0);
  auto [e, f] = polar_to_cart({2.0, kPi / 2});
  CHECK(std::fabs(e) < 1e-15);
  CHECK(f == doctest::Approx(2.0));
  for (double r = 1e-8; r <= 1e8; r *= 7.3) {
    for (double th : {0.1, 1.0, 2.5, 5.9}) {
      auto [x, y] = polar_to_cart({r, th});
      CHECK(std::fabs(std::hypot(x, y) - r) <= 1e-14 * r);
    }
  }
}

TEST_CASE("dist_to_vertex") {
  CHECK(dist_to_vertex({0.5, 1.0}) == 0.5);
  CHECK(dist_to_vertex({0.0, 0.3}) == 0.0);
  CHECK(dist_to_vertex({10.0, kPi / 2}) == 10.0);
}

TEST_CASE("uniform grid example") {
  GridSpec spec{1.0, 2.0, 2, 1.0, 1, 1};
  auto nodes = graded_polar_grid(AngularDomain(kPi), spec);
  REQUIRE(nodes.size() == 2);
  CHECK(nodes[0].point.r == doctest::Approx(1.25));
  CHECK(nodes[1].point.r == doctest::Approx(1.75));
  CHECK(nodes[0].point.theta == doctest::Approx(kPi / 2));
  CHECK(nodes[0].weight == doctest::Approx(1.25 * 0.5 * kPi));
}

TEST_CASE("weights sum to the sector area") {
  for (int ppc : {1, 3}) {
    GridSpec spec;
    spec.points_per_cell = ppc;
    spec.n_radial = 64;
    spec.n_angular = 16;
    const AngularDomain dom(3 * kPi / 2);
    double total = 0.0;
    for (const auto& n : graded_polar_grid(dom, spec)) total += n.weight;
    const double exact = sector_area(dom, spec);
    CHECK(std::fabs(total - exact) <= 1e-10 * exact);
  }
}

TEST_CASE("power-rule grading") {
  GridSpec spec{1e-6, 1.0, 100, 3.0, 4, 1};
  PolarGrid grid(AngularDomain(kPi), spec);
  auto e = grid.radial_edges();
  const double first = e[1] - e[0];
  const double last = e[100] - e[99];
  // (1/n)^3 vs 1 - (1 - 1/n)^3 ~ 3/n: ratio ~ 1/(3 n^2).
  CHECK(first / last == doctest::Approx(1.0 / (3 * 100.0 * 100.0)).epsilon(0.02));
  for (std::size_t i = 1; i < grid.n_r(); ++i) CHECK(grid.radii()[i] > grid.radii()[i - 1]);
}

TEST_CASE("invalid specs") {
  const AngularDomain dom(kPi);
  CHECK_THROWS_AS(PolarGrid(dom, GridSpec{1.0, 0.5, 4, 1.0, 4, 1}), std::invalid_argument);
  CHECK_THROWS_AS(PolarGrid(dom, GridSpec{0.1, 0.5, 1, 1.0, 4, 1}), std::invalid_argument);
  CHECK_THROWS_AS(PolarGrid(dom, GridSpec{0.1, 0.5, 4, 0.5, 4, 1}), std::invalid_argument);
}

}
