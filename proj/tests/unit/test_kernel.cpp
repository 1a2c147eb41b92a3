#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle_values.hpp"
#include "wedgeheat/errors.hpp"
#include "wedgeheat/kernel.hpp"

using namespace wedgeheat;

namespace {

// Points whose kernel values are not dominated by cancellation in the series:
// |x - y|^2 / 4t <= 9 (see the heat_kernel documentation).
std::vector<KernelSample> cloud(double kappa0, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<KernelSample> out;
  while (static_cast<int>(out.size()) < n) {
    const double t = std::pow(10.0, -3.0 + 4.0 * u(rng));
    const PolarPoint x{std::pow(10.0, -3.0 + 4.0 * u(rng)), kappa0 * (0.01 + 0.98 * u(rng))};
    const PolarPoint y{std::pow(10.0, -3.0 + 4.0 * u(rng)), kappa0 * (0.01 + 0.98 * u(rng))};
    const auto [a, b] = polar_to_cart(x);
    const auto [c, d] = polar_to_cart(y);
    if (((a - c) * (a - c) + (b - d) * (b - d)) / (4.0 * t) > 9.0) continue;
    out.push_back({t, x, y});
  }
  return out;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("half-plane example") {
  const KernelConfig cfg{AngularDomain(kPi)};
  const double g = heat_kernel(cfg, 1.0, {1.0, kPi / 2}, {1.0, kPi / 2});
  CHECK(std::fabs(g - oracle::kHalfPlaneKernelT1) < 1e-12 * oracle::kHalfPlaneKernelT1);
  CHECK(std::fabs(image_kernel_oracle(kPi, 1.0, {1.0, kPi / 2}, {1.0, kPi / 2}) - oracle::kHalfPlaneKernelT1) <
        1e-15);
}

TEST_CASE("boundary and vertex give zero") {
  for (double k0 : {0.5, kPi / 2, kPi, 5.5}) {
    const KernelConfig cfg{AngularDomain(k0)};
    CHECK(heat_kernel(cfg, 0.3, {1.0, 0.0}, {0.7, k0 / 3}) == 0.0);
    CHECK(heat_kernel(cfg, 0.3, {1.0, k0 / 2}, {0.7, k0}) == 0.0);
    CHECK(heat_kernel(cfg, 0.3, {0.0, k0 / 2}, {0.7, k0 / 3}) == 0.0);
  }
  CHECK(image_kernel_oracle(kPi, 1.0, {1.0, 0.0}, {1.0, 1.0}) == 0.0);
  CHECK(image_kernel_oracle(kPi / 2, 1.0, {1.0, kPi / 2}, {1.0, 1.0}) == 0.0);
}

TEST_CASE("series matches the image oracles") {
  for (double k0 : {kPi, kPi / 2}) {
    const KernelConfig cfg{AngularDomain(k0)};
    const auto samples = cloud(k0, 500, 11);
    const auto values = kernel_cloud(cfg, samples);
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double o = image_kernel_oracle(k0, samples[i].t, samples[i].x, samples[i].y);
      worst = std::max(worst, std::fabs(values[i] - o) / o);
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("quadrant oracle equals the signed image sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    const double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
    auto K = [&](double a, double b) { return std::exp(-(a * a + b * b) / (4 * t)) / (4 * kPi * t); };
    const double sum = K(x1 - y1, x2 - y2) - K(x1 - y1, x2 + y2) - K(x1 + y1, x2 - y2) + K(x1 + y1, x2 + y2);
    const double o = image_kernel_oracle(kPi / 2, t, cart_to_polar(x1, x2), cart_to_polar(y1, y2));
    CHECK(std::fabs(o - sum) <= 1e-12 * std::fabs(sum) + 1e-17);
  }
  CHECK_THROWS_AS(image_kernel_oracle(1.0, 1.0, {1, 0.5}, {1, 0.5}), std::invalid_argument);
}

TEST_CASE("oracle decays in t beyond its mode") {
  double prev = image_kernel_oracle(kPi, 2.0, {1.0, 1.0}, {1.5, 2.0});
  for (double t = 3.0; t < 1e4; t *= 1.5) {
    const double v = image_kernel_oracle(kPi, t, {1.0, 1.0}, {1.5, 2.0});
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("symmetry, positivity and dilation") {
  for (double k0 : {0.7, kPi / 2, kPi, 3 * kPi / 2, 1.9 * kPi}) {
    const KernelConfig cfg{AngularDomain(k0)};
    for (const auto& s : cloud(k0, 200, 5)) {
      const double g = heat_kernel(cfg, s.t, s.x, s.y);
      const double h = heat_kernel(cfg, s.t, s.y, s.x);
      CHECK(std::fabs(g - h) <= 1e-12 * std::max(g, 1e-300));
      CHECK(g >= -1e-12);
      for (double a : {0.125, 0.5, 2.0, 16.0}) {
        const double d = a * a * heat_kernel(cfg, a * a * s.t, {a * s.x.r, s.x.theta}, {a * s.y.r, s.y.theta});
        CHECK(std::fabs(d - g) <= 1e-12 * g);
      }
    }
  }
}

TEST_CASE("mass") {
  const KernelConfig cfg{AngularDomain(kPi)};
  GridSpec quad{1e-6, 12.0, 48, 1.5, 16, 4};
  const double m = kernel_mass(cfg, 1.0, {1.0, kPi / 2}, quad);
  CHECK(std::fabs(m - oracle::kErfHalf) < 1e-6);
  // Short times concentrate the mass; points near the vertex lose it.
  GridSpec local{0.5, 1.5, 48, 1.0, 48, 4};
  CHECK(kernel_mass(cfg, 1e-3, {1.0, kPi / 2}, local) == doctest::Approx(1.0).epsilon(1e-6));
  const KernelConfig wedge{AngularDomain(kPi / 3)};
  double prev = 1.0;
  for (double r : {1.0, 0.3, 0.1, 0.03}) {
    const double v = kernel_mass(wedge, 1.0, {r, kPi / 6}, quad);
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("invalid inputs") {
  KernelConfig cfg{AngularDomain(kPi)};
  CHECK_THROWS_AS(heat_kernel(cfg, 0.0, {1, 1}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(heat_kernel(cfg, 1.0, {1, 4.0}, {1, 1}), std::invalid_argument);
  cfg.series_rel_tol = 1e-3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  KernelConfig tight{AngularDomain(kPi)};
  tight.max_series_terms = 20;
  CHECK_THROWS_AS(heat_kernel(tight, 1e-3, {1.0, 1.0}, {1.0, 1.1}), NonConvergent);
}

TEST_CASE("cloud evaluation does not depend on jobs") {
  const KernelConfig cfg{AngularDomain(3 * kPi / 2)};
  const auto samples = cloud(3 * kPi / 2, 300, 9);
  CHECK(kernel_cloud(cfg, samples, Exec::serial()) == kernel_cloud(cfg, samples, Exec::with_jobs(4)));
}

}
