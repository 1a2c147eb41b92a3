#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle_values.hpp"
#include "wedgeheat/errors.hpp"
#include "wedgeheat/fields.hpp"
#include "wedgeheat/verify.hpp"

using namespace wedgeheat;

TEST_SUITE("verify") {

TEST_CASE("kernel clouds respect their filters and seeds") {
  const AngularDomain d(3 * kPi / 2);
  CloudSpec spec;
  spec.n = 300;
  spec.seed = 4;
  const auto a = sample_kernel_cloud(d, spec);
  const auto b = sample_kernel_cloud(d, spec);
  REQUIRE(a.samples.size() == 300);
  CHECK(a.rejected == b.rejected);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& s = a.samples[i];
    CHECK(s.t == b.samples[i].t);
    CHECK(s.t >= spec.t_min);
    CHECK(s.t <= spec.t_max);
    CHECK(s.x.r >= spec.r_min);
    CHECK(s.y.r <= spec.r_max);
    CHECK(s.x.theta > 0.0);
    CHECK(s.x.theta < d.kappa0());
    const auto [x1, x2] = polar_to_cart(s.x);
    const auto [y1, y2] = polar_to_cart(s.y);
    CHECK(((x1 - y1) * (x1 - y1) + (x2 - y2) * (x2 - y2)) / (4 * s.t) <= spec.max_q);
  }
  spec.seed = 5;
  CHECK(sample_kernel_cloud(d, spec).samples[0].t != a.samples[0].t);
}

TEST_CASE("vertex lattice replicates configurations across decades") {
  const AngularDomain d(kPi / 2);
  VertexCloudSpec spec;
  spec.n_configs = 50;
  const auto c = sample_vertex_cloud(d, spec);
  const int nd = spec.decade_max - spec.decade_min;
  REQUIRE(c.samples.size() == 50u * nd);
  for (std::size_t cfg = 0; cfg < 50; ++cfg) {
    const auto& first = c.samples[cfg * nd];
    for (int k = 0; k < nd; ++k) {
      const auto& s = c.samples[cfg * nd + k];
      const double h = std::sqrt(s.t);
      CHECK(s.x.theta == first.x.theta);
      CHECK(s.y.r / h == doctest::Approx(first.y.r / std::sqrt(first.t)).epsilon(1e-12));
      const double scaled = s.x.r / h;
      CHECK(std::floor(std::log10(scaled)) == spec.decade_min + k);
      CHECK(s.x.r >= spec.r_min * (1 - 1e-12));
      CHECK(s.t <= spec.t_max * (1 + 1e-12));
    }
  }
}

TEST_CASE("Chapman-Kolmogorov against the image oracle") {
  const KernelConfig cfg{AngularDomain(kPi)};
  CloudSpec spec;
  spec.n = 4;
  spec.t_min = 0.05;
  spec.t_max = 1.0;
  spec.r_min = 0.2;
  spec.r_max = 3.0;
  spec.seed = 2;
  for (const auto& s : sample_kernel_cloud(cfg.domain, spec).samples) {
    const auto r = check_chapman_kolmogorov(cfg, s.t, 0.5 * s.t, s.x, s.y);
    CHECK_FALSE(r.underflow);
    CHECK(r.residual <= 1e-4);
    CHECK(std::fabs(r.rhs - image_kernel_oracle(kPi, 1.5 * s.t, s.x, s.y)) <= 1e-10 * r.rhs);
  }
}

TEST_CASE("Chapman-Kolmogorov on a reflex wedge and at coincident points") {
  const KernelConfig cfg{AngularDomain(3 * kPi / 2)};
  const PolarPoint x{0.8, 2.0};
  const auto same = check_chapman_kolmogorov(cfg, 0.3, 0.3, x, x);
  CHECK(same.residual <= 1e-4);
  CHECK(same.rhs == doctest::Approx(heat_kernel(cfg, 0.6, x, x)));
  // Near the vertex the window is graded down to it.
  const auto vertex = check_chapman_kolmogorov(cfg, 0.4, 0.2, {0.05, 1.0}, {0.3, 4.0});
  CHECK(vertex.residual <= 1e-4);
}

TEST_CASE("Chapman-Kolmogorov underflow policy") {
  const KernelConfig cfg{AngularDomain(kPi / 2)};
  const auto r = check_chapman_kolmogorov(cfg, 1e-3, 1e-3, {1.0, 0.7}, {50.0, 0.7});
  CHECK(r.underflow);
  CHECK(r.residual == 0.0);
  CHECK_THROWS_AS(check_chapman_kolmogorov(cfg, 0.0, 1.0, {1, 1}, {1, 1}), std::invalid_argument);
}

TEST_CASE("dilation is exact") {
  const KernelConfig cfg{AngularDomain(4.0)};
  CHECK(check_dilation(cfg, 1.0, 0.7, {1.0, 1.0}, {2.0, 3.0}) == 0.0);
  for (double a : {1.0 / 16, 1.0 / 8, 0.5, 2.0, 16.0}) {
    CHECK(check_dilation(cfg, a, 0.7, {1.0, 1.0}, {2.0, 3.0}) <= 1e-12);
  }
  CHECK_THROWS_AS(check_dilation(cfg, -1.0, 0.7, {1.0, 1.0}, {2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("Kozlov bound: bounded below pi/kappa0, growing above") {
  for (double k0 : {kPi / 2, kPi, 3 * kPi / 2}) {
    CAPTURE(k0);
    const KernelConfig cfg{AngularDomain(k0)};
    const auto cloud = sample_green_bound_cloud(cfg.domain, 3, 600, 150);
    const double nu = kPi / k0;

    const auto below = fit_green_bound(cfg, 0.9 * nu, cloud);
    CHECK(below.bounded);
    CHECK(below.sigma >= 0.05);
    CHECK(below.profile_slope == doctest::Approx(0.1 * nu).epsilon(0.05));
    CHECK(std::isfinite(below.sup_ratio));

    const auto above = fit_green_bound(cfg, 1.1 * nu, cloud);
    CHECK_FALSE(above.bounded);
    CHECK(std::fabs(above.profile_slope - (-0.1 * nu)) <= 0.05);
    // Two decades of r^{pi/kappa0 - lambda}.
    CHECK(above.decade_growth(2) == doctest::Approx(std::pow(10.0, 0.2 * nu)).epsilon(0.05));

    // lambda = 0: the kernel is below the free Gaussian, so sigma = 1/4 holds.
    const auto free = fit_green_bound(cfg, 0.0, cloud);
    CHECK(free.bounded);
    CHECK(free.sigma == 0.25);
    CHECK(free.sup_ratio <= 1.0 / (4 * kPi) * (1 + 1e-9));
  }
}

TEST_CASE("Kozlov fit options are validated") {
  const KernelConfig cfg{AngularDomain(kPi)};
  const auto cloud = sample_green_bound_cloud(cfg.domain, 1, 10, 30);
  GreenBoundOptions opt;
  opt.sigma_grid = {0.3};
  CHECK_THROWS_AS(fit_green_bound(cfg, 0.5, cloud, opt), std::invalid_argument);
  CHECK_THROWS_AS(fit_green_bound(cfg, -1.0, cloud), std::invalid_argument);
}

TEST_CASE("vertex decay exponent") {
  std::vector<double> rs;
  for (int i = 0; i <= 12; ++i) rs.push_back(1e-5 * std::pow(10.0, 0.25 * i));
  for (double k0 : {kPi, kPi / 2, 3 * kPi / 2}) {
    const KernelConfig cfg{AngularDomain(k0)};
    const auto d = vertex_decay_exponent(cfg, 1.0, {1.0, k0 / 2}, rs);
    CHECK_FALSE(d.underflow);
    CHECK(std::fabs(d.slope - kPi / k0) <= 0.02);
  }
  // G ~ r^4 at kappa0 = pi/4: the two smallest radii underflow and are dropped.
  const KernelConfig cfg{AngularDomain(kPi / 4)};
  const std::vector<double> deep{1e-80, 1e-70, 1e-3, 1e-2, 1e-1};
  const auto partial = vertex_decay_exponent(cfg, 1.0, {1.0, kPi / 8}, deep);
  CHECK(partial.underflow);
  CHECK(partial.values.size() == 5);
  CHECK(std::fabs(partial.slope - 4.0) <= 0.02);
  CHECK_THROWS_AS(vertex_decay_exponent(cfg, 1e-4, {1.0, kPi / 8}, rs), NonFinite);
}

TEST_CASE("proof exponents satisfy their inequalities") {
  for (double k0 : {kPi / 2, kPi, 3 * kPi / 2, 1.9 * kPi}) {
    for (double p : {2.0, 3.0, 4.0}) {
      const auto range = theta_admissible_range(p, k0);
      for (int i = 1; i < 10; ++i) {
        const double theta = range.lo + (range.hi - range.lo) * i / 10.0;
        const auto pp = ProofIntegralParams::from_weights(p, theta, k0);
        CHECK(pp.satisfies_conditions());
        CHECK(pp.b > -2.0);
        CHECK(pp.time_tail_exponent() > 2.0);
        CHECK(pp.mu == doctest::Approx(1 + (theta - 2) / p));
        if (pp.b < 0) {
          REQUIRE(pp.beta_prime.has_value());
          CHECK(*pp.beta_prime == doctest::Approx(-pp.b));
        }
      }
    }
  }
  CHECK_THROWS_AS(ProofIntegralParams::from_weights(1.5, 2.0, kPi), std::invalid_argument);
  CHECK_THROWS_AS(ProofIntegralParams::from_weights(2.0, 4.0, kPi), std::invalid_argument);
  CHECK_THROWS_AS(ProofIntegralParams::from_weights(2.0, 2.0, kPi, 5.0), std::invalid_argument);
}

TEST_CASE("sup integral: Gaussian mass at b = 0") {
  CHECK(std::fabs(sup_integrand_integral(0.0, 1.0, {3.0, 4.0}) - kPi) <= 1e-10);
  CHECK(std::fabs(sup_integrand_integral(0.0, 1e-3, {30.0, 40.0}) - kPi) <= 1e-10);
  const auto c = default_c_samples();
  const auto x = default_x_samples();
  const auto r = verify_sup_integral_b(0.0, c, x);
  CHECK(std::fabs(r.max - kPi) <= 1e-10);
  CHECK_FALSE(r.divergent);
}

TEST_CASE("sup integral: bounded and refinement-stable at b = -1") {
  const auto c = default_c_samples();
  const auto x = default_x_samples();
  const auto r = verify_sup_integral_b(-1.0, c, x);
  const auto fine = verify_sup_integral_b(-1.0, c, x, SupIntegralQuad{}.refined());
  CHECK(std::isfinite(r.max));
  CHECK(std::fabs(r.max - fine.max) <= 1e-8 * fine.max);
  CHECK_FALSE(r.divergent);
  // Cutoff values converge to the full integral.
  CHECK(r.cutoff_values.back() == doctest::Approx(sup_integrand_integral(-1.0, r.argmax_c, r.argmax_x)).epsilon(1e-9));
  // At x = 0 the integral is radial: 2 pi int e^{-rho^2} (rho + 1) d rho.
  const double at0 = sup_integrand_integral(-1.0, 1.0, {0.0, 0.0});
  CHECK(at0 == doctest::Approx(kPi * (1.0 + std::sqrt(kPi))).epsilon(1e-10));
}

TEST_CASE("sup integral: rotation invariance") {
  for (double b : {-1.5, -0.5, 0.7}) {
    for (double r : {0.1, 1.0, 7.0, 40.0}) {
      const double v0 = sup_integrand_integral(b, 1.0, {r, 0.0});
      for (double a : {0.4, 2.5, 5.1}) {
        CHECK(sup_integrand_integral(b, 1.0, {r * std::cos(a), r * std::sin(a)}) ==
              doctest::Approx(v0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("sup integral: divergence below b = -2") {
  const auto c = default_c_samples();
  const auto x = default_x_samples();
  const auto r = verify_sup_integral_b(-2.5, c, x);
  CHECK(std::isinf(r.max));
  CHECK(r.divergent);
  // The singular part grows like eps^{b + 2}: each decade of cutoff
  // multiplies the increment by 10^{1/2}.
  const auto& v = r.cutoff_values;
  const std::size_t n = v.size();
  REQUIRE(n >= 3);
  CHECK((v[n - 1] - v[n - 2]) / (v[n - 2] - v[n - 3]) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-3));
}

TEST_CASE("time tail integral") {
  CHECK(std::fabs(verify_time_tail_integral(4.0) - 1.0 / 3.0) <= 1e-10);
  CHECK(std::fabs(verify_time_tail_integral(3.0) - 1.0) <= 1e-10);
  CHECK(std::fabs(verify_time_tail_integral(2.01) / time_tail_closed_form(2.01) - 1.0) <= 1e-6);
  for (double e : {2.3, 2.5, 3.7, 6.0, 11.5}) {
    CHECK(verify_time_tail_integral(e) == doctest::Approx(time_tail_closed_form(e)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(verify_time_tail_integral(2.0), std::invalid_argument);
}

}  // TEST_SUITE
