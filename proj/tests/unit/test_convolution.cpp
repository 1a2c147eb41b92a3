#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "wedgeheat/convolution.hpp"
#include "wedgeheat/special.hpp"

using namespace wedgeheat;

namespace {

SpatialField vertex_mode(double k0, SmoothCutoff cut = SmoothCutoff::smooth(0.25, 0.5)) {
  return SpatialField::separable(1, RadialProfile::power_cutoff(1.0, kPi / k0, cut));
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_SUITE("convolution") {

TEST_CASE("schedules") {
  const TimeSchedule s{{0.5, 1.0}, {2.0, -1.0, 3.0}};
  CHECK_NOTHROW(s.validate());
  CHECK(s(0.2) == 2.0);
  CHECK(s(0.5) == -1.0);
  CHECK(s(7.0) == 3.0);
  CHECK_THROWS_AS((TimeSchedule{{1.0}, {1.0}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TimeSchedule{{1.0, 0.5}, {1.0, 1.0, 1.0}}.validate()), std::invalid_argument);
  NoiseSpec dup{{{1, SpatialField::zero(), {}}, {1, SpatialField::zero(), {}}}};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("refined time grids") {
  const TimeQuadSpec spec{24, 6, 0.5, 4};
  const double breaks[] = {0.3, 0.7};
  const PanelGrid g = refined_time_grid(2.0, 1e-6, breaks, spec, true);
  CHECK(g.lower() == 0.0);
  CHECK(g.upper() == 2.0);
  CHECK(g.integrate([](double s) { return s * s * s; }) == doctest::Approx(4.0).epsilon(1e-13));
  // Kinks at the breaks are integrated exactly.
  CHECK(g.integrate([](double s) { return std::fabs(s - 0.3) + (s > 0.7 ? 1.0 : 0.0); }) ==
        doctest::Approx(0.5 * 0.09 + 0.5 * 1.7 * 1.7 + 1.3).epsilon(1e-13));
  // sqrt behaviour right after a break.
  CHECK(g.integrate([](double s) { return s > 0.3 ? std::sqrt(s - 0.3) : 0.0; }) ==
        doctest::Approx(2.0 / 3.0 * std::pow(1.7, 1.5)).epsilon(1e-10));
  bool has_break = false;
  for (const auto& p : g.panels()) has_break |= p.a == 0.7;
  CHECK(has_break);
}

TEST_CASE("mode transform reproduces the invariant harmonic r^nu") {
  // r^nu sin(nu theta) is harmonic, vanishes on both rays and is fixed by
  // the heat semigroup (Weber's second exponential integral).
  for (double k0 : {kPi / 2, kPi, 1.5 * kPi}) {
    const KernelConfig cfg{AngularDomain(k0)};
    for (int m : {1, 2}) {
      const double nu = m * kPi / k0;
      const auto F = RadialProfile::power_cutoff(1.0, nu, SmoothCutoff::none());
      for (double tau : {1e-8, 1e-3, 0.5, 10.0}) {
        for (double r : {1e-4, 0.05, 1.0, 7.0}) {
          CHECK(rel(mode_radial_transform(cfg, m, F, tau, r), std::pow(r, nu)) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("mode route agrees with brute-force 2D kernel quadrature") {
  for (double k0 : {kPi / 2, 1.5 * kPi}) {
    const KernelConfig cfg{AngularDomain(k0)};
    const auto g = vertex_mode(k0);
    for (double tau : {1e-2, 0.05}) {
      for (PolarPoint x : {PolarPoint{0.3, k0 / 3}, PolarPoint{0.05, k0 / 2}, PolarPoint{0.45, 0.3}}) {
        const double a = semigroup_apply(cfg, g, tau, x);
        const double b = semigroup_apply_2d(cfg, g, tau, x, 1, 6, 10.0);
        INFO("kappa0=" << k0 << " tau=" << tau << " r=" << x.r);
        CHECK(rel(a, b) < 1e-6);
      }
    }
  }
}

TEST_CASE("zero inputs give zero") {
  const KernelConfig cfg{AngularDomain(1.0)};
  CHECK(det_convolve(cfg, SourceSpec{}, 1.0, {0.3, 0.5}) == 0.0);
  CHECK(det_convolve(cfg, SourceSpec{{{SpatialField::zero(), {}}}}, 1.0, {0.3, 0.5}) == 0.0);
  CHECK(variance_at(cfg, NoiseSpec{}, 1.0, {0.3, 0.5}) == 0.0);
  CHECK(semigroup_apply_2d(cfg, SpatialField::zero(), 0.1, {0.3, 0.5}) == 0.0);
  const PolarGrid grid(AngularDomain(1.0), GridSpec{0.01, 1.0, 4, 1.0, 3, 1});
  const double times[] = {0.5, 1.0};
  const double tw[] = {0.5, 0.5};
  const auto var = variance_field(cfg, NoiseSpec{}, times, grid);
  CHECK(lhs_weighted_moment(var, {2.0, 2.0}, tw) == 0.0);
  CHECK(rhs_g_norm(NoiseSpec{}, {2.0, 2.0}, grid, times, tw) == 0.0);
}

TEST_CASE("deterministic convolution of a Laplacian") {
  // f = Laplacian(h) gives v(t) = e^{t Laplacian} h - h.
  for (double k0 : {kPi / 2, 1.5 * kPi}) {
    const KernelConfig cfg{AngularDomain(k0)};
    const double nu = kPi / k0;
    const auto cut = SmoothCutoff::smooth(0.25, 0.5);
    for (double gamma : {nu, nu + 0.7}) {
      const auto h = SpatialField::separable(1, RadialProfile::power_cutoff(1.0, gamma, cut));
      const SourceSpec f{{{SpatialField::separable(1, RadialProfile::power_cutoff_laplacian(1.0, gamma, cut, nu)), {}}}};
      for (double t : {0.01, 0.3}) {
        for (PolarPoint x : {PolarPoint{0.1, k0 / 2}, PolarPoint{0.35, k0 / 4}, PolarPoint{0.6, k0 / 3}}) {
          const double v = det_convolve(cfg, f, t, x);
          const double expect = semigroup_apply(cfg, h, t, x) - h(k0, x);
          INFO("kappa0=" << k0 << " gamma=" << gamma << " t=" << t << " r=" << x.r);
          CHECK(std::fabs(v - expect) <= 1e-4 * std::fabs(expect));
        }
      }
    }
  }
}

TEST_CASE("deterministic convolution: refinement, linearity, schedules") {
  const double k0 = 1.5 * kPi;
  const KernelConfig cfg{AngularDomain(k0)};
  const auto g1 = vertex_mode(k0);
  const auto g2 = SpatialField::separable(2, RadialProfile::power_cutoff(1.0, 0.3, SmoothCutoff::smooth(0.4, 0.9)));
  const SourceSpec s1{{{g1, {}}}};
  const SourceSpec s2{{{g2, TimeSchedule{{0.2}, {1.0, -2.0}}}}};
  const SourceSpec both{{{g1, TimeSchedule::constant(2.0)}, {g2, TimeSchedule{{0.2}, {1.0, -2.0}}}}};
  const PolarPoint x{0.2, 1.0};
  const double v1 = det_convolve(cfg, s1, 0.5, x);
  const double v2 = det_convolve(cfg, s2, 0.5, x);
  CHECK(rel(det_convolve(cfg, both, 0.5, x), 2.0 * v1 + v2) < 1e-13);
  CHECK(rel(det_convolve(cfg, s1, 0.5, x, ConvolutionQuad{}.refined()), v1) < 1e-4);
  CHECK(rel(det_convolve(cfg, s2, 0.5, x, ConvolutionQuad{}.refined()), v2) < 1e-4);
  // A switch after t has no effect; one at the start flips the sign.
  const SourceSpec late{{{g1, TimeSchedule{{0.9}, {1.0, 5.0}}}}};
  CHECK(det_convolve(cfg, late, 0.5, x) == doctest::Approx(v1).epsilon(1e-12));
  // Time-constant source: v(t) = int_0^t e^{s Laplacian} f ds, checked on a
  // direct lag quadrature of the semigroup.
  const double direct = PanelGrid::accumulating_left(TimeQuadSpec{30, 8, 0.5, 4}, 0.0, 0.5).integrate([&](double s) {
    return semigroup_apply(cfg, g1, s, x);
  });
  CHECK(rel(v1, direct) < 1e-6);
}

TEST_CASE("variance field: additivity and brute-force oracle") {
  const double k0 = kPi / 2;
  const KernelConfig cfg{AngularDomain(k0)};
  const auto g = vertex_mode(k0);
  const NoiseSpec one{{{1, g, {}}}};
  const NoiseSpec two{{{1, g, {}}, {7, g, {}}}};
  const PolarGrid grid(AngularDomain(k0), GridSpec{0.02, 0.8, 6, 1.5, 3, 1});
  const double times[] = {0.1, 0.6};
  const auto v1 = variance_field(cfg, one, times, grid);
  const auto v2 = variance_field(cfg, two, times, grid);
  for (std::size_t i = 0; i < v1.values.size(); ++i) CHECK(v2.values[i] == 2.0 * v1.values[i]);
  for (double v : v1.values) CHECK(v >= 0.0);

  // Independent oracle: int_0^t (e^{s Laplacian} g)(x)^2 ds with the semigroup
  // from 2D kernel quadrature. Below s0 = 1e-4 the semigroup is within
  // O(s0) of g itself, and that piece is at most a 1e-4 share of the total.
  const double t = 0.4;
  const double s0 = 1e-4;
  for (PolarPoint x : {PolarPoint{0.3, k0 / 3}, PolarPoint{0.1, k0 / 2}, PolarPoint{0.45, 1.2}}) {
    const PanelGrid sg = PanelGrid::accumulating_left(TimeQuadSpec{12, 6, 0.5, 1}, s0, t);
    const double tail = sg.integrate([&](double s) {
      const double h = semigroup_apply_2d(cfg, g, s, x, 1, 6, 9.0);
      return h * h;
    });
    const double gx = g(k0, x);
    const double oracle = tail + s0 * gx * gx;
    const double v = variance_at(cfg, one, t, x);
    INFO("r=" << x.r);
    CHECK(rel(v, oracle) < 1e-3);
  }
}

TEST_CASE("variance with switching schedules") {
  const double k0 = 1.5 * kPi;
  const KernelConfig cfg{AngularDomain(k0)};
  const auto g = vertex_mode(k0);
  const PolarPoint x{0.2, 2.0};
  // a = 1 on [0, 0.3), 2 after: Var(t) = int_0^{t-0.3} 4 h^2 + int_{t-0.3}^t h^2 in the lag.
  const NoiseSpec sw{{{1, g, TimeSchedule{{0.3}, {1.0, 2.0}}}}};
  const double t = 0.5;
  const PanelGrid near = PanelGrid::accumulating_left(TimeQuadSpec{30, 8, 0.5, 4}, 0.0, t - 0.3);
  const PanelGrid far = PanelGrid::uniform(t - 0.3, t, 4, 10);
  auto h2 = [&](double s) {
    const double h = semigroup_apply(cfg, g, s, x);
    return h * h;
  };
  const double expect = 4.0 * near.integrate(h2) + far.integrate(h2);
  CHECK(rel(variance_at(cfg, sw, t, x), expect) < 1e-6);
}

TEST_CASE("weighted moments: p = 2 identity and the separable RHS") {
  const double k0 = kPi / 2;
  const KernelConfig cfg{AngularDomain(k0)};
  const double nu = kPi / k0;
  const auto g = vertex_mode(k0, SmoothCutoff::hard(1.0));
  const NoiseSpec noise{{{1, g, {}}}};
  const PolarGrid grid(AngularDomain(k0), GridSpec::decades(1e-3, 3, 8, 8, 6));
  const PanelGrid tg = PanelGrid::uniform(0.0, 2.0, 2, 4);
  const auto times = tg.nodes();
  const auto tw = tg.weights();
  for (WeightParams w : {WeightParams{2.0, 1.0}, WeightParams{3.0, 0.5}}) {
    const double s = w.p * nu + w.theta;
    const double angular = PanelGrid::uniform(0.0, k0, 32, 16).integrate([&](double th) {
      return std::pow(std::fabs(std::sin(nu * th)), w.p);
    });
    const double expect = 2.0 * angular * (1.0 - std::pow(1e-3, s)) / s;
    CHECK(rel(rhs_g_norm(noise, w, grid, times, tw), expect) < 1e-10);
  }
  // p = 2: moment factor 1 and Var enters linearly.
  const PolarGrid small(AngularDomain(k0), GridSpec{0.05, 1.0, 5, 1.0, 4, 2});
  const auto var = variance_field(cfg, noise, times, small);
  double manual = 0.0;
  for (std::size_t l = 0; l < times.size(); ++l) {
    for (std::size_t k = 0; k < small.size(); ++k) {
      manual += tw[l] * var.at(l, k) * std::pow(small.point(k).r, 1.5 - 4.0) * small.weight(k);
    }
  }
  CHECK(rel(lhs_weighted_moment(var, {2.0, 1.5}, tw), manual) < 1e-12);
  CHECK_THROWS_AS(lhs_weighted_moment(var, {1.5, 1.5}, tw), std::invalid_argument);
  const auto rows = lhs_rows(var, {2.0, 1.5}, tw);
  CHECK(rows.above(0.0) == doctest::Approx(rows.total()).epsilon(1e-15));
  CHECK(rows.above(2.0) == 0.0);
}

TEST_CASE("tabulated fields are projected onto sine modes") {
  const double k0 = 2.0;
  const double nu = kPi / k0;
  const PolarGrid grid(AngularDomain(k0), GridSpec{0.1, 1.0, 40, 1.0, 16, 4});
  std::vector<double> vals(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const PolarPoint x = grid.point(k);
    vals[k] = x.r * std::sin(nu * x.theta) - 0.5 * x.r * x.r * std::sin(3 * nu * x.theta);
  }
  const auto f = SpatialField::tabulated(grid, vals, 4);
  CHECK(f.modes().size() == 4);
  const PolarPoint x{0.5, 0.7};
  const double exact = 0.5 * std::sin(nu * 0.7) - 0.125 * std::sin(3 * nu * 0.7);
  CHECK(std::fabs(f(k0, x) - exact) < 1e-4);
}

TEST_CASE("Monte Carlo sampler") {
  const double k0 = 1.5 * kPi;
  const KernelConfig cfg{AngularDomain(k0)};
  const NoiseSpec noise{{{1, vertex_mode(k0), {}}, {2, SpatialField::separable(2, RadialProfile::power_cutoff(0.5, 1.0, SmoothCutoff::smooth(0.3, 0.6))), TimeSchedule{{0.2}, {0.0, 1.0}}}}};
  const PolarPoint probes[] = {{0.1, 2.0}, {0.3, 1.0}};
  const auto a = mc_sample_w(cfg, noise, 0.5, probes, 10000, 42, 3.0, {}, Exec::serial());
  const auto b = mc_sample_w(cfg, noise, 0.5, probes, 10000, 42, 3.0, {}, Exec::with_jobs(3));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.probes[i].abs_moment == b.probes[i].abs_moment);
    CHECK(a.probes[i].variance == b.probes[i].variance);
    const double var = variance_at(cfg, noise, 0.5, probes[i]);
    CHECK(rel(a.probes[i].quad_variance, var) < 1e-6);
    CHECK(std::fabs(a.probes[i].variance - var) < 3.0 * a.probes[i].variance_se);
    const double analytic = gaussian_abs_moment(3.0) * std::pow(var, 1.5);
    CHECK(std::fabs(a.probes[i].abs_moment - analytic) < 3.0 * a.probes[i].abs_moment_se);
    CHECK(std::fabs(a.probes[i].kurtosis - 3.0) < 5.0 * a.probes[i].kurtosis_se);
  }
  const auto z = mc_sample_w(cfg, NoiseSpec{{{1, SpatialField::zero(), {}}}}, 0.5, probes, 100, 1, 2.0);
  CHECK(z.probes[0].abs_moment == 0.0);
  CHECK_THROWS_AS(mc_sample_w(cfg, noise, 0.5, probes, 10, 1, 2.0), std::invalid_argument);
}

TEST_CASE("normal stream") {
  NormalStream s(7, 3);
  NormalStream t(7, 3);
  NormalStream u(7, 4);
  double sum = 0.0;
  double sum2 = 0.0;
  bool differs = false;
  for (int i = 0; i < 100000; ++i) {
    const double a = s.next_normal();
    CHECK(a == t.next_normal());
    differs |= a != u.next_normal();
    sum += a;
    sum2 += a * a;
  }
  CHECK(differs);
  CHECK(std::fabs(sum / 1e5) < 0.02);
  CHECK(std::fabs(sum2 / 1e5 - 1.0) < 0.02);
}

TEST_CASE("counterexample integral") {
  CounterexampleSpec s{2.0 * kPi, 1.0, 2.0, 2.0, 1.0, {}};
  CHECK(s.q() == doctest::Approx(1.0));
  CHECK(counterexample_constant(s) == doctest::Approx(kPi / 2).epsilon(1e-14));
  // (pi/2) (1 - delta) for q = 1.
  CHECK(counterexample_integral(s, 1e-3) == doctest::Approx(kPi / 2 * (1 - 1e-3)).epsilon(1e-13));
  s.theta = 1.0;  // q = 0: logarithmic divergence
  CHECK(s.q() == 0.0);
  CHECK(counterexample_integral(s, 1e-6) == doctest::Approx(kPi / 2 * std::log(1e6)).epsilon(1e-13));
  s.theta = 0.5;  // q = -1/2
  CHECK(counterexample_integral(s, 1e-4) == doctest::Approx(kPi / 2 * (100.0 - 1.0) / 0.5).epsilon(1e-12));
  CHECK(counterexample_log_integral(s, 1e-300) > 340.0);
  // Non-integer p, other angle: constant against closed forms.
  CounterexampleSpec c{0.75 * kPi, 2.5, 3.3, 0.0, 0.5, {}};
  const double time = std::pow(2.5, 1.0 + 1.65) / 2.65;
  const double angle = 0.75 * kPi * std::exp(gamma_ln(2.15) - gamma_ln(2.65)) / std::sqrt(kPi);
  CHECK(counterexample_constant(c) == doctest::Approx(gaussian_abs_moment(3.3) * time * angle).epsilon(1e-12));
  // Monotone in delta.
  CHECK(counterexample_integral(c, 1e-3) > counterexample_integral(c, 1e-2));
  CHECK_THROWS_AS(counterexample_integral(c, 0.6), std::invalid_argument);
  CHECK_THROWS_AS((CounterexampleSpec{7.0, 1, 2, 1, 1, {}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CounterexampleSpec{1.0, 1, 2, 1, 1, {0.1, 0.2}}.validate()), std::invalid_argument);
}

}  // TEST_SUITE
