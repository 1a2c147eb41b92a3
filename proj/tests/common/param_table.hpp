#pragma once

// Exact rational reference values for the weight-parameter arithmetic.
// With kappa0 = pi * a/b the critical exponent pi/kappa0 = b/a is rational,
// so every range endpoint is a rational number computed here without
// rounding and compared against the floating-point library.

#include <boost/rational.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "wedgeheat/fields.hpp"

namespace wedgeheat::testing {

using Q = boost::rational<long long>;

inline double to_double(Q q) { return boost::rational_cast<double>(q); }

struct ParamCase {
  Q p;
  Q angle;  // kappa0 / pi
  Q theta;
};

inline std::vector<ParamCase> param_cases() {
  const std::vector<Q> ps = {Q(3, 2), Q(2), Q(5, 2), Q(3), Q(4)};
  const std::vector<Q> angles = {Q(1, 3), Q(1, 2), Q(2, 3), Q(1), Q(5, 4),
                                 Q(4, 3), Q(3, 2), Q(7, 4), Q(15, 8), Q(2)};
  std::vector<ParamCase> out;
  int k = 0;
  for (Q p : ps) {
    for (Q a : angles) {
      // theta sweeps below, inside and above the admissible range.
      const Q theta = Q(-3) + Q(k % 13, 2);
      out.push_back({p, a, theta});
      ++k;
    }
  }
  return out;
}

struct ParamCheck {
  bool ok = true;
  std::string detail;
};

inline bool near_exact(double got, Q want) {
  const double w = to_double(want);
  return std::fabs(got - w) <= 1e-14 * std::max(1.0, std::fabs(w));
}

/// Checks theta range, mu range, Grisvard bound (both forms), the theta -> mu
/// image of the range and the duality involution for one case.
inline ParamCheck check_param_case(const ParamCase& c) {
  ParamCheck out;
  auto fail = [&](const std::string& what) {
    out.ok = false;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += what;
  };
  const double p = to_double(c.p);
  const double kappa0 = kPi * to_double(c.angle);
  const double theta = to_double(c.theta);
  const Q e = Q(1) / c.angle;  // pi / kappa0

  const Interval tr = theta_admissible_range(p, kappa0);
  if (!near_exact(tr.lo, c.p * (Q(1) - e)) || !near_exact(tr.hi, c.p * (Q(1) + e))) fail("theta range");

  const Interval mr = mu_range(p, kappa0);
  const Q centre = Q(2) * (Q(1) - Q(1) / c.p);
  if (!near_exact(mr.lo, centre - e) || !near_exact(mr.hi, centre + e)) fail("mu range");

  // theta -> mu maps the theta range onto the mu range.
  const double mu_lo = derive({p, tr.lo}).mu;
  const double mu_hi = derive({p, tr.hi}).mu;
  if (!near_exact(mu_lo, centre - e) || !near_exact(mu_hi, centre + e)) fail("mu image");

  if (!near_exact(grisvard_lower_bound(p, kappa0), c.p * (Q(1) - e))) fail("grisvard bound");
  for (Q shift : {Q(-1, 10), Q(1, 10)}) {
    const double th = to_double(c.p * (Q(1) - e) + shift);
    if (!grisvard_forms_agree(p, kappa0, th)) fail("grisvard forms");
  }

  const DerivedParams d = derive({p, theta});
  const Q p_dual = c.p / (c.p - Q(1));
  const Q theta_dual = p_dual * (Q(2) - c.theta / c.p);
  if (!near_exact(d.mu, Q(1) + (c.theta - Q(2)) / c.p)) fail("mu");
  if (!near_exact(d.p_dual, p_dual) || !near_exact(d.theta_dual, theta_dual)) fail("dual");
  // Exact involution in rationals, near-exact in floating point.
  const Q p_back = p_dual / (p_dual - Q(1));
  const Q theta_back = p_back * (Q(2) - theta_dual / p_dual);
  if (p_back != c.p || theta_back != c.theta) fail("rational involution");
  const WeightParams back = dual(dual({p, theta}));
  if (!near_exact(back.p, c.p) || !near_exact(back.theta, c.theta)) fail("involution");
  return out;
}

}  // namespace wedgeheat::testing
