#include "wedgeheat/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wedgeheat/errors.hpp"
#include "wedgeheat/geometry.hpp"

namespace wedgeheat {

void BesselAccuracy::validate() const {
  if (!(rel_tol >= 1e-15 && rel_tol <= 1e-6)) {
    throw std::invalid_argument("BesselAccuracy.rel_tol must lie in [1e-15, 1e-6]");
  }
  if (max_terms < 50) throw std::invalid_argument("BesselAccuracy.max_terms must be >= 50");
  if (!(series_switch_z > 0.0)) throw std::invalid_argument("BesselAccuracy.series_switch_z must be > 0");
  if (!(debye_min_order >= 10.0)) throw std::invalid_argument("BesselAccuracy.debye_min_order must be >= 10");
}

double gamma_ln(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_ln requires x > 0");
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Reflection keeps the rational part away from its pole.
    return std::log(kPi / std::sin(kPi * x)) - gamma_ln(1.0 - x);
  }
  static constexpr double g = 7.0;
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double xm = x - 1.0;
  double a = c[0];
  for (int i = 1; i < 9; ++i) a += c[static_cast<std::size_t>(i)] / (xm + i);
  const double t = xm + g + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (xm + 0.5) * std::log(t) - t + std::log(a);
}

double gaussian_abs_moment(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("gaussian_abs_moment requires p >= 1");
  return std::exp(0.5 * p * std::log(2.0) + gamma_ln(0.5 * (p + 1.0)) - 0.5 * std::log(kPi));
}

namespace {

constexpr int kDebyeTerms = 13;

// Debye polynomials u_0 .. u_kDebyeTerms from
//   u_{k+1} = p^2 (1 - p^2) u_k' / 2 + (1/8) int_0^p (1 - 5 s^2) u_k(s) ds,
// generated in long double. u_k(p) = p^k q_k(p^2); only the coefficients of
// q_k are kept, so evaluation is a Horner pass in p^2.
struct DebyeTable {
  std::array<std::vector<double>, kDebyeTerms + 1> q;
};

const DebyeTable& debye_table() {
  static const DebyeTable table = [] {
    std::vector<std::vector<long double>> u;
    u.push_back({1.0L});
    for (int k = 0; k < kDebyeTerms; ++k) {
      const auto& prev = u.back();
      std::vector<long double> next(prev.size() + 3, 0.0L);
      for (std::size_t i = 1; i < prev.size(); ++i) {
        const long double d = static_cast<long double>(i) * prev[i];  // coefficient of p^{i-1}
        next[i + 1] += 0.5L * d;
        next[i + 3] -= 0.5L * d;
      }
      for (std::size_t i = 0; i < prev.size(); ++i) {
        next[i + 1] += prev[i] / (8.0L * static_cast<long double>(i + 1));
        next[i + 3] -= 5.0L * prev[i] / (8.0L * static_cast<long double>(i + 3));
      }
      u.push_back(std::move(next));
    }
    DebyeTable t;
    for (int k = 0; k <= kDebyeTerms; ++k) {
      const auto& c = u[static_cast<std::size_t>(k)];
      for (std::size_t i = static_cast<std::size_t>(k); i < c.size(); i += 2) {
        t.q[static_cast<std::size_t>(k)].push_back(static_cast<double>(c[i]));
      }
    }
    return t;
  }();
  return table;
}

double debye_scaled(double nu, double z, const BesselAccuracy& acc) {
  const double x = z / nu;
  const double s = std::sqrt(1.0 + x * x);
  const double p = 1.0 / s;
  const double p2 = p * p;
  // nu * eta - z with eta = s + log(x / (1 + s)); s - x = 1 / (s + x).
  const double exponent = nu / (s + x) + nu * std::log(x / (1.0 + s));
  const auto& table = debye_table();
  double series = 1.0;
  double scale = 1.0;  // (p / nu)^k
  const double step = p / nu;
  double last = 1.0;
  bool converged = false;
  for (int k = 1; k <= kDebyeTerms; ++k) {
    scale *= step;
    const auto& c = table.q[static_cast<std::size_t>(k)];
    double val = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) val = val * p2 + c[i];
    last = val * scale;
    series += last;
    if (std::fabs(last) < 0.1 * acc.rel_tol * std::fabs(series)) {
      converged = true;
      break;
    }
  }
  if (!converged && std::fabs(last) > acc.rel_tol * std::fabs(series) * 1e2) {
    throw NonConvergent("bessel_i_scaled: uniform expansion too coarse at nu=" + std::to_string(nu));
  }
  return std::exp(exponent) / std::sqrt(2.0 * kPi * nu * s) * series;
}

// Ascending series, summed outward from the largest term in both directions.
double power_series_scaled(double nu, double z, const BesselAccuracy& acc) {
  const double q = 0.25 * z * z;
  const double peak_real = 0.5 * (std::sqrt(nu * nu + z * z) - (nu + 2.0));
  const double m_star = peak_real > 0.0 ? std::floor(peak_real) : 0.0;
  const double log_peak = (nu + 2.0 * m_star) * std::log(0.5 * z) - gamma_ln(m_star + 1.0) -
                          gamma_ln(nu + m_star + 1.0);
  double sum = 1.0;
  double term = 1.0;
  int used = 0;
  bool converged = false;
  for (double m = m_star; used < acc.max_terms; m += 1.0, ++used) {
    term *= q / ((m + 1.0) * (nu + m + 1.0));
    sum += term;
    if (term < acc.rel_tol * 0.25 * sum) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NonConvergent("bessel_i_scaled: ascending series exceeded max_terms at z=" + std::to_string(z));
  }
  term = 1.0;
  for (double m = m_star; m > 0.0; m -= 1.0) {
    term *= m * (nu + m) / q;
    sum += term;
    if (term < acc.rel_tol * 0.25 * sum) break;
    if (++used > 2 * acc.max_terms) {
      throw NonConvergent("bessel_i_scaled: ascending series exceeded max_terms at z=" + std::to_string(z));
    }
  }
  return std::exp(log_peak - z + std::log(sum));
}

std::optional<double> hankel_scaled(double nu, double z, const BesselAccuracy& acc) {
  const double mu = 4.0 * nu * nu;
  double sum = 1.0;
  double term = 1.0;
  double prev_abs = 1.0;
  for (int j = 1; j <= acc.max_terms; ++j) {
    const double odd = 2.0 * j - 1.0;
    term *= -(mu - odd * odd) / (8.0 * z * j);
    if (term == 0.0) return sum / std::sqrt(2.0 * kPi * z);  // half-integer order: finite series
    const double a = std::fabs(term);
    if (a > prev_abs && j > 1) return std::nullopt;  // past the smallest term
    sum += term;
    if (a < acc.rel_tol * 0.25 * std::fabs(sum)) return sum / std::sqrt(2.0 * kPi * z);
    prev_abs = a;
  }
  return std::nullopt;
}

}  // namespace

double bessel_i_scaled(double nu, double z, const BesselAccuracy& acc) {
  if (!(nu >= 0.0) || !(z >= 0.0)) {
    throw std::invalid_argument("bessel_i_scaled requires nu >= 0 and z >= 0");
  }
  if (z == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (std::isinf(z)) return 0.0;
  if (nu >= acc.debye_min_order) return debye_scaled(nu, z, acc);
  const double switch_z = std::max(acc.series_switch_z, 0.5 * nu * nu);
  if (z <= switch_z) return power_series_scaled(nu, z, acc);
  if (auto v = hankel_scaled(nu, z, acc)) return *v;
  return power_series_scaled(nu, z, acc);
}

}  // namespace wedgeheat
