#include "wedgeheat/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wedgeheat {

void SmoothCutoff::validate() const {
  if (!(r0 > 0.0) || !(r1 >= r0)) throw std::invalid_argument("SmoothCutoff requires 0 < r0 <= r1");
}

namespace {

// 1 - S(u) with S the septic smootherstep 35u^4 - 84u^5 + 70u^6 - 20u^7.
double smootherstep(double u) { return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u))); }
double smootherstep_d1(double u) {
  const double w = u * (1.0 - u);
  return 140.0 * w * w * w;
}
double smootherstep_d2(double u) {
  const double w = u * (1.0 - u);
  return 420.0 * w * w * (1.0 - 2.0 * u);
}

}  // namespace

double SmoothCutoff::value(double r) const {
  if (r < r0) return 1.0;
  if (r >= r1) return 0.0;
  return 1.0 - smootherstep((r - r0) / (r1 - r0));
}

double SmoothCutoff::d1(double r) const {
  if (r <= r0 || r >= r1) return 0.0;
  const double h = r1 - r0;
  return -smootherstep_d1((r - r0) / h) / h;
}

double SmoothCutoff::d2(double r) const {
  if (r <= r0 || r >= r1) return 0.0;
  const double h = r1 - r0;
  return -smootherstep_d2((r - r0) / h) / (h * h);
}

RadialProfile RadialProfile::power_cutoff(double c, double gamma, SmoothCutoff cut) {
  cut.validate();
  RadialProfile p;
  p.kind_ = Kind::power_cutoff;
  p.c_ = c;
  p.gamma_ = gamma;
  p.cut_ = cut;
  return p;
}

RadialProfile RadialProfile::power_cutoff_laplacian(double c, double gamma, SmoothCutoff cut, double order) {
  cut.validate();
  RadialProfile p;
  p.kind_ = Kind::power_cutoff_laplacian;
  p.c_ = c;
  p.gamma_ = gamma;
  p.cut_ = cut;
  p.order_ = order;
  return p;
}

RadialProfile RadialProfile::tabulated(std::vector<double> r, std::vector<double> v) {
  if (r.size() < 2 || r.size() != v.size()) {
    throw std::invalid_argument("tabulated profile needs >= 2 nodes and matching sizes");
  }
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw std::invalid_argument("tabulated profile radii must increase strictly");
  }
  if (!(r.front() >= 0.0)) throw std::invalid_argument("tabulated profile radii must be >= 0");
  RadialProfile p;
  p.kind_ = Kind::tabulated;
  p.r_ = std::move(r);
  p.v_ = std::move(v);
  return p;
}

double RadialProfile::operator()(double r) const {
  switch (kind_) {
    case Kind::power_cutoff: {
      const double chi = cut_.value(r);
      return chi == 0.0 ? 0.0 : c_ * std::pow(r, gamma_) * chi;
    }
    case Kind::power_cutoff_laplacian: {
      if (r >= cut_.r1) return 0.0;
      // (gamma^2 - order^2) r^{gamma-2} chi + (2 gamma + 1) r^{gamma-1} chi' + r^gamma chi''
      const double rg = std::pow(r, gamma_);
      const double a = gamma_ * gamma_ - order_ * order_;
      double out = rg * cut_.d2(r) + (2.0 * gamma_ + 1.0) * rg / r * cut_.d1(r);
      if (a != 0.0) out += a * rg / (r * r) * cut_.value(r);
      return c_ * out;
    }
    case Kind::tabulated: {
      if (r < r_.front() || r > r_.back()) return 0.0;
      const auto it = std::upper_bound(r_.begin(), r_.end(), r);
      if (it == r_.end()) return v_.back();
      const std::size_t i = static_cast<std::size_t>(it - r_.begin());
      const double w = (r - r_[i - 1]) / (r_[i] - r_[i - 1]);
      return (1.0 - w) * v_[i - 1] + w * v_[i];
    }
  }
  return 0.0;
}

double RadialProfile::derivative(double r) const {
  switch (kind_) {
    case Kind::power_cutoff: {
      if (r >= cut_.r1) return 0.0;
      const double rg = std::pow(r, gamma_);
      return c_ * (gamma_ * rg / r * cut_.value(r) + rg * cut_.d1(r));
    }
    case Kind::power_cutoff_laplacian: {
      // Only needed for gradients of forcing terms; central difference suffices.
      const double h = 1e-6 * std::max(r, 1e-8);
      return ((*this)(r + h) - (*this)(r - h)) / (2.0 * h);
    }
    case Kind::tabulated: {
      if (r < r_.front() || r >= r_.back()) return 0.0;
      const auto it = std::upper_bound(r_.begin(), r_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - r_.begin());
      return (v_[i] - v_[i - 1]) / (r_[i] - r_[i - 1]);
    }
  }
  return 0.0;
}

double RadialProfile::support_end() const {
  if (kind_ == Kind::tabulated) return r_.back();
  return cut_.r1;
}

std::vector<double> RadialProfile::breakpoints() const {
  if (kind_ == Kind::tabulated) return r_;
  std::vector<double> out;
  if (std::isfinite(cut_.r0)) out.push_back(cut_.r0);
  if (std::isfinite(cut_.r1) && cut_.r1 > cut_.r0) out.push_back(cut_.r1);
  return out;
}

}  // namespace wedgeheat
