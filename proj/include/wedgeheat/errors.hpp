#pragma once

#include <stdexcept>
#include <string>

namespace wedgeheat {

/// A series or iteration did not reach its tolerance within its term budget.
/// Loosen the tolerance, raise the budget, or move the regime boundary.
class NonConvergent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integrand or field produced NaN or infinity.
class NonFinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wedgeheat
