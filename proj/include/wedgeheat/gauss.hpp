#pragma once

#include <vector>

namespace wedgeheat {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule (n >= 1). Rules are computed once per n and cached.
const GaussRule& gauss_legendre(int n);

/// Appends the n-point rule mapped to [a, b].
void append_gauss_panel(double a, double b, int n, std::vector<double>& nodes,
                        std::vector<double>& weights);

}  // namespace wedgeheat
