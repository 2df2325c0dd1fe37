#pragma once

#include <vector>

namespace lyapflow {

struct GaussLegendre
{
  std::vector<double> nodes;   // ascending, on [-1, 1]
  std::vector<double> weights; // sum to 2
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussLegendre gauss_legendre(int n);

} // namespace lyapflow
