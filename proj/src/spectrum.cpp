#include "lyapflow/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "lyapflow/error.hpp"

namespace lyapflow {

SpectrumGap le_gap(const Vec& exponents)
{
  if (exponents.size() < 2)
    throw DimensionError("le_gap needs at least two exponents");
  std::vector<double> l(exponents.data(), exponents.data() + exponents.size());
  std::sort(l.begin(), l.end(), std::greater<>());
  SpectrumGap g;
  g.gap = -1.0;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    const double gi = l[i] - l[i + 1];
    if (gi > g.gap) {
      g.gap = gi;
      g.index = static_cast<int>(i) + 1;
    }
  }
  g.runner_up = 0.0;
  for (std::size_t i = 0; i + 1 < l.size(); ++i)
    if (static_cast<int>(i) + 1 != g.index)
      g.runner_up = std::max(g.runner_up, l[i] - l[i + 1]);
  const double scale = std::max(std::abs(l.front()), std::abs(l.back()));
  g.degenerate = g.gap <= 1e-9 * std::max(1.0, scale);
  return g;
}

SpectrumGap le_gap(const LyapunovReport& report)
{
  return le_gap(report.exponents);
}

} // namespace lyapflow
