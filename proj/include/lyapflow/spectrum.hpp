#pragma once

#include "lyapflow/lyapunov.hpp"

namespace lyapflow {

struct SpectrumGap
{
  int index = 1;            ///< 1-based i maximizing lambda_i - lambda_{i+1}
  double gap = 0.0;
  double runner_up = 0.0;   ///< largest gap at any other index
  bool degenerate = false;  ///< the spectrum has no resolvable gap
};

/// Uses the sorted exponents. Ties go to the lowest index.
SpectrumGap le_gap(const Vec& exponents);
SpectrumGap le_gap(const LyapunovReport& report);

} // namespace lyapflow
