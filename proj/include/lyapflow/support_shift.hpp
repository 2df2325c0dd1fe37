#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lyapflow/dynamics.hpp"

namespace lyapflow {

struct SupportShiftRow
{
  double epsilon = 0.0;
  double rms_tan = 0.0;
  double rms_norm = 0.0;
  double q50_dist = 0.0;
  double q95_dist = 0.0;
  std::size_t n_used = 0;
  std::size_t n_diverged = 0;
};

struct SupportShift
{
  std::vector<SupportShiftRow> rows;
  /// The target has no tangent (point mass); every shift counts as normal.
  bool degenerate = false;
};

/// Displacement of final states under eps * chi, paired path by path with
/// the unperturbed run (same seed, same noise) and split at the projection
/// foot of the unperturbed final state into tangent and normal parts.
/// Lifted directions count as normal.
SupportShift support_shift(const DriftModel& model, const CurveManifold& manifold,
                           const std::vector<double>& epsilons, std::shared_ptr<const PerturbationField> chi,
                           std::size_t n_paths, std::uint64_t seed, const Executor& executor = Executor(1));

struct ShiftSplit
{
  double tangential = 0.0;
  double normal = 0.0;
};

/// Orthogonal split of dy against a unit tangent (zero tangent: all normal).
ShiftSplit split_shift(const Vec& dy, const Vec& unit_tangent);

} // namespace lyapflow
