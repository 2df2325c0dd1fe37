#include "lyapflow/support_shift.hpp"

#include <cmath>

#include "lyapflow/alignment.hpp"
#include "lyapflow/error.hpp"

namespace lyapflow {

ShiftSplit split_shift(const Vec& dy, const Vec& unit_tangent)
{
  ShiftSplit s;
  if (unit_tangent.size() == 0 || unit_tangent.squaredNorm() == 0.0) {
    s.normal = dy.norm();
    return s;
  }
  const double along = dy.dot(unit_tangent);
  s.tangential = std::abs(along);
  s.normal = (dy - along * unit_tangent).norm();
  return s;
}

SupportShift support_shift(const DriftModel& model, const CurveManifold& manifold,
                           const std::vector<double>& epsilons, std::shared_ptr<const PerturbationField> chi,
                           std::size_t n_paths, std::uint64_t seed, const Executor& executor)
{
  if (n_paths < 1)
    throw ParameterError("n_paths must be at least 1");
  if (!chi)
    throw ParameterError("support_shift needs a perturbation field");
  for (double e : epsilons)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw ParameterError("epsilon values must be finite and non-negative");

  const std::size_t E = epsilons.size();
  std::vector<DriftModel> perturbed;
  perturbed.reserve(E);
  for (double e : epsilons)
    perturbed.push_back(model.with_perturbation(chi, e));

  SimulateOptions sim;
  sim.integrator = integrator_for(model.kind());
  sim.seed = seed;

  struct PathResult
  {
    bool base_ok = false;
    std::vector<char> ok;
    std::vector<double> tan2, norm2, dist;
  };
  std::vector<PathResult> results(n_paths);

  executor.for_each(n_paths, [&](std::size_t i, unsigned) {
    PathResult& r = results[i];
    r.ok.assign(E, 0);
    r.tan2.assign(E, 0.0);
    r.norm2.assign(E, 0.0);
    r.dist.assign(E, 0.0);
    const TrajectoryBundle base = simulate_path(model, sim, i);
    if (base.diverged)
      return;
    r.base_ok = true;
    const Projection foot = project_to_manifold(manifold, base.final_state);
    for (std::size_t e = 0; e < E; ++e) {
      const TrajectoryBundle b = epsilons[e] == 0.0 ? base : simulate_path(perturbed[e], sim, i);
      if (b.diverged)
        continue;
      const ShiftSplit s = split_shift(b.final_state - base.final_state, foot.tangent);
      r.ok[e] = 1;
      r.tan2[e] = s.tangential * s.tangential;
      r.norm2[e] = s.normal * s.normal;
      r.dist[e] = epsilons[e] == 0.0 ? foot.dist : project_to_manifold(manifold, b.final_state).dist;
    }
  });

  SupportShift out;
  out.degenerate = manifold.is_point();
  for (std::size_t e = 0; e < E; ++e) {
    SupportShiftRow row;
    row.epsilon = epsilons[e];
    double st = 0.0, sn = 0.0;
    std::vector<double> dist;
    dist.reserve(n_paths);
    for (const PathResult& r : results) {
      if (!r.base_ok || !r.ok[e]) {
        ++row.n_diverged;
        continue;
      }
      st += r.tan2[e];
      sn += r.norm2[e];
      dist.push_back(r.dist[e]);
    }
    row.n_used = dist.size();
    if (row.n_used > 0) {
      row.rms_tan = std::sqrt(st / static_cast<double>(row.n_used));
      row.rms_norm = std::sqrt(sn / static_cast<double>(row.n_used));
      row.q50_dist = quantile(dist, 0.5);
      row.q95_dist = quantile(dist, 0.95);
    } else {
      row.rms_tan = row.rms_norm = row.q50_dist = row.q95_dist = std::numeric_limits<double>::quiet_NaN();
    }
    out.rows.push_back(row);
  }
  return out;
}

} // namespace lyapflow
