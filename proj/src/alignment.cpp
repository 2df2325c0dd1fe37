#include "lyapflow/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "lyapflow/error.hpp"

namespace lyapflow {

double quantile(std::vector<double> v, double q)
{
  if (v.empty())
    return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v)
{
  return quantile(std::move(v), 0.5);
}

AlignmentRecord make_alignment_record(std::size_t path_id, const Vec& x, const Vec& score, const Mat& frame,
                                      int d, const CurveManifold& manifold)
{
  if (d < 1 || d > frame.cols())
    throw DimensionError("alignment needs 1 <= d <= frame columns");
  AlignmentRecord r;
  r.path_id = path_id;
  r.x = x;
  r.top_vector = frame.col(0);
  const double sn = score.norm();
  r.score_defined = std::isfinite(sn) && sn >= kUndefinedScoreNorm;
  if (r.score_defined) {
    r.score_direction = score / sn;
    r.a = std::min(1.0, std::abs(r.score_direction.dot(r.top_vector)));
  }
  const Projection p = project_to_manifold(manifold, x);
  r.dist = p.dist;
  r.tangent_defined = !p.degenerate;
  if (r.tangent_defined) {
    const double c = std::min(1.0, (frame.leftCols(d).transpose() * p.tangent).norm());
    r.theta_deg = std::acos(c) * 180.0 / std::numbers::pi;
  }
  return r;
}

AlignmentSummary summarize_alignment(const std::vector<AlignmentRecord>& records, std::size_t n_diverged)
{
  AlignmentSummary s;
  s.n_paths = records.size() + n_diverged;
  s.n_diverged = n_diverged;
  std::vector<double> a, theta;
  bool all_iso = !records.empty();
  for (const AlignmentRecord& r : records) {
    all_iso = all_iso && r.isotropic;
    if (!r.score_defined) {
      ++s.n_undefined;
      continue;
    }
    a.push_back(r.a);
  }
  for (const AlignmentRecord& r : records)
    if (r.tangent_defined)
      theta.push_back(r.theta_deg);
  s.isotropic_degenerate = all_iso;
  if (!a.empty()) {
    s.median_a = median(a);
    s.fraction_below_0_1 =
      static_cast<double>(std::count_if(a.begin(), a.end(), [](double v) { return v < 0.1; })) / a.size();
  }
  if (!theta.empty())
    s.median_theta_deg = median(theta);
  return s;
}

AlignmentScan alignment_scan(const DriftModel& model, const VectorField& target_score, double score_time,
                             const CurveManifold& manifold, const AlignmentOptions& options,
                             const Executor& executor)
{
  const int D = model.dim();
  const int k = options.frame_dim == 0 ? D : options.frame_dim;
  if (options.d < 1 || options.d > k || k > D)
    throw DimensionError("alignment needs 1 <= d <= frame_dim <= D");
  if (options.n_paths < 1)
    throw ParameterError("n_paths must be at least 1");

  SimulateOptions sim;
  sim.integrator = integrator_for(model.kind());
  sim.seed = options.seed;
  sim.frame_dim = k;

  std::vector<std::optional<AlignmentRecord>> slots(options.n_paths);
  executor.for_each(options.n_paths, [&](std::size_t i, unsigned) {
    const TrajectoryBundle b = simulate_path(model, sim, i);
    if (b.diverged)
      return;
    const Vec s = target_score.evaluate(b.final_state, score_time, 0).value;
    AlignmentRecord r = make_alignment_record(i, b.final_state, s, b.final_frame, options.d, manifold);
    r.isotropic = k == D && (b.log_r_sum.maxCoeff() - b.log_r_sum.minCoeff()) < 1e-6;
    slots[i] = std::move(r);
  });

  AlignmentScan out;
  std::size_t diverged = 0;
  for (auto& s : slots) {
    if (s)
      out.records.push_back(std::move(*s));
    else
      ++diverged;
  }
  out.summary = summarize_alignment(out.records, diverged);
  return out;
}

TangentEstimate tangent_estimate_error(const std::vector<AlignmentRecord>& records, double max_dist)
{
  TangentEstimate t;
  for (const AlignmentRecord& r : records) {
    if (!r.tangent_defined || !(r.dist <= max_dist) || !std::isfinite(r.theta_deg)) {
      ++t.excluded;
      continue;
    }
    t.theta_deg.push_back(r.theta_deg);
  }
  t.median = median(t.theta_deg);
  return t;
}

} // namespace lyapflow
