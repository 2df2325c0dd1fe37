#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "lyapflow/lyapunov.hpp"

namespace lyapflow {

/// Scores below this norm have no direction.
constexpr double kUndefinedScoreNorm = 1e-12;

struct AlignmentRecord
{
  std::size_t path_id = 0;
  Vec x;                     ///< final state
  Vec score_direction;       ///< unit score at the final time, empty when undefined
  bool score_defined = false;
  Vec top_vector;            ///< leading column of the final frame
  double a = std::numeric_limits<double>::quiet_NaN(); ///< |<s_hat, e_1>|
  double theta_deg = std::numeric_limits<double>::quiet_NaN(); ///< angle(span E^d, tangent at the foot)
  double dist = 0.0;         ///< distance to the manifold
  bool tangent_defined = true;
  bool isotropic = false;    ///< all finite-time stretches equal within 1e-6
};

/// Builds one record from a final state, its score and tangent frame.
AlignmentRecord make_alignment_record(std::size_t path_id, const Vec& x, const Vec& score, const Mat& frame,
                                      int d, const CurveManifold& manifold);

struct AlignmentSummary
{
  std::size_t n_paths = 0;
  std::size_t n_diverged = 0;
  std::size_t n_undefined = 0; ///< records without a score direction
  double median_a = std::numeric_limits<double>::quiet_NaN();
  double fraction_below_0_1 = std::numeric_limits<double>::quiet_NaN();
  double median_theta_deg = std::numeric_limits<double>::quiet_NaN();
  bool isotropic_degenerate = false;
};

struct AlignmentOptions
{
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  int d = 1;
  /// Tracked frame size; 0 tracks the full space (needed for the isotropy flag).
  int frame_dim = 0;
};

struct AlignmentScan
{
  std::vector<AlignmentRecord> records;
  AlignmentSummary summary;
};

/// Simulates `model` with tangent tracking and scores the final states with
/// `target_score` evaluated at `score_time`.
AlignmentScan alignment_scan(const DriftModel& model, const VectorField& target_score, double score_time,
                             const CurveManifold& manifold, const AlignmentOptions& options,
                             const Executor& executor = Executor(1));

AlignmentSummary summarize_alignment(const std::vector<AlignmentRecord>& records, std::size_t n_diverged);

struct TangentEstimate
{
  std::vector<double> theta_deg; ///< in record order, excluded records dropped
  std::size_t excluded = 0;      ///< farther than max_dist or without a tangent
  double median = std::numeric_limits<double>::quiet_NaN();
};

TangentEstimate tangent_estimate_error(const std::vector<AlignmentRecord>& records, double max_dist);

double median(std::vector<double> v);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);

} // namespace lyapflow
