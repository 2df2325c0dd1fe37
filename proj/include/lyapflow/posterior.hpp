#pragma once

#include <vector>

#include "lyapflow/quadrature.hpp"
#include "lyapflow/schedule.hpp"

namespace lyapflow {

/// Moments of the curve point x0 given x under the Gaussian kernel
/// N(x; scale * x0, sigma^2 I) with prior q dgamma.
struct PosteriorMoments
{
  double log_Z = 0.0; ///< log marginal density at x
  Vec mean;           ///< posterior mean of x0
  Mat cov;            ///< posterior covariance of x0
  Tensor3 third;      ///< third central moment, when requested
  bool has_third = false;
};

/// All sums run in the log domain. Panels whose best possible contribution
/// is below exp(-46) of the leading term are skipped.
PosteriorMoments posterior_moments(const Vec& x, double scale, double sigma, const QuadratureRule& rule,
                                   bool third = false);

/// Schedule-based kernel at forward time t (t must be positive).
PosteriorMoments posterior_moments(const Vec& x, double t, const QuadratureRule& rule,
                                   const NoiseSchedule& schedule, bool third = false);

struct QuadratureOptions
{
  int min_nodes_per_arc = 64;
  int max_nodes_per_arc = 16384;
  int panel_order = 8;
  /// Largest panel length allowed, in units of the kernel width sigma/scale.
  double resolution = 1.0;
};

/// Rules with doubling resolution. The kernel width sigma/scale picks the
/// coarsest rule whose panels still resolve it.
class QuadratureLadder
{
public:
  QuadratureLadder(const CurveManifold& m, const QuadratureOptions& options);

  const QuadratureRule& select(double scale, double sigma) const;
  std::size_t levels() const { return rules_.size(); }
  const QuadratureRule& level(std::size_t i) const { return rules_[i]; }
  const QuadratureOptions& options() const { return options_; }

private:
  QuadratureOptions options_;
  std::vector<QuadratureRule> rules_;
};

} // namespace lyapflow
