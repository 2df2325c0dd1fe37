#pragma once

#include <cstdint>
#include <vector>

#include "lyapflow/dynamics.hpp"
#include "lyapflow/rng.hpp"

namespace lyapflow {

/// Rejection level for R diagonals in qr_push.
constexpr double kDegenerateTangentTolerance = 1e-14;

/// QR of a seeded standard Gaussian D x k matrix, R diagonal made positive.
Mat init_frame(int D, int k, std::uint64_t seed);
Mat init_frame(int D, int k, CounterRng& rng);

struct QrStep
{
  Mat frame; ///< E' (D x k), orthonormal
  Vec r;     ///< positive diagonal of R
  Mat R;     ///< k x k upper triangular
};

/// J E = E' R with positive diag(R).
QrStep qr_push(const Mat& frame, const Mat& jacobian);

struct LyapunovReport
{
  Vec exponents;          ///< sorted nonincreasing
  Vec column_exponents;   ///< lambda per frame column, sum_n log r_{n,i} / tau_eff
  std::vector<int> order; ///< exponents(i) == column_exponents(order[i])
  Vec log_r_sum;          ///< raw sum_n log r_{n,i}, column order
  double tau_eff = 0.0;   ///< n_steps * dt
  double dt = 0.0;
  int n_steps = 0;
  Mat final_frame;        ///< most-sensitive-subspace estimate at the final time
  std::vector<Vec> log_r_history;

  /// Exponents per step rather than per unit time.
  Vec per_step_exponents() const { return exponents * (tau_eff / n_steps); }
};

LyapunovReport ftle(const TrajectoryBundle& bundle, int k);

/// Finite-time exponents with the initial frame converged to the leading
/// right singular vectors of the Jacobian product: alternating forward QR
/// sweeps through dF_n and backward sweeps through dF_n^T (orthogonal
/// iteration on P^T P). The result is independent of the starting frame once
/// converged and its exponents equal log singular values / tau_eff. Needs
/// recorded Jacobians. `sweeps_used` reports the forward passes run.
LyapunovReport ftle_refined(const TrajectoryBundle& bundle, int k, int max_sweeps = 50, double tol = 1e-13,
                            int* sweeps_used = nullptr);

/// Exponents averaged over paths (non-diverged only) into one report;
/// the frame of the first usable path is kept.
LyapunovReport mean_report(const std::vector<LyapunovReport>& reports);

struct CauchyGreen
{
  Vec values;  ///< top-k eigenvalues of P P^T, descending
  Mat vectors; ///< D x k
  double tau = 0.0; ///< integrated time of the window
};

/// Eigenpairs of P P^T for P = dF_{N-1} ... dF_{first}; needs recorded Jacobians.
/// Throws OverflowError when the explicit product leaves the double range.
CauchyGreen cauchy_green_top(const TrajectoryBundle& bundle, int k, int first_step = 0);

struct ResponseHistory
{
  std::vector<Vec> zeta; ///< zeta_0 .. zeta_N
  Vec final;
};

/// zeta_{n+1} = dF_n zeta_n + dt drift_scale(n) chi(y_n), zeta_0 = 0, from
/// recorded states and Jacobians.
ResponseHistory inhomogeneous_response(const TrajectoryBundle& bundle, const DriftModel& model,
                                       const PerturbationField& chi);

} // namespace lyapflow
