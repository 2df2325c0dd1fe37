#pragma once

#include <cstdint>
#include <vector>

#include "lyapflow/lyapunov.hpp"

namespace lyapflow {

struct DiagnosticsRow
{
  int n = 0;
  double t = 0.0;     ///< field time at step n
  double alpha = 0.0; ///< ||R_n||_inf
  double b = 0.0;     ///< ||dF_n E_perp||_inf
  double c = 0.0;     ///< |w_n E_n|
  double g = 0.0;     ///< |E^T dv E_perp|_F
  double h = 0.0;     ///< |E_perp^T dv E|_F
  double diag_tangent = 0.0; ///< |E^T dv E|_F
  double diag_normal = 0.0;  ///< |E_perp^T dv E_perp|_F
  double log_alpha_product = 0.0; ///< sum_{m <= n} log alpha_m
};

struct DiagnosticsOptions
{
  std::size_t n_paths = 64;
  std::uint64_t seed = 0;
  int d = 1;
  double final_fraction = 0.1; ///< trailing share of steps checked by the flags
  double c_ratio_bound = 100.0; ///< c_n / dt allowed in the final phase
  double cross_ratio = 0.1;     ///< g, h against the larger diagonal block
};

/// Per-step maxima over a batch of paths. Every norm is a batch maximum
/// standing in for a supremum over the support.
struct TheoremDiagnostics
{
  std::vector<DiagnosticsRow> rows;
  std::size_t batch = 0;
  std::size_t n_diverged = 0;
  int d = 1;
  bool c_small = false;       ///< c_n <= c_ratio_bound * dt over the final phase
  bool cross_small = false;   ///< g_n, h_n <= cross_ratio * max diagonal block over the final phase
  double max_c_ratio = 0.0;
  double max_cross_ratio = 0.0;
};

/// w_k = sum_ij (dF^-1)_ij d_k (dF)_ji, the gradient of log|det dF|.
Vec log_det_gradient(const Mat& jacobian, const Tensor3& hessian);

TheoremDiagnostics theorem_diagnostics(const DriftModel& model, const DiagnosticsOptions& options,
                                       const Executor& executor = Executor(1));

} // namespace lyapflow
