#pragma once

#include <cstdint>
#include <string>

#include "lyapflow/manifold.hpp"

namespace lyapflow {

enum class PerturbationKind
{
  constant_vector,
  random_fourier
};

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& name);

struct PerturbationParams
{
  PerturbationKind kind = PerturbationKind::random_fourier;
  Vec direction;            ///< constant_vector; defaults to e_1 when empty
  int features = 32;        ///< random_fourier
  double length_scale = 1.0;
  std::uint64_t seed = 7;
  double sup_norm = 1.0;    ///< target max |chi| on the reference grid
  bool windowed = false;    ///< multiply by a smooth bump supported on [window_start, window_end]
  double window_start = 0.0;
  double window_end = 0.0;
};

/// Deterministic error field chi_t(x). Random-Fourier fields are
///   chi_i(x) = sum_f a_if cos(w_if . x + phi_if),  w ~ N(0, l^-2 I),
/// frozen at construction and rescaled so that the max of |chi| over a
/// 64 x 64 grid on [-3, 3]^2 (embedded through the manifold's lift) equals
/// sup_norm.
class PerturbationField
{
public:
  PerturbationField(const PerturbationParams& params, const CurveManifold& reference);
  static PerturbationField zero(int dim);

  int dim() const { return dim_; }
  const PerturbationParams& params() const { return params_; }
  bool is_zero() const { return zero_; }

  Vec value(const Vec& x, double t) const;
  Mat jacobian(const Vec& x, double t) const;
  Tensor3 hessian(const Vec& x, double t) const;
  double time_factor(double t) const;

  /// max |chi| over the reference grid (time factor excluded).
  double reference_sup_norm() const { return measured_sup_; }

  static constexpr int kReferenceGrid = 64;
  static constexpr double kReferenceHalfWidth = 3.0;

private:
  PerturbationField() = default;
  Vec raw_value(const Vec& x) const;

  PerturbationParams params_;
  int dim_ = 0;
  bool zero_ = false;
  Vec constant_;
  // random Fourier features, one block of `features` per output component
  Mat frequencies_; ///< D x (D * F)
  Vec phases_;      ///< D * F
  Vec amplitudes_;  ///< D * F
  double measured_sup_ = 0.0;
};

} // namespace lyapflow
