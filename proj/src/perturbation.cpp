#include "lyapflow/perturbation.hpp"

#include <cmath>
#include <numbers>

#include "lyapflow/error.hpp"
#include "lyapflow/rng.hpp"

namespace lyapflow {

std::string to_string(PerturbationKind kind)
{
  switch (kind) {
  case PerturbationKind::constant_vector:
    return "constant_vector";
  case PerturbationKind::random_fourier:
    return "random_fourier";
  }
  return "unknown";
}

PerturbationKind perturbation_kind_from_string(const std::string& name)
{
  if (name == "constant_vector" || name == "constant")
    return PerturbationKind::constant_vector;
  if (name == "random_fourier" || name == "random_fourier_field")
    return PerturbationKind::random_fourier;
  throw ParameterError("unknown perturbation kind '" + name + "'");
}

PerturbationField PerturbationField::zero(int dim)
{
  if (dim < 1)
    throw DimensionError("perturbation dimension must be positive");
  PerturbationField f;
  f.params_.kind = PerturbationKind::constant_vector;
  f.params_.sup_norm = 0.0;
  f.dim_ = dim;
  f.zero_ = true;
  f.constant_ = Vec::Zero(dim);
  return f;
}

PerturbationField::PerturbationField(const PerturbationParams& params, const CurveManifold& reference)
  : params_(params), dim_(reference.ambient_dim())
{
  if (!(params.sup_norm >= 0.0) || !std::isfinite(params.sup_norm))
    throw ParameterError("perturbation sup_norm must be finite and non-negative");
  if (params.windowed && !(params.window_end > params.window_start))
    throw ParameterError("perturbation window must have window_end > window_start");

  if (params.kind == PerturbationKind::constant_vector) {
    Vec d = params.direction.size() == 0 ? Vec(Vec::Unit(dim_, 0)) : params.direction;
    if (d.size() != dim_)
      throw DimensionError("perturbation direction has " + std::to_string(d.size()) + " entries, expected " +
                           std::to_string(dim_));
    const double n = d.norm();
    if (!(n > 0.0))
      throw ParameterError("perturbation direction must be nonzero");
    constant_ = d * (params.sup_norm / n);
    measured_sup_ = constant_.norm();
    zero_ = params.sup_norm == 0.0;
    return;
  }

  if (params.features < 1)
    throw ParameterError("random_fourier needs at least one feature");
  if (!(params.length_scale > 0.0))
    throw ParameterError("random_fourier length_scale must be positive");

  const int F = params.features;
  const int total = dim_ * F;
  frequencies_.resize(dim_, total);
  phases_.resize(total);
  amplitudes_.resize(total);
  CounterRng rng(params.seed, 0, Stream::field);
  for (int c = 0; c < total; ++c) {
    for (int d = 0; d < dim_; ++d)
      frequencies_(d, c) = rng.normal() / params.length_scale;
    phases_(c) = 2.0 * std::numbers::pi * rng.uniform();
    amplitudes_(c) = rng.normal() / std::sqrt(static_cast<double>(F));
  }

  auto grid_max = [&] {
    double mx = 0.0;
    const int n = kReferenceGrid;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double px = -kReferenceHalfWidth + 2.0 * kReferenceHalfWidth * a / (n - 1);
        const double py = -kReferenceHalfWidth + 2.0 * kReferenceHalfWidth * b / (n - 1);
        mx = std::max(mx, raw_value(reference.embed(Eigen::Vector2d(px, py))).norm());
      }
    return mx;
  };

  const double raw = grid_max();
  if (!(raw > 0.0))
    throw ParameterError("random_fourier field vanishes on the reference grid");
  amplitudes_ *= params.sup_norm / raw;
  measured_sup_ = grid_max();
  zero_ = params.sup_norm == 0.0;
}

double PerturbationField::time_factor(double t) const
{
  if (!params_.windowed)
    return 1.0;
  const double mid = 0.5 * (params_.window_start + params_.window_end);
  const double half = 0.5 * (params_.window_end - params_.window_start);
  const double u = (t - mid) / half;
  if (std::abs(u) >= 1.0)
    return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

Vec PerturbationField::raw_value(const Vec& x) const
{
  if (params_.kind == PerturbationKind::constant_vector || zero_)
    return constant_.size() ? constant_ : Vec(Vec::Zero(dim_));
  const int F = params_.features;
  Vec out = Vec::Zero(dim_);
  const Vec theta = frequencies_.transpose() * x + phases_;
  for (int i = 0; i < dim_; ++i)
    for (int f = 0; f < F; ++f)
      out(i) += amplitudes_(i * F + f) * std::cos(theta(i * F + f));
  return out;
}

Vec PerturbationField::value(const Vec& x, double t) const
{
  if (x.size() != dim_)
    throw DimensionError("perturbation evaluated at a point of the wrong dimension");
  if (zero_)
    return Vec::Zero(dim_);
  return time_factor(t) * raw_value(x);
}

Mat PerturbationField::jacobian(const Vec& x, double t) const
{
  if (x.size() != dim_)
    throw DimensionError("perturbation evaluated at a point of the wrong dimension");
  Mat out = Mat::Zero(dim_, dim_);
  if (zero_ || params_.kind == PerturbationKind::constant_vector)
    return out;
  const double tf = time_factor(t);
  if (tf == 0.0)
    return out;
  const int F = params_.features;
  const Vec theta = frequencies_.transpose() * x + phases_;
  for (int i = 0; i < dim_; ++i)
    for (int f = 0; f < F; ++f) {
      const int c = i * F + f;
      out.row(i) -= (amplitudes_(c) * std::sin(theta(c))) * frequencies_.col(c).transpose();
    }
  return tf * out;
}

Tensor3 PerturbationField::hessian(const Vec& x, double t) const
{
  if (x.size() != dim_)
    throw DimensionError("perturbation evaluated at a point of the wrong dimension");
  Tensor3 out(dim_);
  if (zero_ || params_.kind == PerturbationKind::constant_vector)
    return out;
  const double tf = time_factor(t);
  if (tf == 0.0)
    return out;
  const int F = params_.features;
  const Vec theta = frequencies_.transpose() * x + phases_;
  for (int i = 0; i < dim_; ++i)
    for (int f = 0; f < F; ++f) {
      const int c = i * F + f;
      const double w = -tf * amplitudes_(c) * std::cos(theta(c));
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          out(i, j, k) += w * frequencies_(j, c) * frequencies_(k, c);
    }
  return out;
}

} // namespace lyapflow
