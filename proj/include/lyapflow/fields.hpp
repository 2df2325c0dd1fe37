#pragma once

#include <memory>

#include "lyapflow/posterior.hpp"

namespace lyapflow {

struct FieldEval
{
  Vec value;
  Mat jacobian;    ///< filled for order >= 1
  Tensor3 hessian; ///< filled for order >= 2
};

enum class HessianMethod
{
  finite_difference,
  analytic
};

/// Time-dependent vector field with derivative access.
class VectorField
{
public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  /// order 0: value; 1: + Jacobian; 2: + second derivatives.
  virtual FieldEval evaluate(const Vec& x, double t, int order) const = 0;
};

/// Central differences of the analytic Jacobian, step 1e-4 * (1 + |x|).
Tensor3 finite_difference_hessian(const VectorField& f, const Vec& x, double t);

/// Exact marginal score of the forward process applied to q dgamma,
/// s_t(x) = (m(t) mu(x,t) - x) / sigma(t)^2.
class ScoreField : public VectorField
{
public:
  ScoreField(std::shared_ptr<const CurveManifold> manifold, const NoiseSchedule& schedule,
             const QuadratureOptions& quad = {}, HessianMethod hessian = HessianMethod::finite_difference);

  int dim() const override { return manifold_->ambient_dim(); }
  FieldEval evaluate(const Vec& x, double t, int order) const override;

  PosteriorMoments moments(const Vec& x, double t, bool third = false) const;
  Vec score(const Vec& x, double t) const { return evaluate(x, t, 0).value; }
  Mat score_jacobian(const Vec& x, double t) const { return evaluate(x, t, 1).jacobian; }
  Tensor3 score_hessian(const Vec& x, double t) const;
  double log_density(const Vec& x, double t) const { return moments(x, t).log_Z; }

  const CurveManifold& manifold() const { return *manifold_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const QuadratureLadder& ladder() const { return ladder_; }
  HessianMethod hessian_method() const { return hessian_; }

private:
  std::shared_ptr<const CurveManifold> manifold_;
  NoiseSchedule schedule_;
  QuadratureLadder ladder_;
  HessianMethod hessian_;
};

/// Independent-coupling flow-matching marginal field for the Gaussian path
/// x_t | x1 ~ N(t x1, sigma_c(t)^2 I), sigma_c(t) = (1 - t) + t sigma_min,
/// with a standard normal source:
///   u_t(x) = mu1 + sigma_c'/sigma_c (x - t mu1).
class CfmField : public VectorField
{
public:
  CfmField(std::shared_ptr<const CurveManifold> manifold, double sigma_min, const QuadratureOptions& quad = {},
           HessianMethod hessian = HessianMethod::finite_difference);

  int dim() const override { return manifold_->ambient_dim(); }
  FieldEval evaluate(const Vec& x, double t, int order) const override;

  double sigma_min() const { return sigma_min_; }
  double path_sigma(double t) const { return (1.0 - t) + t * sigma_min_; }
  PosteriorMoments moments(const Vec& x, double t, bool third = false) const;
  /// Same field through the conditional-velocity form E[x1 - (1-sigma_min) z | x_t = x]
  /// with z = (x - t x1)/sigma_c; used to cross-check the closed form.
  Vec field_conditional_form(const Vec& x, double t) const;

  const CurveManifold& manifold() const { return *manifold_; }

private:
  void check_time(double t) const;

  std::shared_ptr<const CurveManifold> manifold_;
  double sigma_min_;
  QuadratureLadder ladder_;
  HessianMethod hessian_;
};

} // namespace lyapflow
