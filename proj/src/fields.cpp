#include "lyapflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyapflow/error.hpp"

namespace lyapflow {

Tensor3 finite_difference_hessian(const VectorField& f, const Vec& x, double t)
{
  const int D = f.dim();
  const double h = 1e-4 * (1.0 + x.norm());
  Tensor3 out(D);
  Vec xp = x, xm = x;
  for (int k = 0; k < D; ++k) {
    xp(k) = x(k) + h;
    xm(k) = x(k) - h;
    const Mat jp = f.evaluate(xp, t, 1).jacobian;
    const Mat jm = f.evaluate(xm, t, 1).jacobian;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        out(i, j, k) = (jp(i, j) - jm(i, j)) / (2.0 * h);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return out;
}

ScoreField::ScoreField(std::shared_ptr<const CurveManifold> manifold, const NoiseSchedule& schedule,
                       const QuadratureOptions& quad, HessianMethod hessian)
  : manifold_(std::move(manifold)), schedule_(schedule), ladder_(*manifold_, quad), hessian_(hessian)
{
}

PosteriorMoments ScoreField::moments(const Vec& x, double t, bool third) const
{
  if (!(t > 0.0))
    throw SingularTimeError("score is singular at t = " + std::to_string(t));
  const double m = schedule_.mean_scale(t);
  const double sigma = schedule_.sigma(t);
  return posterior_moments(x, m, sigma, ladder_.select(m, sigma), third);
}

FieldEval ScoreField::evaluate(const Vec& x, double t, int order) const
{
  const bool analytic_third = order >= 2 && hessian_ == HessianMethod::analytic;
  const PosteriorMoments pm = moments(x, t, analytic_third);
  const double m = schedule_.mean_scale(t);
  const double var = schedule_.variance(t);

  FieldEval out;
  out.value = (m * pm.mean - x) / var;
  if (order >= 1) {
    const int D = dim();
    out.jacobian = -Mat::Identity(D, D) / var + (m * m / (var * var)) * pm.cov;
  }
  if (order >= 2) {
    if (analytic_third) {
      out.hessian = pm.third;
      out.hessian *= m * m * m / (var * var * var);
    } else {
      out.hessian = finite_difference_hessian(*this, x, t);
    }
  }
  return out;
}

Tensor3 ScoreField::score_hessian(const Vec& x, double t) const
{
  return evaluate(x, t, 2).hessian;
}

CfmField::CfmField(std::shared_ptr<const CurveManifold> manifold, double sigma_min, const QuadratureOptions& quad,
                   HessianMethod hessian)
  : manifold_(std::move(manifold)), sigma_min_(sigma_min), ladder_(*manifold_, quad), hessian_(hessian)
{
  if (!(sigma_min >= 0.0 && sigma_min < 1.0))
    throw ParameterError("sigma_min must lie in [0, 1)");
}

void CfmField::check_time(double t) const
{
  if (t < 0.0 || t > 1.0 || !(path_sigma(t) > 0.0))
    throw SingularTimeError("flow-matching field is singular at t = " + std::to_string(t));
}

PosteriorMoments CfmField::moments(const Vec& x, double t, bool third) const
{
  check_time(t);
  const double sc = path_sigma(t);
  return posterior_moments(x, t, sc, ladder_.select(t, sc), third);
}

FieldEval CfmField::evaluate(const Vec& x, double t, int order) const
{
  const bool analytic_third = order >= 2 && hessian_ == HessianMethod::analytic;
  const PosteriorMoments pm = moments(x, t, analytic_third);
  const double sc = path_sigma(t);
  const double c = (sigma_min_ - 1.0) / sc; // sigma_c' / sigma_c
  const double lin = 1.0 - c * t;

  FieldEval out;
  out.value = lin * pm.mean + c * x;
  if (order >= 1) {
    const int D = dim();
    out.jacobian = c * Mat::Identity(D, D) + (lin * t / (sc * sc)) * pm.cov;
  }
  if (order >= 2) {
    if (analytic_third) {
      const double k = t / (sc * sc);
      out.hessian = pm.third;
      out.hessian *= lin * k * k;
    } else {
      out.hessian = finite_difference_hessian(*this, x, t);
    }
  }
  return out;
}

Vec CfmField::field_conditional_form(const Vec& x, double t) const
{
  check_time(t);
  const double sc = path_sigma(t);
  const QuadratureRule& rule = ladder_.select(t, sc);
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    terms[i] = rule.log_weights[i] -
               (x - t * rule.points.col(static_cast<Eigen::Index>(i))).squaredNorm() / (2.0 * sc * sc);
  double mx = terms[0];
  for (double v : terms)
    mx = std::max(mx, v);
  Vec acc = Vec::Zero(dim());
  double sumw = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double w = std::exp(terms[i] - mx);
    const Vec x1 = rule.points.col(static_cast<Eigen::Index>(i));
    const Vec z = (x - t * x1) / sc;
    acc += w * (x1 - (1.0 - sigma_min_) * z);
    sumw += w;
  }
  return acc / sumw;
}

} // namespace lyapflow
