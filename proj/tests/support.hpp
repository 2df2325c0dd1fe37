#pragma once

#include <memory>

#include "lyapflow/drift_model.hpp"
#include "lyapflow/dynamics.hpp"
#include "lyapflow/manifold.hpp"

namespace testing_support {

using namespace lyapflow;

inline std::shared_ptr<const CurveManifold> make_manifold(CurveKind kind, int D = 2,
                                                          const ShapeParams& params = {})
{
  return std::make_shared<const CurveManifold>(CurveManifold::build(kind, params, D));
}

inline ScheduleParams schedule_params(int n_steps)
{
  ScheduleParams p;
  p.n_steps = n_steps;
  return p;
}

inline DriftModel score_model(std::shared_ptr<const CurveManifold> m, ModelKind kind, int n_steps,
                              HessianMethod hessian = HessianMethod::finite_difference)
{
  NoiseSchedule schedule(schedule_params(n_steps));
  auto field = std::make_shared<const ScoreField>(std::move(m), schedule, QuadratureOptions{}, hessian);
  return DriftModel::score_based(kind, field, schedule);
}

/// Score of a point mass at the origin, written out by hand.
class ZeroScore : public VectorField
{
public:
  explicit ZeroScore(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  FieldEval evaluate(const Vec& x, double, int order) const override
  {
    FieldEval f;
    f.value = Vec::Zero(x.size());
    if (order >= 1)
      f.jacobian = Mat::Zero(dim_, dim_);
    if (order >= 2)
      f.hessian = Tensor3(dim_);
    return f;
  }

private:
  int dim_;
};

/// Scalar recursion coefficients of the point-mass target at the origin:
/// y_{n+1} = a_n y_n + b_n xi_n, with c = 2 (reverse SDE) or 1 (probability flow).
struct LinearOracle
{
  std::vector<double> a, b, beta;
  double dt;
};

inline LinearOracle linear_oracle(const NoiseSchedule& s, double c)
{
  LinearOracle o;
  o.dt = s.dt();
  for (int n = 0; n < s.n_steps(); ++n) {
    const double t = s.reverse_time(n);
    const double beta = s.beta(t);
    o.beta.push_back(beta);
    o.a.push_back(1.0 + beta * o.dt * (1.0 - c / s.variance(t)));
    o.b.push_back(c == 2.0 ? std::sqrt(2.0 * beta * o.dt) : 0.0);
  }
  return o;
}

inline double relative(double a, double b)
{
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace testing_support
