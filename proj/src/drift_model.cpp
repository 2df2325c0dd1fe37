#include "lyapflow/drift_model.hpp"

#include <cmath>
#include <string>

#include "lyapflow/error.hpp"

namespace lyapflow {

std::string to_string(ModelKind kind)
{
  switch (kind) {
  case ModelKind::sgm_reverse:
    return "sgm";
  case ModelKind::prob_flow_reverse:
    return "prob_flow";
  case ModelKind::cfm:
    return "cfm";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name)
{
  if (name == "sgm" || name == "sgm_reverse")
    return ModelKind::sgm_reverse;
  if (name == "prob_flow" || name == "prob-flow" || name == "prob_flow_reverse")
    return ModelKind::prob_flow_reverse;
  if (name == "cfm")
    return ModelKind::cfm;
  throw ParameterError("unknown model kind '" + name + "'");
}

DriftModel DriftModel::score_based(ModelKind kind, std::shared_ptr<const VectorField> score,
                                   const NoiseSchedule& schedule)
{
  if (kind == ModelKind::cfm)
    throw ParameterError("score_based needs sgm_reverse or prob_flow_reverse");
  if (!score)
    throw ParameterError("score field is null");
  DriftModel m;
  m.kind_ = kind;
  m.field_ = std::move(score);
  m.schedule_ = schedule;
  m.n_steps_ = schedule.n_steps();
  m.dt_ = schedule.dt();
  return m;
}

DriftModel DriftModel::flow_matching(std::shared_ptr<const VectorField> field, double early_stop, int n_steps)
{
  if (!field)
    throw ParameterError("flow-matching field is null");
  if (!(early_stop >= 0.0 && early_stop < 1.0))
    throw ParameterError("flow-matching early stop must lie in [0, 1)");
  if (n_steps < 1)
    throw ParameterError("n_steps must be positive");
  DriftModel m;
  m.kind_ = ModelKind::cfm;
  m.field_ = std::move(field);
  m.early_stop_ = early_stop;
  m.n_steps_ = n_steps;
  m.dt_ = (1.0 - early_stop) / n_steps;
  return m;
}

DriftModel DriftModel::with_perturbation(std::shared_ptr<const PerturbationField> chi, double epsilon) const
{
  if (chi && chi->dim() != dim())
    throw DimensionError("perturbation dimension does not match the model");
  if (!std::isfinite(epsilon))
    throw ParameterError("epsilon must be finite");
  DriftModel m = *this;
  m.chi_ = std::move(chi);
  m.epsilon_ = epsilon;
  return m;
}

DriftModel DriftModel::with_steps(int n_steps) const
{
  if (n_steps < 1)
    throw ParameterError("n_steps must be positive");
  DriftModel m = *this;
  m.n_steps_ = n_steps;
  if (kind_ == ModelKind::cfm) {
    m.dt_ = (1.0 - early_stop_) / n_steps;
  } else {
    ScheduleParams p = schedule_.params();
    p.n_steps = n_steps;
    m.schedule_ = NoiseSchedule(p);
    m.dt_ = m.schedule_.dt();
  }
  return m;
}

void DriftModel::check_step(int n) const
{
  if (n < 0 || n >= n_steps_)
    throw ParameterError("step index " + std::to_string(n) + " outside [0, " + std::to_string(n_steps_) + ")");
}

double DriftModel::field_time(int n) const
{
  if (kind_ == ModelKind::cfm)
    return n * dt_;
  return schedule_.reverse_time(n);
}

double DriftModel::drift_scale(int n) const
{
  if (kind_ == ModelKind::cfm)
    return 1.0;
  return schedule_.beta(field_time(n));
}

double DriftModel::score_coefficient() const
{
  switch (kind_) {
  case ModelKind::sgm_reverse:
    return 2.0;
  case ModelKind::prob_flow_reverse:
    return 1.0;
  case ModelKind::cfm:
    return 0.0;
  }
  return 0.0;
}

double DriftModel::diffusion(int n) const
{
  if (kind_ != ModelKind::sgm_reverse)
    return 0.0;
  return std::sqrt(2.0 * drift_scale(n) * dt_);
}

double DriftModel::final_field_time() const
{
  if (kind_ == ModelKind::cfm)
    return 1.0 - early_stop_;
  return schedule_.early_stop();
}

FieldEval DriftModel::drift(const Vec& y, int n, int order) const
{
  check_step(n);
  if (y.size() != dim())
    throw DimensionError("state has " + std::to_string(y.size()) + " entries, model expects " +
                         std::to_string(dim()));
  const double t = field_time(n);
  FieldEval f = field_->evaluate(y, t, order);
  const bool perturbed = chi_ && epsilon_ != 0.0;

  if (kind_ == ModelKind::cfm) {
    if (perturbed) {
      f.value += epsilon_ * chi_->value(y, t);
      if (order >= 1)
        f.jacobian += epsilon_ * chi_->jacobian(y, t);
      if (order >= 2) {
        Tensor3 h = chi_->hessian(y, t);
        h *= epsilon_;
        f.hessian += h;
      }
    }
    return f;
  }

  const double beta = drift_scale(n);
  const double c = score_coefficient();
  const int D = dim();
  FieldEval out;
  Vec bracket = y + c * f.value;
  if (perturbed)
    bracket += epsilon_ * chi_->value(y, t);
  out.value = beta * bracket;
  if (order >= 1) {
    Mat j = Mat::Identity(D, D) + c * f.jacobian;
    if (perturbed)
      j += epsilon_ * chi_->jacobian(y, t);
    out.jacobian = beta * j;
  }
  if (order >= 2) {
    out.hessian = std::move(f.hessian);
    out.hessian *= c;
    if (perturbed) {
      Tensor3 h = chi_->hessian(y, t);
      h *= epsilon_;
      out.hessian += h;
    }
    out.hessian *= beta;
  }
  return out;
}

Vec DriftModel::forcing(const PerturbationField& chi, const Vec& y, int n) const
{
  check_step(n);
  return drift_scale(n) * chi.value(y, field_time(n));
}

Vec reverse_drift(const Vec& y, int n, const DriftModel& model)
{
  if (model.kind() == ModelKind::cfm)
    throw ParameterError("reverse_drift needs a score-based model");
  return model.drift(y, n, 0).value;
}

} // namespace lyapflow
