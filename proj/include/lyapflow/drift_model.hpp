#pragma once

#include <memory>
#include <string>

#include "lyapflow/fields.hpp"
#include "lyapflow/perturbation.hpp"

namespace lyapflow {

enum class ModelKind
{
  sgm_reverse,       ///< reverse SDE drift beta (y + 2 s)
  prob_flow_reverse, ///< probability-flow drift beta (y + s)
  cfm                ///< flow-matching marginal field u_t
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Step-indexed drift v_n(y) on a fixed time grid, optionally perturbed by
/// eps * chi. Score-based models step in reverse time with the field
/// evaluated at T - t_n; flow matching steps forward from t = 0.
class DriftModel
{
public:
  static DriftModel score_based(ModelKind kind, std::shared_ptr<const VectorField> score,
                                const NoiseSchedule& schedule);
  static DriftModel flow_matching(std::shared_ptr<const VectorField> field, double early_stop, int n_steps);

  DriftModel with_perturbation(std::shared_ptr<const PerturbationField> chi, double epsilon) const;
  DriftModel with_steps(int n_steps) const;

  ModelKind kind() const { return kind_; }
  int dim() const { return field_->dim(); }
  int n_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  /// Integrated time n_steps * dt.
  double horizon_length() const { return n_steps_ * dt_; }

  /// Integration clock t_n = n dt.
  double step_time(int n) const { return n * dt_; }
  /// Time argument of the underlying field at step n.
  double field_time(int n) const;
  /// beta(T - t_n) for score-based models, 1 for flow matching.
  double drift_scale(int n) const;
  /// 2 for the reverse SDE, 1 for the probability flow, 0 for flow matching.
  double score_coefficient() const;
  /// Noise amplitude sqrt(2 beta dt); zero for deterministic models.
  double diffusion(int n) const;
  /// Field time at which the final state is observed (Delta or 1 - Delta).
  double final_field_time() const;

  /// v, and on request dv and d2v, at step n.
  FieldEval drift(const Vec& y, int n, int order) const;
  /// d v / d eps = drift_scale(n) * chi(y).
  Vec forcing(const PerturbationField& chi, const Vec& y, int n) const;

  const VectorField& field() const { return *field_; }
  std::shared_ptr<const VectorField> field_ptr() const { return field_; }
  const NoiseSchedule* schedule() const { return kind_ == ModelKind::cfm ? nullptr : &schedule_; }
  const PerturbationField* perturbation() const { return chi_.get(); }
  std::shared_ptr<const PerturbationField> perturbation_ptr() const { return chi_; }
  double epsilon() const { return epsilon_; }

private:
  DriftModel() = default;
  void check_step(int n) const;

  ModelKind kind_ = ModelKind::sgm_reverse;
  std::shared_ptr<const VectorField> field_;
  NoiseSchedule schedule_;
  double early_stop_ = 0.0; // flow matching only
  int n_steps_ = 0;
  double dt_ = 0.0;
  std::shared_ptr<const PerturbationField> chi_;
  double epsilon_ = 0.0;
};

/// Score-based drift value at step n (the bracket beta (y + c s + eps chi)).
Vec reverse_drift(const Vec& y, int n, const DriftModel& model);

} // namespace lyapflow
