#pragma once

namespace lyapflow {

struct ScheduleParams
{
  double offset = 0.008;      ///< cosine-schedule offset
  double horizon = 0.9;       ///< T
  double early_stop = 0.000225; ///< Delta = T / 4000
  int n_steps = 4000;
};

/// beta_t = pi/(1+offset) * tan(pi/2 * (t+offset)/(1+offset)).
/// Throws SingularTimeError once the angle reaches pi/2 (t >= 1).
double cosine_beta(double t, double offset);

/// Cosine noise schedule with forward kernel N(m(t) x0, (1 - m(t)^2) I),
/// m(t) = exp(-int_0^t beta) = f(t)/f(0), f(t) = cos^2(pi/2 (t+offset)/(1+offset)).
class NoiseSchedule
{
public:
  explicit NoiseSchedule(const ScheduleParams& params = {});

  const ScheduleParams& params() const { return params_; }
  double horizon() const { return params_.horizon; }
  double early_stop() const { return params_.early_stop; }
  int n_steps() const { return params_.n_steps; }
  /// Reverse-process step size (T - Delta) / n_steps.
  double dt() const { return dt_; }
  /// Forward time at which step n evaluates the score: T - n dt.
  double reverse_time(int n) const { return params_.horizon - n * dt_; }

  double beta(double t) const;
  double log_mean_scale(double t) const;
  double mean_scale(double t) const;
  /// 1 - m(t)^2, computed without cancellation at small t.
  double variance(double t) const;
  double sigma(double t) const;

private:
  ScheduleParams params_;
  double dt_;
  double u0_;
};

} // namespace lyapflow
