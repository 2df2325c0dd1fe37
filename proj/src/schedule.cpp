#include "lyapflow/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lyapflow/error.hpp"

namespace lyapflow {

namespace {

double schedule_angle(double t, double offset)
{
  return 0.5 * std::numbers::pi * (t + offset) / (1.0 + offset);
}

} // namespace

double cosine_beta(double t, double offset)
{
  if (t >= 1.0)
    throw SingularTimeError("cosine schedule is singular at t = " + std::to_string(t));
  const double u = schedule_angle(t, offset);
  return std::numbers::pi / (1.0 + offset) * std::sin(u) / std::cos(u);
}

NoiseSchedule::NoiseSchedule(const ScheduleParams& params) : params_(params)
{
  if (!(params.offset > 0.0))
    throw ParameterError("schedule offset must be positive");
  if (!(params.horizon > 0.0 && params.horizon < 1.0))
    throw ParameterError("schedule horizon must lie in (0, 1)");
  if (!(params.early_stop > 0.0 && params.early_stop < params.horizon))
    throw ParameterError("early stop must lie in (0, horizon)");
  if (params.n_steps < 1)
    throw ParameterError("n_steps must be positive");
  dt_ = (params.horizon - params.early_stop) / params.n_steps;
  u0_ = schedule_angle(0.0, params.offset);
}

double NoiseSchedule::beta(double t) const
{
  return cosine_beta(t, params_.offset);
}

double NoiseSchedule::log_mean_scale(double t) const
{
  if (t >= 1.0)
    throw SingularTimeError("mean scale vanishes at t = " + std::to_string(t));
  // log(cos(u0 + h) / cos(u0)) = log1p(cos h - 1 - tan(u0) sin h)
  const double h = 0.5 * std::numbers::pi * t / (1.0 + params_.offset);
  const double sh = std::sin(0.5 * h);
  const double ratio_m1 = -2.0 * sh * sh - std::tan(u0_) * std::sin(h);
  return 2.0 * std::log1p(ratio_m1);
}

double NoiseSchedule::mean_scale(double t) const
{
  return std::exp(log_mean_scale(t));
}

double NoiseSchedule::variance(double t) const
{
  return -std::expm1(2.0 * log_mean_scale(t));
}

double NoiseSchedule::sigma(double t) const
{
  return std::sqrt(variance(t));
}

} // namespace lyapflow
