#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lyapflow/dynamics.hpp"

namespace lyapflow {

/// Observables with analytic gradients: a coordinate, or the mass of a disk
/// smoothed across its rim,
///   f(x) = erfc((|x - c| - r) / (sqrt(2) w)) / 2.
class Observable
{
public:
  enum class Kind
  {
    coordinate,
    disk
  };

  static Observable coordinate(int index);
  static Observable disk(const Vec& center, double radius, double width);

  Kind kind() const { return kind_; }
  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  std::string describe() const;

private:
  Kind kind_ = Kind::coordinate;
  int index_ = 0;
  Vec center_;
  double radius_ = 0.0;
  double width_ = 1.0;
};

struct ResponseRow
{
  double epsilon = 0.0;
  double fd_estimate = 0.0;  ///< (E_eps f - E_0 f) / eps over paired paths
  double lin_estimate = 0.0; ///< mean grad f(y_N) . zeta_N
  double std_err = 0.0;      ///< standard error of lin_estimate
  double fd_std_err = 0.0;   ///< standard error of the paired difference quotient
};

struct ResponseResult
{
  std::vector<ResponseRow> rows;
  double lin_estimate = 0.0;
  double lin_std_err = 0.0;
  /// |lin_estimate| below three standard errors.
  bool inconclusive = false;
  /// log2 of consecutive |fd - lin| ratios; entry i compares rows i and i+1.
  std::vector<double> observed_order;
  std::size_t n_used = 0;
  std::size_t n_diverged = 0;
};

ResponseResult response_consistency(const DriftModel& model, const Observable& f,
                                    std::shared_ptr<const PerturbationField> chi,
                                    const std::vector<double>& epsilons, std::size_t n_paths, std::uint64_t seed,
                                    const Executor& executor = Executor(1));

} // namespace lyapflow
