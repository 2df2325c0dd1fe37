#include "lyapflow/response.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "lyapflow/error.hpp"

namespace lyapflow {

Observable Observable::coordinate(int index)
{
  if (index < 0)
    throw ParameterError("coordinate index must be non-negative");
  Observable o;
  o.kind_ = Kind::coordinate;
  o.index_ = index;
  return o;
}

Observable Observable::disk(const Vec& center, double radius, double width)
{
  if (!(radius > 0.0) || !(width > 0.0))
    throw ParameterError("disk radius and width must be positive");
  Observable o;
  o.kind_ = Kind::disk;
  o.center_ = center;
  o.radius_ = radius;
  o.width_ = width;
  return o;
}

double Observable::value(const Vec& x) const
{
  if (kind_ == Kind::coordinate) {
    if (index_ >= x.size())
      throw DimensionError("coordinate observable index exceeds the state dimension");
    return x(index_);
  }
  if (x.size() != center_.size())
    throw DimensionError("disk observable center has the wrong dimension");
  const double rho = (x - center_).norm();
  return 0.5 * std::erfc((rho - radius_) / (std::numbers::sqrt2 * width_));
}

Vec Observable::gradient(const Vec& x) const
{
  Vec g = Vec::Zero(x.size());
  if (kind_ == Kind::coordinate) {
    if (index_ >= x.size())
      throw DimensionError("coordinate observable index exceeds the state dimension");
    g(index_) = 1.0;
    return g;
  }
  const Vec u = x - center_;
  const double rho = u.norm();
  if (rho == 0.0)
    return g;
  const double z = (rho - radius_) / width_;
  const double dfdrho = -std::exp(-0.5 * z * z) / (width_ * std::sqrt(2.0 * std::numbers::pi));
  return dfdrho * u / rho;
}

std::string Observable::describe() const
{
  std::ostringstream s;
  if (kind_ == Kind::coordinate) {
    s << "coordinate " << index_;
  } else {
    s << "disk center=(";
    for (Eigen::Index i = 0; i < center_.size(); ++i)
      s << (i ? "," : "") << center_(i);
    s << ") radius=" << radius_ << " width=" << width_;
  }
  return s.str();
}

ResponseResult response_consistency(const DriftModel& model, const Observable& f,
                                    std::shared_ptr<const PerturbationField> chi,
                                    const std::vector<double>& epsilons, std::size_t n_paths, std::uint64_t seed,
                                    const Executor& executor)
{
  if (n_paths < 2)
    throw ParameterError("response estimates need at least 2 paths");
  if (!chi)
    throw ParameterError("response needs a perturbation field");
  for (double e : epsilons)
    if (!(e > 0.0) || !std::isfinite(e))
      throw ParameterError("response epsilons must be positive");

  const std::size_t E = epsilons.size();
  std::vector<DriftModel> perturbed;
  for (double e : epsilons)
    perturbed.push_back(model.with_perturbation(chi, e));

  SimulateOptions base_opt;
  base_opt.integrator = integrator_for(model.kind());
  base_opt.seed = seed;
  base_opt.response_field = chi;
  SimulateOptions pert_opt = base_opt;
  pert_opt.response_field = nullptr;

  struct PathResult
  {
    bool ok = false;
    double lin = 0.0;
    std::vector<double> quotient;
  };
  std::vector<PathResult> results(n_paths);

  executor.for_each(n_paths, [&](std::size_t i, unsigned) {
    PathResult& r = results[i];
    const TrajectoryBundle base = simulate_path(model, base_opt, i);
    if (base.diverged)
      return;
    const double f0 = f.value(base.final_state);
    r.lin = f.gradient(base.final_state).dot(*base.response);
    r.quotient.resize(E);
    for (std::size_t e = 0; e < E; ++e) {
      const TrajectoryBundle b = simulate_path(perturbed[e], pert_opt, i);
      if (b.diverged)
        return;
      r.quotient[e] = (f.value(b.final_state) - f0) / epsilons[e];
    }
    r.ok = true;
  });

  // reductions in path order
  auto mean_se = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v)
      m += x;
    m /= n;
    double ss = 0.0;
    for (double x : v)
      ss += (x - m) * (x - m);
    return std::pair<double, double>{m, n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
  };

  ResponseResult out;
  std::vector<double> lin;
  std::vector<std::vector<double>> q(E);
  for (const PathResult& r : results) {
    if (!r.ok) {
      ++out.n_diverged;
      continue;
    }
    lin.push_back(r.lin);
    for (std::size_t e = 0; e < E; ++e)
      q[e].push_back(r.quotient[e]);
  }
  out.n_used = lin.size();
  if (out.n_used < 2)
    throw DivergenceError(0, "fewer than two response paths survived");
  std::tie(out.lin_estimate, out.lin_std_err) = mean_se(lin);
  out.inconclusive = std::abs(out.lin_estimate) < 3.0 * out.lin_std_err;
  for (std::size_t e = 0; e < E; ++e) {
    ResponseRow row;
    row.epsilon = epsilons[e];
    std::tie(row.fd_estimate, row.fd_std_err) = mean_se(q[e]);
    row.lin_estimate = out.lin_estimate;
    row.std_err = out.lin_std_err;
    out.rows.push_back(row);
  }
  for (std::size_t e = 0; e + 1 < E; ++e) {
    const double a = std::abs(out.rows[e].fd_estimate - out.lin_estimate);
    const double b = std::abs(out.rows[e + 1].fd_estimate - out.lin_estimate);
    out.observed_order.push_back(std::log2(a / b));
  }
  return out;
}

} // namespace lyapflow
