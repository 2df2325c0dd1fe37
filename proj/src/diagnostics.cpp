#include "lyapflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "lyapflow/error.hpp"

namespace lyapflow {

namespace {

double inf_norm(const Mat& m)
{
  if (m.size() == 0)
    return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

Mat complement(const Mat& E)
{
  const int D = static_cast<int>(E.rows());
  const int d = static_cast<int>(E.cols());
  Eigen::HouseholderQR<Mat> qr(E);
  const Mat Q = qr.householderQ() * Mat::Identity(D, D);
  return Q.rightCols(D - d);
}

struct StepMax
{
  double alpha = 0, b = 0, c = 0, g = 0, h = 0, dt = 0, dn = 0;

  void merge(const StepMax& o)
  {
    alpha = std::max(alpha, o.alpha);
    b = std::max(b, o.b);
    c = std::max(c, o.c);
    g = std::max(g, o.g);
    h = std::max(h, o.h);
    dt = std::max(dt, o.dt);
    dn = std::max(dn, o.dn);
  }
};

} // namespace

Vec log_det_gradient(const Mat& jacobian, const Tensor3& hessian)
{
  const int D = static_cast<int>(jacobian.rows());
  const Mat inv = jacobian.partialPivLu().inverse();
  Vec w = Vec::Zero(D);
  for (int k = 0; k < D; ++k)
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        w(k) += inv(i, j) * hessian(j, i, k);
  return w;
}

TheoremDiagnostics theorem_diagnostics(const DriftModel& model, const DiagnosticsOptions& options,
                                       const Executor& executor)
{
  const int D = model.dim();
  const int d = options.d;
  const int N = model.n_steps();
  if (d < 1 || d > D)
    throw DimensionError("diagnostics need 1 <= d <= D");
  if (options.n_paths < 1)
    throw ParameterError("n_paths must be at least 1");

  SimulateOptions sim;
  sim.integrator = integrator_for(model.kind());
  sim.seed = options.seed;
  sim.frame_dim = d;

  std::vector<std::vector<StepMax>> per_worker(executor.workers(), std::vector<StepMax>(N));
  std::vector<std::size_t> diverged(executor.workers(), 0);

  executor.for_each(options.n_paths, [&](std::size_t path, unsigned worker) {
    std::vector<StepMax> local(N);
    const StepObserver obs = [&](const StepView& v) {
      const Mat& E = *v.frame_before;
      const Mat& J = *v.jacobian;
      const Mat& dv = v.drift.jacobian;
      StepMax& s = local[static_cast<std::size_t>(v.n)];
      s.alpha = inf_norm(*v.r_factor);
      const Tensor3 H = step_hessian(v.y, v.n, model);
      const Vec w = log_det_gradient(J, H);
      s.c = (w.transpose() * E).norm();
      s.dt = (E.transpose() * dv * E).norm();
      if (d < D) {
        const Mat P = complement(E);
        s.b = inf_norm(J * P);
        s.g = (E.transpose() * dv * P).norm();
        s.h = (P.transpose() * dv * E).norm();
        s.dn = (P.transpose() * dv * P).norm();
      }
    };
    const TrajectoryBundle b = simulate_path(model, sim, path, &obs);
    if (b.diverged) {
      ++diverged[worker];
      return;
    }
    for (int n = 0; n < N; ++n)
      per_worker[worker][static_cast<std::size_t>(n)].merge(local[static_cast<std::size_t>(n)]);
  });

  std::vector<StepMax> total(N);
  for (const auto& w : per_worker)
    for (int n = 0; n < N; ++n)
      total[static_cast<std::size_t>(n)].merge(w[static_cast<std::size_t>(n)]);

  TheoremDiagnostics out;
  out.d = d;
  for (std::size_t v : diverged)
    out.n_diverged += v;
  out.batch = options.n_paths - out.n_diverged;
  out.rows.reserve(N);
  double log_prod = 0.0;
  for (int n = 0; n < N; ++n) {
    const StepMax& s = total[static_cast<std::size_t>(n)];
    DiagnosticsRow r;
    r.n = n;
    r.t = model.field_time(n);
    r.alpha = s.alpha;
    r.b = s.b;
    r.c = s.c;
    r.g = s.g;
    r.h = s.h;
    r.diag_tangent = s.dt;
    r.diag_normal = s.dn;
    log_prod += std::log(s.alpha);
    r.log_alpha_product = log_prod;
    out.rows.push_back(r);
  }

  const int first = N - std::max(1, static_cast<int>(std::ceil(options.final_fraction * N)));
  for (int n = first; n < N; ++n) {
    const DiagnosticsRow& r = out.rows[static_cast<std::size_t>(n)];
    out.max_c_ratio = std::max(out.max_c_ratio, r.c / model.dt());
    const double diag = std::max(r.diag_tangent, r.diag_normal);
    if (diag > 0.0)
      out.max_cross_ratio = std::max(out.max_cross_ratio, std::max(r.g, r.h) / diag);
  }
  out.c_small = out.max_c_ratio <= options.c_ratio_bound;
  out.cross_small = out.max_cross_ratio <= options.cross_ratio;
  return out;
}

} // namespace lyapflow
