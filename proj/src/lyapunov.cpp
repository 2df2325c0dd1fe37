#include "lyapflow/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lyapflow/error.hpp"

namespace lyapflow {

namespace {

/// Thin QR with positive R diagonal.
void positive_qr(const Mat& A, Mat& Q, Mat& R)
{
  const int D = static_cast<int>(A.rows());
  const int k = static_cast<int>(A.cols());
  Eigen::HouseholderQR<Mat> qr(A);
  Q = qr.householderQ() * Mat::Identity(D, k);
  R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (R(i, i) < 0.0) {
      R.row(i) *= -1.0;
      Q.col(i) *= -1.0;
    }
}

void sort_exponents(LyapunovReport& rep)
{
  const int k = static_cast<int>(rep.column_exponents.size());
  rep.order.resize(k);
  std::iota(rep.order.begin(), rep.order.end(), 0);
  std::stable_sort(rep.order.begin(), rep.order.end(),
                   [&](int a, int b) { return rep.column_exponents(a) > rep.column_exponents(b); });
  rep.exponents.resize(k);
  for (int i = 0; i < k; ++i)
    rep.exponents(i) = rep.column_exponents(rep.order[i]);
}

} // namespace

Mat init_frame(int D, int k, CounterRng& rng)
{
  if (k < 1 || k > D)
    throw DimensionError("frame dimension must lie in [1, D]");
  Mat G(D, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < D; ++i)
      G(i, j) = rng.normal();
  Mat Q, R;
  positive_qr(G, Q, R);
  return Q;
}

Mat init_frame(int D, int k, std::uint64_t seed)
{
  CounterRng rng(seed, 0, Stream::frame);
  return init_frame(D, k, rng);
}

QrStep qr_push(const Mat& frame, const Mat& jacobian)
{
  if (jacobian.rows() != frame.rows() || jacobian.cols() != frame.rows())
    throw DimensionError("Jacobian and frame dimensions disagree");
  if (!jacobian.allFinite())
    throw DegenerateTangentError("non-finite Jacobian");
  QrStep out;
  positive_qr(jacobian * frame, out.frame, out.R);
  out.r = out.R.diagonal();
  for (Eigen::Index i = 0; i < out.r.size(); ++i)
    if (!(out.r(i) >= kDegenerateTangentTolerance))
      throw DegenerateTangentError("R diagonal " + std::to_string(i) + " collapsed to " + std::to_string(out.r(i)));
  return out;
}

LyapunovReport ftle(const TrajectoryBundle& bundle, int k)
{
  if (k < 1)
    throw DimensionError("ftle needs k >= 1");
  if (bundle.frame_dim < k)
    throw MissingHistoryError("bundle tracked " + std::to_string(bundle.frame_dim) + " tangent directions, " +
                              std::to_string(k) + " requested");
  if (bundle.diverged || static_cast<int>(bundle.log_r.size()) != bundle.n_steps)
    throw MissingHistoryError("tangent history is incomplete");

  LyapunovReport rep;
  rep.n_steps = bundle.n_steps;
  rep.dt = bundle.dt;
  rep.tau_eff = bundle.n_steps * bundle.dt;
  rep.log_r_sum = bundle.log_r_sum.head(k);
  rep.column_exponents = rep.log_r_sum / rep.tau_eff;
  sort_exponents(rep);
  rep.final_frame = bundle.final_frame.leftCols(k);
  rep.log_r_history.reserve(bundle.log_r.size());
  for (const Vec& lr : bundle.log_r)
    rep.log_r_history.push_back(lr.head(k));
  return rep;
}

LyapunovReport ftle_refined(const TrajectoryBundle& bundle, int k, int max_sweeps, double tol, int* sweeps_used)
{
  const int N = bundle.n_steps;
  if (N < 1 || static_cast<int>(bundle.jacobians.size()) != N)
    throw MissingHistoryError("ftle_refined needs recorded step Jacobians");
  const int D = static_cast<int>(bundle.jacobians.front().rows());
  if (k < 1 || k > D)
    throw DimensionError("k must lie in [1, D]");
  if (max_sweeps < 1)
    throw ParameterError("max_sweeps must be positive");

  CounterRng rng(bundle.seed, bundle.path_id, Stream::frame);
  Mat E0 = init_frame(D, k, rng);
  LyapunovReport rep;
  rep.n_steps = N;
  rep.dt = bundle.dt;
  rep.tau_eff = N * bundle.dt;

  Vec previous;
  int sweep = 0;
  while (true) {
    ++sweep;
    Mat E = E0;
    Vec sum = Vec::Zero(k);
    std::vector<Vec> history;
    history.reserve(N);
    for (int n = 0; n < N; ++n) {
      QrStep q = qr_push(E, bundle.jacobians[static_cast<std::size_t>(n)]);
      Vec lr = q.r.array().log();
      sum += lr;
      history.push_back(std::move(lr));
      E = std::move(q.frame);
    }
    const bool converged = previous.size() == k && (sum - previous).cwiseAbs().maxCoeff() <= tol * (1.0 + sum.cwiseAbs().maxCoeff());
    rep.log_r_sum = sum;
    rep.log_r_history = std::move(history);
    rep.final_frame = E;
    if (converged || sweep >= max_sweeps)
      break;
    previous = sum;
    for (int n = N - 1; n >= 0; --n)
      E = qr_push(E, bundle.jacobians[static_cast<std::size_t>(n)].transpose()).frame;
    E0 = E;
  }
  if (sweeps_used)
    *sweeps_used = sweep;
  rep.column_exponents = rep.log_r_sum / rep.tau_eff;
  sort_exponents(rep);
  return rep;
}

LyapunovReport mean_report(const std::vector<LyapunovReport>& reports)
{
  if (reports.empty())
    throw ParameterError("no Lyapunov reports to average");
  LyapunovReport out = reports.front();
  out.log_r_history.clear();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].log_r_sum.size() != out.log_r_sum.size())
      throw DimensionError("reports have different frame dimensions");
    out.log_r_sum += reports[i].log_r_sum;
  }
  out.log_r_sum /= static_cast<double>(reports.size());
  out.column_exponents = out.log_r_sum / out.tau_eff;
  sort_exponents(out);
  return out;
}

CauchyGreen cauchy_green_top(const TrajectoryBundle& bundle, int k, int first_step)
{
  const int N = static_cast<int>(bundle.jacobians.size());
  if (N == 0 || N != bundle.n_steps)
    throw MissingHistoryError("cauchy_green_top needs recorded step Jacobians");
  if (first_step < 0 || first_step >= N)
    throw ParameterError("window start outside the recorded steps");
  const int D = static_cast<int>(bundle.jacobians.front().rows());
  if (k < 1 || k > D)
    throw DimensionError("k must lie in [1, D]");

  Mat P = Mat::Identity(D, D);
  for (int n = first_step; n < N; ++n) {
    P = bundle.jacobians[static_cast<std::size_t>(n)] * P;
    if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e150)
      throw OverflowError("explicit Jacobian product overflows at step " + std::to_string(n) +
                          "; use the QR route (ftle)");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(P * P.transpose());
  CauchyGreen out;
  out.values.resize(k);
  out.vectors.resize(D, k);
  for (int i = 0; i < k; ++i) {
    out.values(i) = es.eigenvalues()(D - 1 - i);
    out.vectors.col(i) = es.eigenvectors().col(D - 1 - i);
  }
  out.tau = (N - first_step) * bundle.dt;
  return out;
}

ResponseHistory inhomogeneous_response(const TrajectoryBundle& bundle, const DriftModel& model,
                                       const PerturbationField& chi)
{
  const int N = bundle.n_steps;
  if (static_cast<int>(bundle.jacobians.size()) != N || static_cast<int>(bundle.states.size()) != N + 1)
    throw MissingHistoryError("inhomogeneous_response needs recorded states and Jacobians");
  if (model.n_steps() != N || model.dt() != bundle.dt)
    throw ParameterError("model time grid does not match the bundle");
  const int D = model.dim();
  ResponseHistory out;
  out.zeta.reserve(N + 1);
  Vec z = Vec::Zero(D);
  out.zeta.push_back(z);
  for (int n = 0; n < N; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    z = bundle.jacobians[i] * z + model.dt() * model.forcing(chi, bundle.states[i], n);
    out.zeta.push_back(z);
  }
  out.final = z;
  return out;
}

} // namespace lyapflow
