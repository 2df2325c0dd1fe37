#include "lyapflow/dynamics.hpp"

#include <cmath>
#include <string>

#include "lyapflow/error.hpp"
#include "lyapflow/lyapunov.hpp"
#include "lyapflow/rng.hpp"

namespace lyapflow {

namespace {

void check_state(const Vec& y, int n)
{
  if (!y.allFinite())
    throw DivergenceError(n, "non-finite state");
  if (y.norm() > kDivergenceThreshold)
    throw DivergenceError(n, "state norm exceeded " + std::to_string(kDivergenceThreshold));
}

Vec advance(const Vec& y, int n, const Vec& v, const Vec* xi, const DriftModel& model)
{
  Vec out = y + model.dt() * v;
  if (xi)
    out += model.diffusion(n) * *xi;
  check_state(out, n);
  return out;
}

void check_integrator(Integrator integrator, const DriftModel& model)
{
  if (integrator == Integrator::sde && model.kind() != ModelKind::sgm_reverse)
    throw ParameterError("the sde integrator needs an sgm_reverse model");
  if (integrator == Integrator::ode && model.kind() == ModelKind::sgm_reverse)
    throw ParameterError("the ode integrator needs a prob_flow_reverse or cfm model");
}

/// Shared integration loop. `noise_at(n)` supplies xi_n for the SDE.
template <class Noise>
TrajectoryBundle integrate(const DriftModel& model, const SimulateOptions& options, std::size_t path, Vec y,
                           Noise&& noise_at, const StepObserver* observer)
{
  check_integrator(options.integrator, model);
  const int D = model.dim();
  const int N = model.n_steps();
  const int k = options.frame_dim;
  if (k < 0 || k > D)
    throw DimensionError("frame dimension must lie in [0, D]");

  TrajectoryBundle b;
  b.path_id = path;
  b.seed = options.seed;
  b.integrator = options.integrator;
  b.n_steps = N;
  b.dt = model.dt();
  b.initial_state = y;
  b.frame_dim = k;

  const bool sde = options.integrator == Integrator::sde;
  const bool need_j = k > 0 || options.record.jacobians || options.response_field || options.need_jacobian;
  const RecordFlags& rec = options.record;

  Mat E;
  if (k > 0) {
    CounterRng frame_rng(options.frame_seed.value_or(options.seed), path, Stream::frame);
    E = init_frame(D, k, frame_rng);
    b.log_r.reserve(N);
    b.log_r_sum = Vec::Zero(k);
  }
  Vec zeta;
  if (options.response_field)
    zeta = Vec::Zero(D);

  if (rec.states) {
    b.states.reserve(N + 1);
    b.times.reserve(N + 1);
    b.states.push_back(y);
    b.times.push_back(model.field_time(0));
  }
  if (rec.frames && k > 0)
    b.frames.push_back(E);

  int n = 0;
  try {
    check_state(y, 0);
    for (; n < N; ++n) {
      const FieldEval v = model.drift(y, n, need_j ? 1 : 0);
      Mat J;
      if (need_j)
        J = Mat::Identity(D, D) + model.dt() * v.jacobian;
      Vec xi;
      if (sde)
        xi = noise_at(n);

      QrStep q;
      if (k > 0) {
        q = qr_push(E, J);
        Vec lr = q.r.array().log();
        b.log_r_sum += lr;
        b.log_r.push_back(std::move(lr));
      }
      if (observer) {
        const StepView view{n, y, v, need_j ? &J : nullptr, k > 0 ? &E : nullptr, k > 0 ? &q.frame : nullptr,
                            k > 0 ? &q.R : nullptr};
        (*observer)(view);
      }
      if (options.response_field)
        zeta = J * zeta + model.dt() * model.forcing(*options.response_field, y, n);

      y = advance(y, n, v.value, sde ? &xi : nullptr, model);

      if (rec.noise && sde)
        b.noise.push_back(std::move(xi));
      if (rec.jacobians)
        b.jacobians.push_back(std::move(J));
      if (k > 0) {
        E = std::move(q.frame);
        if (rec.frames)
          b.frames.push_back(E);
      }
      if (rec.states) {
        b.states.push_back(y);
        b.times.push_back(model.field_time(n + 1));
      }
    }
  } catch (const DivergenceError& e) {
    b.diverged = true;
    b.divergence_step = e.step();
    b.divergence_message = e.what();
  }
  b.final_state = y;
  if (k > 0)
    b.final_frame = E;
  if (options.response_field && !b.diverged)
    b.response = zeta;
  return b;
}

} // namespace

Integrator integrator_for(ModelKind kind)
{
  return kind == ModelKind::sgm_reverse ? Integrator::sde : Integrator::ode;
}

Vec em_step(const Vec& y, int n, const Vec& xi, const DriftModel& model)
{
  check_integrator(Integrator::sde, model);
  if (xi.size() != y.size())
    throw DimensionError("noise vector has the wrong dimension");
  return advance(y, n, model.drift(y, n, 0).value, &xi, model);
}

Vec ode_step(const Vec& y, int n, const DriftModel& model)
{
  check_integrator(Integrator::ode, model);
  return advance(y, n, model.drift(y, n, 0).value, nullptr, model);
}

Mat step_jacobian(const Vec& y, int n, const DriftModel& model)
{
  const int D = model.dim();
  return Mat::Identity(D, D) + model.dt() * model.drift(y, n, 1).jacobian;
}

Tensor3 step_hessian(const Vec& y, int n, const DriftModel& model)
{
  Tensor3 h = model.drift(y, n, 2).hessian;
  h *= model.dt();
  return h;
}

TrajectoryBundle simulate_path(const DriftModel& model, const SimulateOptions& options, std::size_t path,
                               const StepObserver* observer)
{
  const int D = model.dim();
  CounterRng init(options.seed, path, Stream::initial_state);
  Vec y0 = init.normal_vector(D);
  CounterRng noise(options.seed, path, Stream::noise);
  return integrate(model, options, path, std::move(y0), [&](int) { return noise.normal_vector(D); }, observer);
}

std::vector<TrajectoryBundle> simulate(const DriftModel& model, const SimulateOptions& options,
                                       std::size_t n_paths, const Executor& executor)
{
  if (n_paths < 1)
    throw ParameterError("n_paths must be at least 1");
  std::vector<TrajectoryBundle> out(n_paths);
  executor.for_each(n_paths, [&](std::size_t i, unsigned) { out[i] = simulate_path(model, options, i); });
  return out;
}

TrajectoryBundle replay(const DriftModel& model, const TrajectoryBundle& recorded, const SimulateOptions& options)
{
  SimulateOptions opts = options;
  opts.seed = recorded.seed;
  opts.integrator = recorded.integrator;
  if (recorded.integrator == Integrator::sde && static_cast<int>(recorded.noise.size()) < model.n_steps())
    throw MissingHistoryError("replay needs the recorded noise sequence");
  if (recorded.initial_state.size() != model.dim())
    throw MissingHistoryError("replay needs the recorded initial state");
  return integrate(model, opts, recorded.path_id, recorded.initial_state,
                   [&](int n) { return recorded.noise[static_cast<std::size_t>(n)]; }, nullptr);
}

} // namespace lyapflow
