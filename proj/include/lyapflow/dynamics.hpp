#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lyapflow/drift_model.hpp"
#include "lyapflow/executor.hpp"

namespace lyapflow {

enum class Integrator
{
  sde,
  ode
};

/// States with |y| above this are treated as numerical blow-up.
constexpr double kDivergenceThreshold = 1e6;

/// Y' = Y + v_n(Y) dt + xi sqrt(2 beta dt).
Vec em_step(const Vec& y, int n, const Vec& xi, const DriftModel& model);
/// Y' = Y + v_n(Y) dt for the probability flow or flow matching.
Vec ode_step(const Vec& y, int n, const DriftModel& model);
/// dF_n = I + dt dv_n(y). Noise is additive, so this is noise-independent.
Mat step_jacobian(const Vec& y, int n, const DriftModel& model);
/// d2F_n = dt d2v_n(y).
Tensor3 step_hessian(const Vec& y, int n, const DriftModel& model);

struct RecordFlags
{
  bool states = false;
  bool noise = false;
  bool jacobians = false;
  bool frames = false;
};

struct TrajectoryBundle
{
  std::size_t path_id = 0;
  std::uint64_t seed = 0;
  Integrator integrator = Integrator::sde;
  int n_steps = 0;
  double dt = 0.0;

  Vec initial_state;
  Vec final_state;

  std::vector<double> times;  ///< t_n, when states are recorded
  std::vector<Vec> states;    ///< y_0 .. y_N
  std::vector<Vec> noise;     ///< xi_0 .. xi_{N-1}
  std::vector<Mat> jacobians; ///< dF_0 .. dF_{N-1}
  std::vector<Mat> frames;    ///< E_0 .. E_N

  int frame_dim = 0;
  Mat final_frame;
  std::vector<Vec> log_r; ///< log of the positive R diagonals per step
  Vec log_r_sum;

  std::optional<Vec> response; ///< zeta_N when a response field is tracked

  bool diverged = false;
  int divergence_step = -1;
  std::string divergence_message;
};

/// Everything an observer can see at step n, before the state advances.
struct StepView
{
  int n;
  const Vec& y;
  const FieldEval& drift;
  const Mat* jacobian;     ///< dF_n when tangent data is computed
  const Mat* frame_before; ///< E_n
  const Mat* frame_after;  ///< E_{n+1}
  const Mat* r_factor;     ///< R_n (k x k)
};

using StepObserver = std::function<void(const StepView&)>;

struct SimulateOptions
{
  Integrator integrator = Integrator::sde;
  std::uint64_t seed = 0;
  int frame_dim = 0; ///< 0 disables tangent tracking
  /// Seed for the initial frame; defaults to `seed`. The frame draw stays per path.
  std::optional<std::uint64_t> frame_seed;
  RecordFlags record;
  /// When set, zeta_{n+1} = dF_n zeta_n + dt beta chi(y_n) is accumulated in-line.
  std::shared_ptr<const PerturbationField> response_field;
  /// Force Jacobian evaluation each step (observers reading dF).
  bool need_jacobian = false;
};

/// One path. y_0 and the noise come from counter-based substreams of
/// (seed, path), so a path is reproducible in isolation. Divergence marks
/// the bundle instead of throwing.
TrajectoryBundle simulate_path(const DriftModel& model, const SimulateOptions& options, std::size_t path,
                               const StepObserver* observer = nullptr);

std::vector<TrajectoryBundle> simulate(const DriftModel& model, const SimulateOptions& options,
                                       std::size_t n_paths, const Executor& executor = Executor(1));

/// Re-integrates a recorded path (initial state and noise) through `model`.
/// Seed and integrator come from the recording; the rest from `options`.
TrajectoryBundle replay(const DriftModel& model, const TrajectoryBundle& recorded,
                        const SimulateOptions& options = {});

Integrator integrator_for(ModelKind kind);

} // namespace lyapflow
