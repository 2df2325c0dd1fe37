#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lyapflow/config.hpp"
#include "lyapflow/drift_model.hpp"
#include "lyapflow/executor.hpp"

namespace lyapflow {

/// Runtime objects built from a config.
struct Setup
{
  std::shared_ptr<const CurveManifold> manifold;
  NoiseSchedule schedule;
  std::shared_ptr<const ScoreField> score; ///< target score, also used by CFM runs for alignment
  DriftModel model;                        ///< the configured model, unperturbed
  std::shared_ptr<const PerturbationField> chi;
};

Setup build_setup(const ExperimentConfig& c);
/// Model of `kind` on the configured target and schedule.
DriftModel build_model(const ExperimentConfig& c, const Setup& s, ModelKind kind);

struct ExperimentResult
{
  std::vector<std::string> files; ///< written, relative to the output directory
  Json results = Json::object();
  std::size_t n_paths = 0;
  std::size_t n_diverged = 0;
};

/// simulate, lyapunov, align, perturb-sweep, diagnose, response, kde, cfm-compare, field-dump.
const std::vector<std::string>& experiment_names();

/// Runs one experiment and writes its CSV/JSON artifacts into `out_dir`
/// (which must exist). Throws ConfigError, IoError or library errors.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c, const std::string& out_dir,
                                const Executor& executor);

} // namespace lyapflow
