#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lyapflow {

using Json = nlohmann::ordered_json;

struct TargetConfig
{
  std::string kind = "two_moons";
  int D = 2;
  double radius = 1.0;
  std::vector<double> center{0.0, 0.0};
  std::vector<double> start{0.0, 0.0};
  std::vector<double> end{1.0, 0.0};
  std::vector<double> moon_offset{1.0, 0.5};
  double scale = 1.0;
  std::string density = "uniform";
  std::vector<double> q; ///< density table over the curve parameter
};

struct ScheduleConfig
{
  double offset = 0.008;
  double T = 0.9;
  double delta = 0.000225;
  int n_steps = 4000;
};

struct ModelConfig
{
  std::string kind = "sgm";
  double sigma_min = 0.1;
  double cfm_early_stop = 0.0;
  std::string hessian = "finite_difference";
};

struct PerturbationConfig
{
  std::string kind = "random_fourier";
  double sup_norm = 1.0;
  std::vector<double> epsilons{0.0, 0.1, 0.5, 1.0};
  int features = 32;
  double length_scale = 1.0;
  std::uint64_t seed = 7;
  std::vector<double> direction; ///< constant field; empty means e_1
  bool windowed = false;
  double window_start = 0.0;
  double window_end = 0.0;
};

struct RunConfig
{
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  int k = 2; ///< tracked frame columns
  int d = 1; ///< intrinsic dimension used by alignment and diagnostics
  bool refined = false; ///< lyapunov: converge the initial frame (records Jacobians)
};

struct ResponseConfig
{
  std::string observable = "disk";
  int coordinate = 0;
  std::vector<double> center{-1.0, 0.0};
  double radius = 0.15;
  double width = 0.05;
  std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
};

struct KdeConfig
{
  double x_min = -3.0, x_max = 3.0, y_min = -3.0, y_max = 3.0;
  int nx = 101, ny = 101;
  std::string bandwidth = "scott";
  double h = 0.0;
};

struct FieldDumpConfig
{
  std::vector<double> times{0.5};
  double x_min = -2.0, x_max = 2.0, y_min = -2.0, y_max = 2.0;
  int nx = 41, ny = 41;
  bool jacobian = false;
};

struct OutputConfig
{
  std::string directory; ///< empty: <output root>/<subcommand>
  bool final_states = true;
  bool trajectories = false;
  std::size_t trajectory_paths = 10;
  bool lyapunov_history = true;
};

struct ExperimentConfig
{
  TargetConfig target;
  ScheduleConfig schedule;
  ModelConfig model;
  PerturbationConfig perturbation;
  RunConfig run;
  ResponseConfig response;
  KdeConfig kde;
  FieldDumpConfig field_dump;
  OutputConfig output;
};

struct ConfigIssue
{
  std::string path;
  std::string message;
};

Json to_json(const ExperimentConfig& c);

/// Result of reading a config: the resolved config plus every problem found.
struct LoadedConfig
{
  ExperimentConfig config;
  std::vector<ConfigIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Schema check of `user` against the defaults (unknown keys, types), then
/// the semantic checks. Issues are collected, never fail-fast.
LoadedConfig resolve_config(const Json& user);

/// Parses a JSON config file (empty path: all defaults) and applies
/// `key.path=value` overrides before resolving.
LoadedConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// Semantic checks on an already typed config.
std::vector<ConfigIssue> validate(const ExperimentConfig& c);

std::size_t edit_distance(const std::string& a, const std::string& b);

Json issues_to_json(const std::vector<ConfigIssue>& issues);

} // namespace lyapflow
