#include "lyapflow/experiments.hpp"

#include <cmath>
#include <filesystem>

#include "lyapflow/alignment.hpp"
#include "lyapflow/csv.hpp"
#include "lyapflow/diagnostics.hpp"
#include "lyapflow/error.hpp"
#include "lyapflow/kde.hpp"
#include "lyapflow/response.hpp"
#include "lyapflow/spectrum.hpp"
#include "lyapflow/support_shift.hpp"

namespace lyapflow {

namespace {

namespace fs = std::filesystem;

Eigen::Vector2d planar(const std::vector<double>& v)
{
  return Eigen::Vector2d(v.at(0), v.at(1));
}

Vec to_vec(const std::vector<double>& v)
{
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json vec_json(const Vec& v)
{
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

Json columns_json(const Mat& m)
{
  Json a = Json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    a.push_back(vec_json(m.col(j)));
  return a;
}

// Output context: writes files and remembers their names.
struct Writer
{
  fs::path dir;
  ExperimentResult& result;

  void csv(const std::string& name, const CsvTable& t)
  {
    t.write((dir / name).string());
    result.files.push_back(name);
  }

  void json(const std::string& name, const Json& j)
  {
    write_text_file((dir / name).string(), j.dump(2) + "\n");
    result.files.push_back(name);
  }
};

SimulateOptions base_options(const ExperimentConfig& c, const DriftModel& model)
{
  SimulateOptions o;
  o.integrator = integrator_for(model.kind());
  o.seed = c.run.seed;
  return o;
}

std::size_t count_diverged(const std::vector<TrajectoryBundle>& paths)
{
  std::size_t n = 0;
  for (const auto& p : paths)
    n += p.diverged;
  return n;
}

Json gap_json(const SpectrumGap& g)
{
  return {{"index", g.index}, {"gap", g.gap}, {"runner_up", g.runner_up}, {"degenerate", g.degenerate}};
}

Json summary_json(const AlignmentSummary& s, const TangentEstimate& t)
{
  return {{"n_paths", s.n_paths},
          {"n_diverged", s.n_diverged},
          {"n_undefined", s.n_undefined},
          {"median_a", s.median_a},
          {"fraction_a_below_0_1", s.fraction_below_0_1},
          {"median_theta_deg", s.median_theta_deg},
          {"isotropic_degenerate", s.isotropic_degenerate},
          {"tangent_median_theta_deg", t.median},
          {"tangent_excluded", t.excluded}};
}

CsvTable alignment_table(const std::vector<AlignmentRecord>& records)
{
  CsvTable t({"path_id", "a", "theta_deg", "dist"});
  for (const AlignmentRecord& r : records)
    t.row({static_cast<long long>(r.path_id)}, {r.a, r.theta_deg, r.dist});
  return t;
}

AlignmentScan scan(const ExperimentConfig& c, const Setup& s, const DriftModel& model, const Executor& ex)
{
  AlignmentOptions o;
  o.n_paths = c.run.n_paths;
  o.seed = c.run.seed;
  o.d = c.run.d;
  o.frame_dim = c.run.k;
  return alignment_scan(model, *s.score, s.schedule.early_stop(), *s.manifold, o, ex);
}

double tangent_cutoff(const Setup& s)
{
  return 10.0 * s.schedule.sigma(s.schedule.early_stop());
}

// --- experiments -----------------------------------------------------------

void run_simulate(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const int D = s.manifold->ambient_dim();
  const SimulateOptions opt = base_options(c, s.model);
  const std::vector<TrajectoryBundle> paths = simulate(s.model, opt, c.run.n_paths, ex);

  std::vector<Projection> feet(paths.size());
  ex.for_each(paths.size(), [&](std::size_t i, unsigned) {
    if (!paths[i].diverged)
      feet[i] = project_to_manifold(*s.manifold, paths[i].final_state);
  });

  std::vector<double> dist;
  if (c.output.final_states) {
    std::vector<std::string> header{"path_id"};
    for (const auto& n : indexed_names("x", D))
      header.push_back(n);
    header.push_back("dist_to_M");
    header.push_back("tangential_coord");
    CsvTable t(header);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (paths[i].diverged)
        continue;
      std::vector<double> row(paths[i].final_state.data(), paths[i].final_state.data() + D);
      row.push_back(feet[i].dist);
      row.push_back(s.manifold->is_point() ? std::nan("")
                                           : s.manifold->arc_length_coordinate(feet[i].arc, feet[i].s));
      t.row({static_cast<long long>(i)}, row);
    }
    w.csv("final_states.csv", t);
  }
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (!paths[i].diverged)
      dist.push_back(feet[i].dist);

  if (c.output.trajectories) {
    std::vector<std::string> header{"path_id", "n", "t"};
    for (const auto& n : indexed_names("x", D))
      header.push_back(n);
    CsvTable t(header);
    const std::size_t n_traj = std::min(c.output.trajectory_paths, paths.size());
    std::vector<TrajectoryBundle> rec(n_traj);
    SimulateOptions ro = opt;
    ro.record.states = true;
    ex.for_each(n_traj, [&](std::size_t i, unsigned) { rec[i] = simulate_path(s.model, ro, i); });
    for (const TrajectoryBundle& b : rec)
      for (std::size_t n = 0; n < b.states.size(); ++n) {
        std::vector<double> row{b.times[n]};
        row.insert(row.end(), b.states[n].data(), b.states[n].data() + D);
        t.row({static_cast<long long>(b.path_id), static_cast<long long>(n)}, row);
      }
    w.csv("trajectories.csv", t);
  }

  w.result.n_paths = paths.size();
  w.result.n_diverged = count_diverged(paths);
  w.result.results = {{"n_paths", paths.size()},
                      {"n_diverged", w.result.n_diverged},
                      {"median_dist_to_M", median(dist)},
                      {"q95_dist_to_M", quantile(dist, 0.95)}};
}

void run_lyapunov(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const int k = c.run.k;
  SimulateOptions opt = base_options(c, s.model);
  opt.frame_dim = k;
  opt.record.jacobians = c.run.refined;

  const std::size_t P = c.run.n_paths;
  std::vector<std::optional<LyapunovReport>> reports(P);
  ex.for_each(P, [&](std::size_t i, unsigned) {
    const TrajectoryBundle b = simulate_path(s.model, opt, i);
    if (b.diverged)
      return;
    reports[i] = c.run.refined ? ftle_refined(b, k) : ftle(b, k);
  });

  std::vector<LyapunovReport> ok;
  CsvTable per_path([&] {
    std::vector<std::string> h{"path_id"};
    for (const auto& n : indexed_names("lambda_", k, 1))
      h.push_back(n);
    return h;
  }());
  for (std::size_t i = 0; i < P; ++i) {
    if (!reports[i])
      continue;
    const Vec& e = reports[i]->exponents;
    per_path.row({static_cast<long long>(i)}, std::vector<double>(e.data(), e.data() + e.size()));
    ok.push_back(*reports[i]);
  }
  w.result.n_paths = P;
  w.result.n_diverged = P - ok.size();
  if (ok.empty())
    throw DivergenceError(0, "every path diverged");

  const LyapunovReport mean = mean_report(ok);
  Json j = {{"exponents", vec_json(mean.exponents)},
            {"per_step_exponents", vec_json(mean.per_step_exponents())},
            {"tau_eff", mean.tau_eff},
            {"dt", mean.dt},
            {"n_steps", mean.n_steps},
            {"k", k},
            {"refined", c.run.refined},
            {"frame_columns", columns_json(ok.front().final_frame)},
            {"n_paths", P},
            {"n_diverged", w.result.n_diverged}};
  if (k >= 2)
    j["gap"] = gap_json(le_gap(mean));
  w.json("lyapunov.json", j);
  w.csv("lyapunov_paths.csv", per_path);

  if (c.output.lyapunov_history) {
    std::vector<std::string> h{"n", "t"};
    for (const auto& n : indexed_names("log_r_", k, 1))
      h.push_back(n);
    CsvTable t(h);
    const std::size_t N = ok.front().log_r_history.size();
    for (std::size_t n = 0; n < N; ++n) {
      Vec m = Vec::Zero(k);
      for (const LyapunovReport& r : ok)
        m += r.log_r_history[n];
      m /= static_cast<double>(ok.size());
      std::vector<double> row{s.model.field_time(static_cast<int>(n))};
      row.insert(row.end(), m.data(), m.data() + k);
      t.row({static_cast<long long>(n)}, row);
    }
    w.csv("lyapunov_history.csv", t);
  }
  w.result.results = j;
  w.result.results.erase("frame_columns");
}

void run_align(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const AlignmentScan a = scan(c, s, s.model, ex);
  w.csv("alignment.csv", alignment_table(a.records));
  const Json j = summary_json(a.summary, tangent_estimate_error(a.records, tangent_cutoff(s)));
  w.json("alignment.json", j);
  w.result.n_paths = a.summary.n_paths;
  w.result.n_diverged = a.summary.n_diverged;
  w.result.results = j;
}

void run_cfm_compare(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const AlignmentScan a = scan(c, s, build_model(c, s, ModelKind::sgm_reverse), ex);
  const AlignmentScan b = scan(c, s, build_model(c, s, ModelKind::cfm), ex);
  w.csv("alignment_sgm.csv", alignment_table(a.records));
  w.csv("alignment_cfm.csv", alignment_table(b.records));
  const Json j = {{"sgm", summary_json(a.summary, tangent_estimate_error(a.records, tangent_cutoff(s)))},
                  {"cfm", summary_json(b.summary, tangent_estimate_error(b.records, tangent_cutoff(s)))},
                  {"sgm_median_a_below_cfm", a.summary.median_a < b.summary.median_a}};
  w.json("cfm_compare.json", j);
  w.result.n_paths = a.summary.n_paths + b.summary.n_paths;
  w.result.n_diverged = a.summary.n_diverged + b.summary.n_diverged;
  w.result.results = j;
}

void run_perturb_sweep(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const SupportShift r =
    support_shift(s.model, *s.manifold, c.perturbation.epsilons, s.chi, c.run.n_paths, c.run.seed, ex);
  CsvTable t({"epsilon", "rms_tan", "rms_norm", "q50_dist", "q95_dist"});
  Json rows = Json::array();
  std::size_t diverged = 0;
  for (const SupportShiftRow& row : r.rows) {
    t.row({row.epsilon, row.rms_tan, row.rms_norm, row.q50_dist, row.q95_dist});
    rows.push_back({{"epsilon", row.epsilon},
                    {"tan_to_norm_ratio", row.rms_norm > 0 ? row.rms_tan / row.rms_norm : std::nan("")},
                    {"n_used", row.n_used},
                    {"n_diverged", row.n_diverged}});
    diverged = std::max(diverged, row.n_diverged);
  }
  w.csv("support_shift.csv", t);
  w.result.n_paths = c.run.n_paths;
  w.result.n_diverged = diverged;
  w.result.results = {{"degenerate", r.degenerate}, {"rows", rows}};
}

void run_diagnose(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  DiagnosticsOptions o;
  o.n_paths = c.run.n_paths;
  o.seed = c.run.seed;
  o.d = c.run.d;
  const TheoremDiagnostics d = theorem_diagnostics(s.model, o, ex);
  CsvTable t({"n", "t", "alpha", "b", "c", "g", "h"});
  for (const DiagnosticsRow& r : d.rows)
    t.row({r.n}, {r.t, r.alpha, r.b, r.c, r.g, r.h});
  w.csv("diagnostics.csv", t);
  const Json j = {{"batch", d.batch},
                  {"n_diverged", d.n_diverged},
                  {"d", d.d},
                  {"final_fraction", o.final_fraction},
                  {"c_small", d.c_small},
                  {"max_c_over_dt", d.max_c_ratio},
                  {"cross_small", d.cross_small},
                  {"max_cross_ratio", d.max_cross_ratio},
                  {"log_alpha_product", d.rows.empty() ? 0.0 : d.rows.back().log_alpha_product}};
  w.json("diagnostics.json", j);
  w.result.n_paths = c.run.n_paths;
  w.result.n_diverged = d.n_diverged;
  w.result.results = j;
}

Observable build_observable(const ExperimentConfig& c, const Setup& s)
{
  const ResponseConfig& r = c.response;
  if (r.observable == "coordinate")
    return Observable::coordinate(r.coordinate);
  const Vec center = r.center.size() == 2 ? s.manifold->embed(planar(r.center)) : to_vec(r.center);
  return Observable::disk(center, r.radius, r.width);
}

void run_response(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  const Observable f = build_observable(c, s);
  const ResponseResult r =
    response_consistency(s.model, f, s.chi, c.response.epsilons, c.run.n_paths, c.run.seed, ex);
  CsvTable t({"epsilon", "fd_estimate", "lin_estimate", "std_err"});
  for (const ResponseRow& row : r.rows)
    t.row({row.epsilon, row.fd_estimate, row.lin_estimate, row.std_err});
  w.csv("response.csv", t);
  Json fd_se = Json::array();
  for (const ResponseRow& row : r.rows)
    fd_se.push_back(row.fd_std_err);
  Json order = Json::array();
  for (double o : r.observed_order)
    order.push_back(o);
  const Json j = {{"observable", f.describe()},
                  {"lin_estimate", r.lin_estimate},
                  {"lin_std_err", r.lin_std_err},
                  {"inconclusive", r.inconclusive},
                  {"fd_std_err", fd_se},
                  {"observed_order", order},
                  {"n_used", r.n_used},
                  {"n_diverged", r.n_diverged}};
  w.json("response.json", j);
  w.result.n_paths = c.run.n_paths;
  w.result.n_diverged = r.n_diverged;
  w.result.results = j;
}

CsvTable kde_table(const KdeResult& k)
{
  CsvTable t({"x", "y", "density"});
  for (int i = 0; i < k.grid.ny; ++i)
    for (int j = 0; j < k.grid.nx; ++j)
      t.row({k.grid.x(j), k.grid.y(i), k.density(i, j)});
  return t;
}

void run_kde(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  GridSpec g;
  g.x_min = c.kde.x_min;
  g.x_max = c.kde.x_max;
  g.y_min = c.kde.y_min;
  g.y_max = c.kde.y_max;
  g.nx = c.kde.nx;
  g.ny = c.kde.ny;
  const Bandwidth rule = c.kde.bandwidth == "fixed" ? Bandwidth::fixed : Bandwidth::scott;
  const Mat liftT = s.manifold->lift().transpose();

  std::vector<double> eps{0.0};
  for (double e : c.perturbation.epsilons)
    if (e > 0.0)
      eps.push_back(e);

  Json panels = Json::array();
  std::size_t diverged = 0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const DriftModel m = eps[e] == 0.0 ? s.model : s.model.with_perturbation(s.chi, eps[e]);
    const std::vector<TrajectoryBundle> paths = simulate(m, base_options(c, m), c.run.n_paths, ex);
    const std::size_t nd = count_diverged(paths);
    diverged = std::max(diverged, nd);
    Mat samples(2, static_cast<Eigen::Index>(paths.size() - nd));
    Eigen::Index col = 0;
    for (const TrajectoryBundle& b : paths)
      if (!b.diverged)
        samples.col(col++) = liftT * b.final_state;
    if (samples.cols() == 0)
      throw DivergenceError(0, "every path diverged");
    const KdeResult k = kde_grid(samples, g, rule, c.kde.h);
    const std::string name = e == 0 ? "kde.csv" : "kde_perturbed_" + std::to_string(e) + ".csv";
    w.csv(name, kde_table(k));
    panels.push_back({{"file", name}, {"epsilon", eps[e]}, {"bandwidth", k.bandwidth}, {"mass", k.mass},
                      {"n_samples", samples.cols()}, {"n_diverged", nd}});
  }
  w.result.n_paths = c.run.n_paths;
  w.result.n_diverged = diverged;
  w.result.results = {{"panels", panels}};
}

void run_field_dump(const ExperimentConfig& c, const Setup& s, const Executor& ex, Writer& w)
{
  if (s.manifold->ambient_dim() != 2)
    throw ConfigError("target.D: field-dump needs a planar target (D = 2)");
  const bool cfm = s.model.kind() == ModelKind::cfm;
  for (double t : c.field_dump.times) {
    const bool ok = cfm ? (t >= 0.0 && t < 1.0) : (t > 0.0 && t < 1.0);
    if (!ok)
      throw ConfigError("field_dump.times: time " + format_double(t) + " outside the field's domain");
  }
  const FieldDumpConfig& f = c.field_dump;
  const bool jac = f.jacobian;
  const double coef = s.model.score_coefficient();
  const VectorField& field = s.model.field();

  const std::size_t per_time = static_cast<std::size_t>(f.nx) * static_cast<std::size_t>(f.ny);
  const std::size_t total = per_time * f.times.size();
  std::vector<std::vector<double>> rows(total);
  auto axis = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  ex.for_each(total, [&](std::size_t idx, unsigned) {
    const double t = f.times[idx / per_time];
    const std::size_t cell = idx % per_time;
    const int i = static_cast<int>(cell / static_cast<std::size_t>(f.nx));
    const int j = static_cast<int>(cell % static_cast<std::size_t>(f.nx));
    const Vec x = Eigen::Vector2d(axis(f.x_min, f.x_max, f.nx, j), axis(f.y_min, f.y_max, f.ny, i));
    const FieldEval e = field.evaluate(x, t, jac ? 1 : 0);
    Vec v;
    Mat J;
    if (cfm) {
      v = e.value;
      if (jac)
        J = e.jacobian;
    } else {
      const double beta = s.schedule.beta(t);
      v = beta * (x + coef * e.value);
      if (jac)
        J = beta * (Mat::Identity(2, 2) + coef * e.jacobian);
    }
    std::vector<double> row{t, x(0), x(1), v(0), v(1)};
    if (jac)
      row.insert(row.end(), {J(0, 0), J(0, 1), J(1, 0), J(1, 1)});
    rows[idx] = std::move(row);
  });

  std::vector<std::string> h{"t", "x0", "x1", "v0", "v1"};
  if (jac)
    h.insert(h.end(), {"j00", "j01", "j10", "j11"});
  CsvTable t(h);
  for (const auto& r : rows)
    t.row(r);
  w.csv("field_dump.csv", t);
  w.result.results = {{"model", to_string(s.model.kind())}, {"points", total}};
}

} // namespace

Setup build_setup(const ExperimentConfig& c)
{
  ShapeParams shape;
  shape.radius = c.target.radius;
  shape.center = planar(c.target.center);
  shape.start = planar(c.target.start);
  shape.end = planar(c.target.end);
  shape.moon_offset = planar(c.target.moon_offset);
  shape.scale = c.target.scale;
  DensitySpec density;
  if (c.target.density == "table") {
    density.kind = DensityKind::table;
    density.table = c.target.q;
  }
  auto manifold = std::make_shared<const CurveManifold>(
    CurveManifold::build(curve_kind_from_string(c.target.kind), shape, c.target.D, density));

  ScheduleParams sp;
  sp.offset = c.schedule.offset;
  sp.horizon = c.schedule.T;
  sp.early_stop = c.schedule.delta;
  sp.n_steps = c.schedule.n_steps;
  const NoiseSchedule schedule(sp);
  const HessianMethod hm =
    c.model.hessian == "analytic" ? HessianMethod::analytic : HessianMethod::finite_difference;
  auto score = std::make_shared<const ScoreField>(manifold, schedule, QuadratureOptions{}, hm);

  PerturbationParams pp;
  pp.kind = perturbation_kind_from_string(c.perturbation.kind);
  pp.sup_norm = c.perturbation.sup_norm;
  pp.features = c.perturbation.features;
  pp.length_scale = c.perturbation.length_scale;
  pp.seed = c.perturbation.seed;
  if (!c.perturbation.direction.empty())
    pp.direction = to_vec(c.perturbation.direction);
  pp.windowed = c.perturbation.windowed;
  pp.window_start = c.perturbation.window_start;
  pp.window_end = c.perturbation.window_end;
  auto chi = std::make_shared<const PerturbationField>(pp, *manifold);

  Setup s{manifold, schedule, score, DriftModel::score_based(ModelKind::sgm_reverse, score, schedule), chi};
  s.model = build_model(c, s, model_kind_from_string(c.model.kind));
  return s;
}

DriftModel build_model(const ExperimentConfig& c, const Setup& s, ModelKind kind)
{
  if (kind != ModelKind::cfm)
    return DriftModel::score_based(kind, s.score, s.schedule);
  const HessianMethod hm =
    c.model.hessian == "analytic" ? HessianMethod::analytic : HessianMethod::finite_difference;
  auto field = std::make_shared<const CfmField>(s.manifold, c.model.sigma_min, QuadratureOptions{}, hm);
  return DriftModel::flow_matching(field, c.model.cfm_early_stop, c.schedule.n_steps);
}

const std::vector<std::string>& experiment_names()
{
  static const std::vector<std::string> names{"simulate", "lyapunov", "align",       "perturb-sweep", "diagnose",
                                              "response", "kde",      "cfm-compare", "field-dump"};
  return names;
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c, const std::string& out_dir,
                                const Executor& executor)
{
  const Setup s = build_setup(c);
  ExperimentResult result;
  Writer w{fs::path(out_dir), result};
  if (name == "simulate")
    run_simulate(c, s, executor, w);
  else if (name == "lyapunov")
    run_lyapunov(c, s, executor, w);
  else if (name == "align")
    run_align(c, s, executor, w);
  else if (name == "cfm-compare")
    run_cfm_compare(c, s, executor, w);
  else if (name == "perturb-sweep")
    run_perturb_sweep(c, s, executor, w);
  else if (name == "diagnose")
    run_diagnose(c, s, executor, w);
  else if (name == "response")
    run_response(c, s, executor, w);
  else if (name == "kde")
    run_kde(c, s, executor, w);
  else if (name == "field-dump")
    run_field_dump(c, s, executor, w);
  else
    throw ParameterError("unknown experiment '" + name + "'");
  return result;
}

} // namespace lyapflow
