#include "lyapflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lyapflow/csv.hpp"
#include "lyapflow/error.hpp"

namespace lyapflow {

namespace {

// Field lists drive both serialization directions.
template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, TargetConfig>
{
  f("kind", c.kind);
  f("D", c.D);
  f("radius", c.radius);
  f("center", c.center);
  f("start", c.start);
  f("end", c.end);
  f("moon_offset", c.moon_offset);
  f("scale", c.scale);
  f("density", c.density);
  f("q", c.q);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, ScheduleConfig>
{
  f("offset", c.offset);
  f("T", c.T);
  f("delta", c.delta);
  f("n_steps", c.n_steps);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, ModelConfig>
{
  f("kind", c.kind);
  f("sigma_min", c.sigma_min);
  f("cfm_early_stop", c.cfm_early_stop);
  f("hessian", c.hessian);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, PerturbationConfig>
{
  f("kind", c.kind);
  f("sup_norm", c.sup_norm);
  f("epsilons", c.epsilons);
  f("features", c.features);
  f("length_scale", c.length_scale);
  f("seed", c.seed);
  f("direction", c.direction);
  f("windowed", c.windowed);
  f("window_start", c.window_start);
  f("window_end", c.window_end);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, RunConfig>
{
  f("n_paths", c.n_paths);
  f("seed", c.seed);
  f("k", c.k);
  f("d", c.d);
  f("refined", c.refined);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, ResponseConfig>
{
  f("observable", c.observable);
  f("coordinate", c.coordinate);
  f("center", c.center);
  f("radius", c.radius);
  f("width", c.width);
  f("epsilons", c.epsilons);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, KdeConfig>
{
  f("x_min", c.x_min);
  f("x_max", c.x_max);
  f("y_min", c.y_min);
  f("y_max", c.y_max);
  f("nx", c.nx);
  f("ny", c.ny);
  f("bandwidth", c.bandwidth);
  f("h", c.h);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, FieldDumpConfig>
{
  f("times", c.times);
  f("x_min", c.x_min);
  f("x_max", c.x_max);
  f("y_min", c.y_min);
  f("y_max", c.y_max);
  f("nx", c.nx);
  f("ny", c.ny);
  f("jacobian", c.jacobian);
}

template <class T, class F>
void fields(T& c, F&& f)
  requires std::is_same_v<std::remove_const_t<T>, OutputConfig>
{
  f("directory", c.directory);
  f("final_states", c.final_states);
  f("trajectories", c.trajectories);
  f("trajectory_paths", c.trajectory_paths);
  f("lyapunov_history", c.lyapunov_history);
}

template <class T, class F>
void blocks(T& c, F&& f)
{
  f("target", c.target);
  f("schedule", c.schedule);
  f("model", c.model);
  f("perturbation", c.perturbation);
  f("run", c.run);
  f("response", c.response);
  f("kde", c.kde);
  f("field_dump", c.field_dump);
  f("output", c.output);
}

template <class B>
Json block_json(const B& b)
{
  Json j = Json::object();
  fields(b, [&](const char* name, const auto& v) { j[name] = v; });
  return j;
}

template <class B>
void block_from_json(const Json& j, B& b)
{
  fields(b, [&](const char* name, auto& v) { j.at(name).get_to(v); });
}

std::string nearest(const std::string& key, const Json& siblings)
{
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& [k, _] : siblings.items()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best_d <= std::max<std::size_t>(2, key.size() / 2) ? best : std::string();
}

std::string kind_name(const Json& j)
{
  switch (j.type()) {
  case Json::value_t::object:
    return "object";
  case Json::value_t::array:
    return "array";
  case Json::value_t::string:
    return "string";
  case Json::value_t::boolean:
    return "boolean";
  case Json::value_t::number_integer:
  case Json::value_t::number_unsigned:
    return "integer";
  case Json::value_t::number_float:
    return "number";
  default:
    return "null";
  }
}

bool type_matches(const Json& def, const Json& v)
{
  switch (def.type()) {
  case Json::value_t::number_float:
    return v.is_number();
  case Json::value_t::number_integer:
    return v.is_number_integer();
  case Json::value_t::number_unsigned:
    return v.is_number_unsigned();
  case Json::value_t::array:
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
  default:
    return def.type() == v.type();
  }
}

void check_schema(const Json& def, const Json& user, const std::string& path, std::vector<ConfigIssue>& issues)
{
  for (const auto& [key, value] : user.items()) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!def.contains(key)) {
      std::string msg = "unknown key '" + key + "'";
      const std::string hint = nearest(key, def);
      if (!hint.empty())
        msg += "; did you mean '" + hint + "'?";
      issues.push_back({p, msg});
      continue;
    }
    const Json& d = def.at(key);
    if (d.is_object()) {
      if (!value.is_object())
        issues.push_back({p, "expected an object, got " + kind_name(value)});
      else
        check_schema(d, value, p, issues);
      continue;
    }
    if (!type_matches(d, value)) {
      std::string want = kind_name(d);
      if (d.is_number_unsigned())
        want = "non-negative integer";
      if (d.is_array())
        want = "array of numbers";
      issues.push_back({p, "expected " + want + ", got " + kind_name(value)});
    }
  }
}

// Copies schema-valid entries of `user` over `out`.
void merge_valid(const Json& def, const Json& user, Json& out)
{
  for (const auto& [key, value] : user.items()) {
    if (!def.contains(key))
      continue;
    const Json& d = def.at(key);
    if (d.is_object()) {
      if (value.is_object())
        merge_valid(d, value, out[key]);
    } else if (type_matches(d, value)) {
      out[key] = value;
    }
  }
}

void apply_override(Json& user, const std::string& text, std::vector<ConfigIssue>& issues)
{
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    issues.push_back({text, "override must look like key.path=value"});
    return;
  }
  const std::string path = text.substr(0, eq);
  const std::string raw = text.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded())
    value = raw;

  Json* node = &user;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.'))
    parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) {
      issues.push_back({path, "empty component in override key"});
      return;
    }
    if (!node->is_object())
      *node = Json::object();
    if (i + 1 == parts.size())
      (*node)[parts[i]] = value;
    else
      node = &(*node)[parts[i]];
  }
}

bool positive(double v)
{
  return std::isfinite(v) && v > 0.0;
}

} // namespace

std::size_t edit_distance(const std::string& a, const std::string& b)
{
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Json to_json(const ExperimentConfig& c)
{
  Json j = Json::object();
  blocks(c, [&](const char* name, const auto& b) { j[name] = block_json(b); });
  return j;
}

std::vector<ConfigIssue> validate(const ExperimentConfig& c)
{
  std::vector<ConfigIssue> out;
  auto add = [&](std::string path, std::string msg) { out.push_back({std::move(path), std::move(msg)}); };
  auto one_of = [&](const std::string& path, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
      if (v == a)
        return;
    std::string msg = "'" + v + "' is not one of";
    for (const char* a : allowed)
      msg += std::string(" ") + a;
    add(path, msg);
  };

  const int D = c.target.D;
  one_of("target.kind", c.target.kind, {"circle", "two_moons", "segment", "s_curve", "point"});
  if (D < 2)
    add("target.D", "ambient dimension must be at least 2");
  if (!positive(c.target.radius))
    add("target.radius", "must be positive");
  if (!positive(c.target.scale))
    add("target.scale", "must be positive");
  for (const char* key : {"center", "start", "end", "moon_offset"}) {
    const auto& v = key == std::string("center") ? c.target.center
                    : key == std::string("start") ? c.target.start
                    : key == std::string("end")   ? c.target.end
                                                  : c.target.moon_offset;
    if (v.size() != 2)
      add(std::string("target.") + key, "expected 2 planar coordinates");
  }
  one_of("target.density", c.target.density, {"uniform", "table"});
  if (c.target.density == "table") {
    if (c.target.q.size() < 2)
      add("target.q", "a density table needs at least 2 entries");
    for (double q : c.target.q)
      if (!(q >= 0.0) || !std::isfinite(q)) {
        add("target.q", "density table entries must be finite and non-negative");
        break;
      }
  }

  const ScheduleConfig& s = c.schedule;
  if (!positive(s.offset))
    add("schedule.offset", "must be positive");
  if (!(s.T > 0.0 && s.T < 1.0))
    add("schedule.T", "horizon must lie in (0, 1)");
  if (!positive(s.delta))
    add("schedule.delta", "must be positive");
  if (!(s.delta < s.T))
    add("schedule.delta", "schedule.delta (" + format_double(s.delta) + ") must be below schedule.T (" +
                            format_double(s.T) + ")");
  if (s.n_steps < 1)
    add("schedule.n_steps", "must be at least 1");

  one_of("model.kind", c.model.kind, {"sgm", "prob_flow", "cfm"});
  if (!(c.model.sigma_min > 0.0 && c.model.sigma_min < 1.0))
    add("model.sigma_min", "must lie in (0, 1)");
  if (!(c.model.cfm_early_stop >= 0.0 && c.model.cfm_early_stop < 1.0))
    add("model.cfm_early_stop", "must lie in [0, 1)");
  one_of("model.hessian", c.model.hessian, {"finite_difference", "analytic"});

  const PerturbationConfig& p = c.perturbation;
  one_of("perturbation.kind", p.kind, {"random_fourier", "constant_vector"});
  if (!(p.sup_norm >= 0.0) || !std::isfinite(p.sup_norm))
    add("perturbation.sup_norm", "must be finite and non-negative");
  for (std::size_t i = 0; i < p.epsilons.size(); ++i)
    if (!(p.epsilons[i] >= 0.0) || !std::isfinite(p.epsilons[i]))
      add("perturbation.epsilons[" + std::to_string(i) + "]", "epsilon must be finite and >= 0");
  if (p.features < 1)
    add("perturbation.features", "must be at least 1");
  if (!positive(p.length_scale))
    add("perturbation.length_scale", "must be positive");
  if (!p.direction.empty() && static_cast<int>(p.direction.size()) != D)
    add("perturbation.direction", "must have target.D entries");
  if (p.windowed && !(p.window_end > p.window_start))
    add("perturbation.window_end", "window must satisfy window_start < window_end");

  if (c.run.n_paths < 1)
    add("run.n_paths", "must be at least 1");
  if (c.run.k < 1 || c.run.k > D)
    add("run.k", "frame size must satisfy 1 <= run.k <= target.D (" + std::to_string(D) + ")");
  if (c.run.d < 1 || c.run.d > c.run.k)
    add("run.d", "must satisfy 1 <= run.d <= run.k");

  const ResponseConfig& r = c.response;
  one_of("response.observable", r.observable, {"coordinate", "disk"});
  if (r.observable == "coordinate" && (r.coordinate < 0 || r.coordinate >= D))
    add("response.coordinate", "index must lie in [0, target.D)");
  if (r.observable == "disk") {
    if (r.center.size() != 2 && static_cast<int>(r.center.size()) != D)
      add("response.center", "expected 2 planar or target.D ambient coordinates");
    if (!positive(r.radius))
      add("response.radius", "must be positive");
    if (!positive(r.width))
      add("response.width", "must be positive");
  }
  if (r.epsilons.empty())
    add("response.epsilons", "need at least one epsilon");
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    if (!positive(r.epsilons[i]))
      add("response.epsilons[" + std::to_string(i) + "]", "epsilon must be positive");

  const KdeConfig& k = c.kde;
  if (!(k.x_max > k.x_min))
    add("kde.x_max", "must exceed kde.x_min");
  if (!(k.y_max > k.y_min))
    add("kde.y_max", "must exceed kde.y_min");
  if (k.nx < 1 || k.ny < 1)
    add("kde.nx", "grid needs at least one cell per axis");
  one_of("kde.bandwidth", k.bandwidth, {"scott", "fixed"});
  if (k.bandwidth == "fixed" && !positive(k.h))
    add("kde.h", "fixed bandwidth must be positive");

  const FieldDumpConfig& f = c.field_dump;
  if (f.times.empty())
    add("field_dump.times", "need at least one time");
  if (!(f.x_max > f.x_min))
    add("field_dump.x_max", "must exceed field_dump.x_min");
  if (!(f.y_max > f.y_min))
    add("field_dump.y_max", "must exceed field_dump.y_min");
  if (f.nx < 1 || f.ny < 1)
    add("field_dump.nx", "grid needs at least one point per axis");
  return out;
}

LoadedConfig resolve_config(const Json& user)
{
  LoadedConfig out;
  const Json def = to_json(ExperimentConfig{});
  if (!user.is_object()) {
    out.issues.push_back({"", "config must be a JSON object"});
    return out;
  }
  check_schema(def, user, "", out.issues);
  Json merged = def;
  merge_valid(def, user, merged);
  blocks(out.config, [&](const char* name, auto& b) { block_from_json(merged.at(name), b); });
  for (ConfigIssue& i : validate(out.config))
    out.issues.push_back(std::move(i));
  return out;
}

LoadedConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
  std::vector<ConfigIssue> early;
  Json user = Json::object();
  if (!path.empty()) {
    const std::string text = read_text_file(path);
    try {
      user = Json::parse(text, nullptr, true, true);
    } catch (const Json::parse_error& e) {
      early.push_back({path, std::string("not valid JSON: ") + e.what()});
      user = Json::object();
    }
  }
  for (const std::string& o : overrides)
    apply_override(user, o, early);
  LoadedConfig out = resolve_config(user);
  out.issues.insert(out.issues.begin(), early.begin(), early.end());
  return out;
}

Json issues_to_json(const std::vector<ConfigIssue>& issues)
{
  Json a = Json::array();
  for (const ConfigIssue& i : issues)
    a.push_back({{"path", i.path}, {"message", i.message}});
  return a;
}

} // namespace lyapflow
