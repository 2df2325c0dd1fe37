#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lyapflow/config.hpp"
#include "lyapflow/error.hpp"
#include "lyapflow/executor.hpp"
#include "lyapflow/experiments.hpp"
#include "lyapflow/manifest.hpp"

namespace {

using namespace lyapflow;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;
constexpr int kExitRuntime = 5;

struct Options
{
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
  std::vector<std::string> overrides;
  std::string manifest_dir;
};

int fail(const std::string& kind, int code, const std::string& message, const Json& details = Json())
{
  Json e = {{"error", kind}, {"exit_code", code}, {"message", message}};
  if (!details.is_null())
    e["details"] = details;
  std::cerr << e.dump() << "\n";
  return code;
}

std::string output_dir(const Options& o, const ExperimentConfig& c, const std::string& sub)
{
  if (!o.out.empty())
    return o.out;
  const char* env = std::getenv("LYAPFLOW_OUT");
  const fs::path root = env && *env ? fs::path(env) : fs::path("lyapflow_out");
  if (c.output.directory.empty())
    return (root / sub).string();
  const fs::path d(c.output.directory);
  return d.is_absolute() ? d.string() : (root / d).string();
}

LoadedConfig load(const Options& o)
{
  std::vector<std::string> overrides = o.overrides;
  if (o.seed)
    overrides.push_back("run.seed=" + std::to_string(*o.seed));
  return load_config(o.config, overrides);
}

int cmd_validate(const Options& o)
{
  const LoadedConfig lc = load(o);
  const Json report = {{"ok", lc.ok()}, {"issues", issues_to_json(lc.issues)}};
  std::cout << report.dump(2) << "\n";
  return lc.ok() ? 0 : kExitConfig;
}

int cmd_verify(const Options& o)
{
  const std::string dir = !o.manifest_dir.empty() ? o.manifest_dir : o.out;
  if (dir.empty())
    return fail("usage", kExitConfig, "verify-manifest needs a directory (positional or --out)");
  const ManifestCheck check = verify_manifest(dir);
  Json problems = Json::array();
  for (const auto& p : check.problems)
    problems.push_back(p);
  std::cout << Json{{"ok", check.ok()}, {"checked", check.checked}, {"problems", problems}}.dump(2) << "\n";
  return check.ok() ? 0 : fail("manifest", kExitIo, "manifest verification failed", problems);
}

int cmd_run(const std::string& sub, const Options& o)
{
  const LoadedConfig lc = load(o);
  if (!lc.ok())
    return fail("config", kExitConfig, "invalid configuration", issues_to_json(lc.issues));

  const std::string dir = output_dir(o, lc.config, sub);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    return fail("io", kExitIo, "cannot create output directory " + dir + ": " + ec.message());

  const Executor executor(o.workers);
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(sub, lc.config, dir, executor);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ManifestInput m;
  m.subcommand = sub;
  m.config = to_json(lc.config);
  m.seed = lc.config.run.seed;
  m.workers = executor.workers();
  m.wall_time_s = wall;
  m.files = r.files;
  m.results = r.results;
  m.results["n_paths"] = r.n_paths;
  m.results["n_diverged"] = r.n_diverged;
  write_manifest(dir, m);

  std::cout << Json{{"subcommand", sub}, {"output", dir}, {"files", r.files}, {"wall_time_s", wall}}.dump()
            << "\n";
  if (r.n_paths > 0 && 100 * r.n_diverged > r.n_paths)
    return fail("divergence", kExitDiverged,
                std::to_string(r.n_diverged) + " of " + std::to_string(r.n_paths) + " paths diverged",
                r.results);
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Finite-time Lyapunov analysis of generative sampling dynamics"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--workers", o.workers, "Worker threads (0: hardware concurrency)");
  app.add_option("--out", o.out, "Output directory (default: $LYAPFLOW_OUT/<subcommand>)");
  app.add_option("--set", o.overrides, "Dotted-path override key=value (repeatable)")->take_all();

  std::vector<std::string> runs = experiment_names();
  for (const std::string& name : runs)
    app.add_subcommand(name, "Run the " + name + " experiment")->fallthrough();
  app.add_subcommand("validate", "Check a config and print the issue report")->fallthrough();
  auto* verify = app.add_subcommand("verify-manifest", "Re-check checksums listed in a manifest")->fallthrough();
  verify->add_option("dir", o.manifest_dir, "Output directory holding manifest.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", kExitConfig, e.what());
  }
  if (*seed_opt)
    o.seed = seed;

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "validate")
      return cmd_validate(o);
    if (sub == "verify-manifest")
      return cmd_verify(o);
    return cmd_run(sub, o);
  } catch (const ConfigError& e) {
    return fail("config", kExitConfig, e.what());
  } catch (const IoError& e) {
    return fail("io", kExitIo, e.what());
  } catch (const std::exception& e) {
    return fail("runtime", kExitRuntime, e.what());
  }
}
