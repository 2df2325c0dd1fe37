#pragma once

#include <string>
#include <vector>

#include "lyapflow/config.hpp"

namespace lyapflow {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestInput
{
  std::string subcommand;
  Json config;     ///< resolved config
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double wall_time_s = 0.0;
  std::vector<std::string> files; ///< names relative to the output directory
  Json results = Json::object();
};

/// Library, Eigen, OpenSSL and compiler versions.
Json version_info();

/// Writes manifest.json into `dir` with a checksum per listed file.
void write_manifest(const std::string& dir, const ManifestInput& in);

struct ManifestCheck
{
  std::size_t checked = 0;
  std::vector<std::string> problems; ///< one line per missing or altered file
  bool ok() const { return problems.empty(); }
};

ManifestCheck verify_manifest(const std::string& dir);

} // namespace lyapflow
