#include "lyapflow/manifest.hpp"

#include <filesystem>

#include <Eigen/Core>
#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "lyapflow/csv.hpp"
#include "lyapflow/error.hpp"

namespace lyapflow {

std::string sha256_hex(const std::string& bytes)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::string& path)
{
  return sha256_hex(read_text_file(path));
}

Json version_info()
{
  return {{"lyapflow", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
          {"openssl", OpenSSL_version(OPENSSL_VERSION)},
          {"compiler", __VERSION__}};
}

void write_manifest(const std::string& dir, const ManifestInput& in)
{
  namespace fs = std::filesystem;
  Json files = Json::array();
  for (const std::string& name : in.files) {
    const std::string body = read_text_file((fs::path(dir) / name).string());
    files.push_back({{"name", name}, {"bytes", body.size()}, {"sha256", sha256_hex(body)}});
  }
  Json m = {{"subcommand", in.subcommand},
            {"seed", in.seed},
            {"workers", in.workers},
            {"wall_time_s", in.wall_time_s},
            {"versions", version_info()},
            {"config_sha256", sha256_hex(in.config.dump())},
            {"config", in.config},
            {"results", in.results},
            {"files", files}};
  write_text_file((fs::path(dir) / kManifestName).string(), m.dump(2) + "\n");
}

ManifestCheck verify_manifest(const std::string& dir)
{
  namespace fs = std::filesystem;
  const Json m = Json::parse(read_text_file((fs::path(dir) / kManifestName).string()), nullptr, false);
  if (m.is_discarded() || !m.contains("files") || !m.at("files").is_array())
    throw IoError("manifest in " + dir + " is malformed");
  ManifestCheck out;
  for (const Json& f : m.at("files")) {
    const std::string name = f.value("name", "");
    const fs::path p = fs::path(dir) / name;
    ++out.checked;
    if (!fs::exists(p)) {
      out.problems.push_back(name + ": missing");
      continue;
    }
    const std::string body = read_text_file(p.string());
    if (body.size() != f.value("bytes", std::size_t{0}))
      out.problems.push_back(name + ": size changed");
    else if (sha256_hex(body) != f.value("sha256", ""))
      out.problems.push_back(name + ": checksum mismatch");
  }
  if (m.contains("config") && m.contains("config_sha256") &&
      sha256_hex(m.at("config").dump()) != m.at("config_sha256").get<std::string>())
    out.problems.push_back("config: checksum mismatch");
  return out;
}

} // namespace lyapflow
