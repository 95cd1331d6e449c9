#include <openssl/evp.h>
#include <openssl/opensslv.h>
#include <fftw3.h>
#include <Eigen/Core>
#include <spdlog/version.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "neklab/cli/cli.hpp"

namespace neklab::cli {

namespace fs = std::filesystem;
using core::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

void write_artifacts(const ExperimentConfig& cfg, const RunResult& result, double wall_time) {
  fs::create_directories(cfg.output);
  json files = json::array();
  for (const auto& [name, content] : result.files) {
    std::ofstream out(fs::path(cfg.output) / name, std::ios::binary);
    out << content;
    if (!out) throw Error("cannot write " + name);
    files.push_back(json{{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  json versions;
  versions["neklab"] = kVersion;
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["fftw"] = std::string(fftw_version);
  versions["openssl"] = std::string(OPENSSL_VERSION_TEXT);
  versions["spdlog"] = std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                       std::to_string(SPDLOG_VER_PATCH);
  json manifest{
      {"tool", "neklab"},
      {"version", kVersion},
      {"schema_version", kSchemaVersion},
      {"subcommand", cfg.subcommand},
      {"exit_code", result.exit_code},
      {"message", result.message},
      {"config", cfg.to_json()},
      {"seeds", {{"seed", cfg.seed}}},
      {"threads", cfg.threads},
      {"versions", versions},
      {"wall_time_secs", wall_time},
      {"files", files}};
  std::ofstream out(fs::path(cfg.output) / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("cannot write manifest.json");
}

}  // namespace neklab::cli
