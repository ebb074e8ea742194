#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specband/config.hpp"

namespace specband::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

inline constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& subcommands();

/// Write `content` to `path` via a temporary file in the same directory
/// and a rename, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Files produced by one subcommand run, in emission order.
struct RunArtifacts {
  std::filesystem::path directory;
  std::vector<std::string> files;
  nlohmann::json summary;
  nlohmann::json derived;  // constants the results depend on
  bool checks_ok = true;   // only meaningful for verify
};

/// Run one subcommand on a resolved config. Output goes to `out`
/// (created if missing), followed by manifest.json.
RunArtifacts run(const std::string& subcommand, const RunConfig& config, const std::filesystem::path& out,
                 int workers);

/// argv entry point; returns the process exit status.
int main(int argc, char** argv);

/// Bundled config used by `verify` when no --config is given.
std::string default_reference_config();

}  // namespace specband::cli
