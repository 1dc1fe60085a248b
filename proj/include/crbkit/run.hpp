#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crbkit/matlin.hpp"

namespace crbkit {

inline constexpr const char* kVersion = "1.0.0";

/// Settings for one analyze / certify / experiment run. Populated from a flat
/// `key = value` file and/or individual overrides; the same format is written
/// back as the run manifest, so a manifest can be fed in as a config.
struct RunConfig {
  std::string command;
  std::optional<std::filesystem::path> input;  // matx FIM
  std::optional<std::string> model;            // blind_channel | linear_gaussian
  Eigen::Index s_len = 3;
  Eigen::Index h_len = 3;
  double noise_var = 1.0;
  std::optional<std::filesystem::path> design;  // matx, linear_gaussian only
  std::optional<Vector> theta;                  // else drawn from seed (models) or zero
  std::uint64_t seed = 0;
  std::optional<std::size_t> count;
  std::size_t samples = 0;
  std::filesystem::path out = "crbkit-out";
  Tolerances tol;
  bool force_optimal = false;
  unsigned workers = 1;

  /// Applies one key/value; throws InvalidInput on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void load(const std::filesystem::path& path);
  void validate() const;
  /// Every setting as key/value text, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidInput = 2,
  kExitNumerical = 3,
  kExitCertificateFailed = 4,
};

struct RunResult {
  int exit_code = kExitOk;
  /// Human-readable summary (also the error message on failure).
  std::string summary;
  std::vector<std::filesystem::path> files;
};

/// Dispatches on config.command. Never throws for expected failures; those
/// are reported through exit_code with the failing stage named in summary.
RunResult run_command(const RunConfig& config);

RunResult cmd_analyze(const RunConfig& config);
RunResult cmd_certify(const RunConfig& config);
RunResult cmd_experiment(const RunConfig& config);

}  // namespace crbkit
