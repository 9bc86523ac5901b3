#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "solscale/error.hpp"

namespace solscale {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 64;

// Command-line values that override config fields of the same name.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> radius;
  std::optional<double> tol;
  std::optional<int> threads;
};

struct RunOutcome {
  int exit_code = kExitPass;
  std::string status;  // PASS, FAIL, INCONCLUSIVE, or a non-scaling verdict
  std::vector<std::filesystem::path> files;
};

// net-check, folner, growth, scaling, non-scaling, glued-check, drift.
const std::vector<std::string>& subcommands();

// Runs one experiment from a JSON config and writes <sub>.csv (or several CSVs) and summary.json
// into out_dir. Throws ConfigError for malformed configs or unknown subcommands.
RunOutcome run_experiment(const std::string& subcommand, const std::string& config_json,
                          const std::filesystem::path& out_dir, const CliOverrides& overrides = {});

}  // namespace solscale
