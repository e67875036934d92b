#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dam/experiments.hpp"

namespace dam::cli {

/// Environment variable that overrides the master seed of config files.
inline constexpr const char* kSeedEnvVar = "DAM_MASTER_SEED";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInterrupted = 130;

/// A fully expanded sweep configuration.
struct SweepConfig {
  std::uint64_t master_seed = 0;
  std::size_t trials = 100;
  std::size_t parallelism = 1;
  std::string output;    ///< empty: stdout
  std::string format = "csv";
  std::string manifest;  ///< empty: <output>.manifest.json when output is a file
  std::vector<TrialSpec> points;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// std::invalid_argument naming the offending key.
[[nodiscard]] SweepConfig parse_sweep_config(const nlohmann::json& config);

/// One grid point from a JSON object (keys: model [exponential], degree, N, M | alpha | alpha_factor,
/// rho | n_flips, scheduler, max_passes, tie_policy, target, corruption, zero_diagonal).
[[nodiscard]] TrialSpec parse_point(const nlohmann::json& point, const std::string& where);

[[nodiscard]] nlohmann::json to_json(const TrialSpec& spec);
[[nodiscard]] nlohmann::json to_json(const SweepResult& result);

/// Entry point shared by main() and the tests. args[0] is the program name.
/// cancel, when given, interrupts a running sweep.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* cancel = nullptr);

}  // namespace dam::cli
