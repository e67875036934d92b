#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "dam/dynamics.hpp"
#include "dam/seed.hpp"
#include "dam/stats.hpp"

namespace dam {

enum class SchedulerKind {
  SyncOneStep,   ///< every neuron decided once from the corrupted input
  AsyncOnePass,  ///< one asynchronous pass in random order
  ToFixedPoint,  ///< asynchronous random-order passes until stable or max_passes
};

struct SchedulerSpec {
  SchedulerKind kind = SchedulerKind::SyncOneStep;
  std::size_t max_passes = 100;

  friend bool operator==(const SchedulerSpec&, const SchedulerSpec&) = default;
};

enum class Corruption { Sphere, Ball };

struct Target {
  bool all_patterns = false;
  std::size_t index = 0;

  static Target fixed(std::size_t mu) { return {false, mu}; }
  static Target all() { return {true, 0}; }

  friend bool operator==(const Target&, const Target&) = default;
};

[[nodiscard]] std::string_view to_string(SchedulerKind kind) noexcept;
/// "sync", "async", "fixed_point".
[[nodiscard]] SchedulerKind parse_scheduler(std::string_view name);
[[nodiscard]] std::string_view to_string(Corruption c) noexcept;
[[nodiscard]] Corruption parse_corruption(std::string_view name);

struct TrialSpec {
  ModelSpec model;
  std::size_t n_neurons = 0;
  std::size_t n_patterns = 1;
  std::size_t n_flips = 0;  ///< sphere radius, or ball radius for Corruption::Ball
  Corruption corruption = Corruption::Sphere;
  SchedulerSpec scheduler;
  SeedSpec seed;
  Target target;

  /// Throws std::invalid_argument on N = 0, M = 0, n_flips > N, bad target or model.
  void validate() const;
  [[nodiscard]] double rho() const noexcept {
    return static_cast<double>(n_flips) / static_cast<double>(n_neurons);
  }

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

struct TrialResult {
  bool success = false;  ///< n_wrong_bits_after == 0
  std::size_t n_wrong_bits_after = 0;
  std::size_t ties_seen = 0;
  // Exponential model only, evaluated on the corrupted input against its target:
  // the neuron with the largest log|E_noise| - log|E_signal|.
  double signal_magnitude_log = -std::numeric_limits<double>::infinity();
  double noise_magnitude_log = -std::numeric_limits<double>::infinity();
  std::size_t noise_dominated_neurons = 0;  ///< neurons with |E_noise| >= |E_signal|
  std::size_t first_step_errors = 0;        ///< neurons decided wrongly from the corrupted input
  std::size_t audit_violations = 0;         ///< wrong decisions without noise dominance
  std::chrono::nanoseconds wall_time{0};

  /// Equality of every field except wall_time.
  [[nodiscard]] bool same_outcome(const TrialResult& other) const noexcept;
};

/// Generates the store, corrupts the target(s), runs the scheduler and compares
/// bit-exactly to the uncorrupted target. Pure function of spec (except wall_time).
[[nodiscard]] TrialResult run_trial(const TrialSpec& spec);

struct SweepResult {
  TrialSpec point;
  std::size_t point_index = 0;
  std::uint64_t master_seed = 0;
  std::size_t n_trials = 0;
  std::size_t n_success = 0;
  Interval wilson;
  double alpha = 0.0;       ///< log(M - 1) / N
  double rho = 0.0;         ///< n_flips / N actually used
  double alpha_star = 0.0;  ///< alpha_star(rho), NaN when rho >= 1/2
  /// alpha_star for exponential points, N^(n-1)/(c_n log N) for polynomial/power,
  /// N/(2 log N) for classical.
  double theory_overlay = 0.0;
  double mean_residual_fraction = 0.0;
  std::size_t total_ties = 0;
  std::size_t noise_dominated_trials = 0;
  std::size_t audit_violations = 0;

  [[nodiscard]] double success_rate() const noexcept {
    return n_trials == 0 ? 0.0 : static_cast<double>(n_success) / static_cast<double>(n_trials);
  }
};

struct SweepOptions {
  std::uint64_t master_seed = 0;
  std::size_t n_trials = 1;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t parallelism = 1;
  /// Checked between trials; when set, unfinished points are dropped.
  const std::atomic<bool>* cancel = nullptr;
  /// Called once per finished point, in grid order, serialized.
  std::function<void(const SweepResult&)> on_point;
};

/// Seed of trial t at grid point p: (master, "point:<p>", t).
[[nodiscard]] SeedSpec trial_seed(std::uint64_t master_seed, std::size_t point_index, std::size_t trial_index);

/// Runs n_trials per grid point. The seed field of each grid entry is ignored.
/// Output depends only on (grid, master_seed, n_trials), never on parallelism.
/// Returns the completed prefix of the grid (all of it unless cancelled).
[[nodiscard]] std::vector<SweepResult> run_sweep(std::span<const TrialSpec> grid, const SweepOptions& options);

/// Residual-error measurement: forces the ToFixedPoint scheduler and reports the mean
/// of n_wrong_bits_after / N alongside the all-or-nothing success count.
[[nodiscard]] SweepResult error_fraction_experiment(TrialSpec spec, std::size_t n_trials,
                                                    std::size_t parallelism = 1, std::uint64_t master_seed = 0);

struct SignalNoiseRecord {
  std::size_t target = 0;
  std::size_t neuron = 0;
  double log_signal = 0.0;
  double log_noise = -std::numeric_limits<double>::infinity();  ///< -inf when E_noise = 0
  bool noise_dominates = false;
  bool corrupted = false;         ///< neuron was flipped by the corruption
  bool decided_correctly = true;  ///< one-step decision equals the target bit
};

/// Per-neuron signal/noise split of Delta_i E on the corrupted input(s) of a trial,
/// drawn from the same streams as run_trial. Exponential model only; throws
/// std::invalid_argument otherwise, std::logic_error if |E_signal| falls below
/// e^{N(1-2 rho)} (1 - e^{-2}).
[[nodiscard]] std::vector<SignalNoiseRecord> signal_noise_profile(const TrialSpec& spec);

}  // namespace dam
