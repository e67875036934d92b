#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dam/pattern.hpp"
#include "dam/seed.hpp"
#include "dam/signed_log.hpp"

namespace dam {

enum class ModelKind {
  Classical,         ///< sgn(sum_j J_ij sigma_j), J_ij = sum_mu xi_i xi_j
  Polynomial,        ///< n-spin rule: sgn(sum_mu xi_i^mu <xi^mu, sigma>^(n-1))
  Exponential,       ///< generalized rule with F(x) = e^x
  PowerInteraction,  ///< generalized rule with F(x) = x^n (self term excluded)
};

enum class TiePolicy { KeepCurrent, PlusOne };

struct ModelSpec {
  ModelKind kind = ModelKind::Classical;
  unsigned degree = 2;  ///< Polynomial and PowerInteraction only; >= 2.
  TiePolicy tie_policy = TiePolicy::KeepCurrent;
  /// Classical only: drop the j = i term (J_ii = M) from the local field.
  bool zero_diagonal = false;

  static ModelSpec classical(TiePolicy ties = TiePolicy::KeepCurrent) { return {ModelKind::Classical, 2, ties}; }
  static ModelSpec polynomial(unsigned n, TiePolicy ties = TiePolicy::KeepCurrent) {
    return {ModelKind::Polynomial, n, ties};
  }
  static ModelSpec exponential(TiePolicy ties = TiePolicy::KeepCurrent) { return {ModelKind::Exponential, 2, ties}; }
  static ModelSpec power_interaction(unsigned n, TiePolicy ties = TiePolicy::KeepCurrent) {
    return {ModelKind::PowerInteraction, n, ties};
  }

  /// Throws std::invalid_argument when degree < 2 for a degree-carrying kind.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
[[nodiscard]] std::string_view to_string(TiePolicy policy) noexcept;
/// Accepts "classical", "polynomial", "exponential", "power". Throws std::invalid_argument.
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);
/// Accepts "keep" and "plus_one". Throws std::invalid_argument.
[[nodiscard]] TiePolicy parse_tie_policy(std::string_view name);

/// Configuration sigma bound to a pattern store, with the overlaps <xi^mu, sigma>
/// kept exact under every flip. The store must outlive the state.
class NetworkState {
 public:
  NetworkState(const PatternStore& store, Pattern sigma, std::optional<std::size_t> reference = std::nullopt);

  [[nodiscard]] const PatternStore& store() const noexcept { return *store_; }
  [[nodiscard]] const Pattern& sigma() const noexcept { return sigma_; }
  [[nodiscard]] std::span<const std::int32_t> overlaps() const noexcept { return overlaps_; }
  [[nodiscard]] std::size_t n_neurons() const noexcept { return sigma_.size(); }
  [[nodiscard]] std::size_t n_patterns() const noexcept { return overlaps_.size(); }

  /// Pattern whose mu-term is reported as the signal in exponential decisions.
  [[nodiscard]] std::optional<std::size_t> reference() const noexcept { return reference_; }
  void set_reference(std::optional<std::size_t> reference);

  [[nodiscard]] std::size_t tie_count() const noexcept { return tie_count_; }
  void add_ties(std::size_t n) noexcept { tie_count_ += n; }

  /// Flips sigma_i and patches every overlap: o^mu += 2 * new_value * xi_i^mu.
  void flip(std::size_t i);
  /// Replaces the configuration and rebuilds the overlap cache.
  void assign(Pattern sigma);

  /// Full recomputation check of the overlap cache.
  [[nodiscard]] bool overlaps_consistent() const;

 private:
  const PatternStore* store_;
  Pattern sigma_;
  std::vector<std::int32_t> overlaps_;
  std::optional<std::size_t> reference_;
  std::size_t tie_count_ = 0;
};

struct UpdateDecision {
  std::size_t neuron = 0;
  int new_value = 1;
  /// Sign of the margin for keeping sigma_i: sigma_i * field for Classical, Polynomial
  /// and PowerInteraction; Delta_i E for Exponential. Negative means flip.
  Sign delta_sign = Sign::Zero;
  /// Exponential model with a reference pattern: the reference term of Delta_i E and
  /// the sum of all other terms. Zero otherwise.
  SignedLog signal;
  SignedLog noise;
  /// |noise| >= |signal|, evaluated exactly. False without a reference.
  bool noise_dominates = false;

  friend bool operator==(const UpdateDecision&, const UpdateDecision&) = default;
};

/// sum_j J_ij sigma_j including j = i, as sum_mu xi_i^mu <xi^mu, sigma>. Exact.
[[nodiscard]] std::int64_t classical_local_field(const NetworkState& state, std::size_t i);

/// sum_mu xi_i^mu <xi^mu, sigma>^(n-1): the n-spin tensor contraction scaled by N^(n-1).
/// Accumulated in 128-bit integers when the magnitude provably fits, else in
/// arbitrary precision, so the sign is exact.
[[nodiscard]] SignedLog nspin_local_field(const NetworkState& state, std::size_t i, unsigned n);

/// Argument of the generalized rule with F(x) = x^n:
///   sum_mu (xi_i^mu + r_mu)^n - (-xi_i^mu + r_mu)^n,  r_mu = sum_{j != i} xi_j^mu sigma_j.
[[nodiscard]] SignedLog power_interaction_field(const NetworkState& state, std::size_t i, unsigned n);

/// Delta_i E(sigma) for F = exp, via
///   Delta_i E = 2 sinh(1) sum_mu s_mu exp(<xi^mu, sigma> - s_mu),  s_mu = sigma_i xi_i^mu.
/// Exact sign; log magnitude is meaningful when the sign is nonzero.
[[nodiscard]] SignedLog exp_delta_energy(const NetworkState& state, std::size_t i);

struct SignalNoise {
  SignedLog signal;
  SignedLog noise;
  bool noise_dominates = false;
};

/// Splits Delta_i E into the term of pattern `reference` and the rest.
[[nodiscard]] SignalNoise exp_signal_noise(const NetworkState& state, std::size_t i, std::size_t reference);

/// Read-only; safe to call concurrently for distinct or equal neurons.
[[nodiscard]] UpdateDecision decide_update(const NetworkState& state, std::size_t i, const ModelSpec& model);

/// Decides neuron i on the current configuration, applies the result and counts a tie.
UpdateDecision decide_and_apply(NetworkState& state, std::size_t i, const ModelSpec& model);

struct StepResult {
  std::size_t n_changed = 0;
  std::size_t ties = 0;
};

/// Decides every neuron from the pre-step configuration, then applies all flips.
StepResult synchronous_step(NetworkState& state, const ModelSpec& model,
                            std::vector<UpdateDecision>* decisions = nullptr);

/// One sweep over neurons 0..N-1 in order, each decision seeing earlier flips.
StepResult asynchronous_pass(NetworkState& state, const ModelSpec& model);
/// Same, in a uniformly random order drawn from rng.
StepResult asynchronous_pass(NetworkState& state, const ModelSpec& model, Rng& rng);

enum class Schedule { Synchronous, AsyncSequential, AsyncRandom };

enum class StopReason { Converged, Cycle, MaxPasses };

struct FixedPointResult {
  std::size_t passes_used = 0;
  bool converged = false;
  StopReason reason = StopReason::MaxPasses;
  std::size_t total_flips = 0;
};

[[nodiscard]] std::string_view to_string(StopReason reason) noexcept;

/// Repeats passes until one changes nothing or max_passes is reached. Synchronous
/// iteration also stops with reason Cycle when a state repeats the one two steps back.
/// AsyncRandom requires rng.
FixedPointResult run_to_fixed_point(NetworkState& state, const ModelSpec& model, Schedule schedule,
                                    std::size_t max_passes, Rng* rng = nullptr);

}  // namespace dam
