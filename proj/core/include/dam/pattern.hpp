#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dam/seed.hpp"

namespace dam {

// Spins are stored one bit each, bit set <=> +1. Words are little-endian in
// neuron index: neuron i lives in word i / 64, bit i % 64. Bits past the last
// neuron are always zero so popcounts over whole words are exact.

[[nodiscard]] constexpr std::size_t words_for(std::size_t n_neurons) noexcept {
  return (n_neurons + 63) / 64;
}

/// Non-owning read-only view of a packed +-1 vector.
class PatternView {
 public:
  PatternView(std::size_t n_neurons, std::span<const std::uint64_t> words) noexcept
      : n_(n_neurons), words_(words) {}

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

  [[nodiscard]] bool bit(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  [[nodiscard]] int spin(std::size_t i) const noexcept { return bit(i) ? 1 : -1; }
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return spin(i); }

 private:
  std::size_t n_;
  std::span<const std::uint64_t> words_;
};

/// An owning length-N configuration in {-1,+1}^N.
class Pattern {
 public:
  /// All spins +1.
  explicit Pattern(std::size_t n_neurons);
  explicit Pattern(PatternView view);

  /// Throws std::invalid_argument if any entry is not exactly -1 or +1.
  static Pattern from_spins(std::span<const int> spins);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] PatternView view() const noexcept { return {n_, words_}; }
  operator PatternView() const noexcept { return view(); }  // NOLINT(google-explicit-constructor)

  [[nodiscard]] bool bit(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  [[nodiscard]] int spin(std::size_t i) const noexcept { return bit(i) ? 1 : -1; }
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return spin(i); }

  /// Checked accessor and mutators.
  [[nodiscard]] int at(std::size_t i) const;
  void set(std::size_t i, int value);
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  [[nodiscard]] Pattern negated() const;
  [[nodiscard]] std::vector<int> to_spins() const;

  friend bool operator==(const Pattern&, const Pattern&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

/// M patterns of common length N, stored row-major in one contiguous block.
class PatternStore {
 public:
  /// Throws std::invalid_argument if empty or lengths differ.
  explicit PatternStore(std::span<const Pattern> patterns);
  /// Takes ownership of packed rows; words.size() must be n_patterns * words_for(n_neurons)
  /// with clear tail bits.
  PatternStore(std::size_t n_neurons, std::size_t n_patterns, std::vector<std::uint64_t> words);

  [[nodiscard]] std::size_t n_neurons() const noexcept { return n_; }
  [[nodiscard]] std::size_t n_patterns() const noexcept { return m_; }
  [[nodiscard]] std::size_t words_per_pattern() const noexcept { return stride_; }

  [[nodiscard]] PatternView operator[](std::size_t mu) const noexcept {
    return {n_, std::span<const std::uint64_t>(words_).subspan(mu * stride_, stride_)};
  }
  [[nodiscard]] PatternView at(std::size_t mu) const;
  [[nodiscard]] bool bit(std::size_t mu, std::size_t i) const noexcept {
    return (words_[mu * stride_ + (i >> 6)] >> (i & 63)) & 1U;
  }

  /// <xi^mu, sigma> for every stored pattern.
  [[nodiscard]] std::vector<std::int32_t> overlaps_with(PatternView sigma) const;

  friend bool operator==(const PatternStore&, const PatternStore&) = default;

 private:
  std::size_t n_;
  std::size_t m_;
  std::size_t stride_;
  std::vector<std::uint64_t> words_;
};

/// sum_i a_i b_i, computed as N - 2 * popcount(a xor b). Throws on length mismatch.
[[nodiscard]] std::int64_t overlap(PatternView a, PatternView b);

/// Number of differing positions; equals (N - overlap(a, b)) / 2.
[[nodiscard]] std::size_t hamming_distance(PatternView a, PatternView b);

/// M i.i.d. uniform patterns. Bit-identical for equal seeds.
[[nodiscard]] PatternStore generate_patterns(std::size_t n_neurons, std::size_t n_patterns,
                                             const SeedSpec& seed);

/// Flips exactly n_flips positions chosen uniformly among all C(N, n_flips) subsets.
[[nodiscard]] Pattern corrupt_on_sphere(PatternView pattern, std::size_t n_flips, const SeedSpec& seed);

/// Uniform draw from the Hamming ball of radius max_flips: the radius k is drawn with
/// probability C(N,k)/|B|, then a uniform k-subset is flipped.
[[nodiscard]] Pattern corrupt_in_ball(PatternView pattern, std::size_t max_flips, const SeedSpec& seed);

/// Same samplers on a caller-provided generator, for composing several draws on one stream.
[[nodiscard]] Pattern corrupt_on_sphere(PatternView pattern, std::size_t n_flips, Rng& rng);
[[nodiscard]] Pattern corrupt_in_ball(PatternView pattern, std::size_t max_flips, Rng& rng);

}  // namespace dam
