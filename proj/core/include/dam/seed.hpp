#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace dam {

/// SplitMix64 output finalizer (Steele, Lea, Flood 2014). Bijective on 64 bits.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a over the bytes of a purpose tag.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Names one random stream: (master seed, purpose tag, index).
///
/// The derived 64-bit seed is
///   splitmix64(splitmix64(splitmix64(master) ^ fnv1a64(purpose)) ^ index)
/// and nothing else, so any stream can be regenerated from its label alone,
/// independent of which thread or in which order it is consumed. For fixed
/// (master, purpose) the map index -> seed is a bijection.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::string purpose;
  std::uint64_t index = 0;

  [[nodiscard]] std::uint64_t derive() const noexcept {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ fnv1a64(purpose)) ^ index);
  }

  /// A sub-stream whose master is this stream's derived seed.
  [[nodiscard]] SeedSpec child(std::string child_purpose, std::uint64_t child_index = 0) const {
    return SeedSpec{derive(), std::move(child_purpose), child_index};
  }

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Portable random source. std::mt19937_64 is bit-exact across standard
/// libraries; the standard distributions are not, so bounded draws are done
/// here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const SeedSpec& spec) : engine_(spec.derive()) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dam
