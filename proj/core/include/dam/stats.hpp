#pragma once

#include <cstdint>

namespace dam {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Two-sided 97.5% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
/// trials must be positive.
[[nodiscard]] Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

/// True when the two intervals share no point.
[[nodiscard]] bool disjoint(const Interval& a, const Interval& b) noexcept;

}  // namespace dam
