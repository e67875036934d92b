#pragma once

#include <cmath>
#include <limits>

namespace dam {

enum class Sign : int { Negative = -1, Zero = 0, Positive = 1 };

[[nodiscard]] constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }
[[nodiscard]] constexpr Sign sign_of(long long v) noexcept {
  return v > 0 ? Sign::Positive : (v < 0 ? Sign::Negative : Sign::Zero);
}
[[nodiscard]] constexpr Sign operator-(Sign s) noexcept { return static_cast<Sign>(-static_cast<int>(s)); }
[[nodiscard]] constexpr Sign operator*(Sign a, Sign b) noexcept {
  return static_cast<Sign>(static_cast<int>(a) * static_cast<int>(b));
}

/// Extended-range real: exact sign plus natural log of the magnitude.
/// Zero carries log_abs = -inf.
struct SignedLog {
  Sign sign = Sign::Zero;
  double log_abs = -std::numeric_limits<double>::infinity();

  [[nodiscard]] static SignedLog zero() noexcept { return {}; }
  [[nodiscard]] static SignedLog from_double(double v) noexcept {
    if (v == 0.0) return {};
    return {v > 0 ? Sign::Positive : Sign::Negative, std::log(std::fabs(v))};
  }
  /// Overflows to +-inf past ~e^709.
  [[nodiscard]] double to_double() const noexcept {
    return sign == Sign::Zero ? 0.0 : to_int(sign) * std::exp(log_abs);
  }

  friend bool operator==(const SignedLog&, const SignedLog&) = default;
};

}  // namespace dam
