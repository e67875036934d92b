#include "dam/exp_sum.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace dam {

namespace {

std::atomic<std::uint64_t> g_fallbacks{0};

template <unsigned Bits>
using BinFloat = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Bits>>;

// Returns Zero if the high-precision sum still cannot be separated from zero.
template <unsigned Bits>
SignedLog evaluate_wide(std::span<const std::int64_t> coeffs, std::size_t top, std::int64_t top_exponent) {
  using Float = BinFloat<Bits>;
  const Float e = boost::multiprecision::exp(Float(1));
  const Float inv_e = 1 / e;
  Float sum = 0;
  Float abs_sum = 0;
  Float power = 1;  // e^(k - top)
  for (std::size_t k = top + 1; k-- > 0;) {
    if (coeffs[k] != 0) {
      const Float term = Float(coeffs[k]) * power;
      sum += term;
      abs_sum += boost::multiprecision::abs(term);
    }
    power *= inv_e;
  }
  // Each of the (top + 1) products and sums loses at most a few ulps.
  const Float bound = abs_sum * Float(4 * (top + 2)) * std::numeric_limits<Float>::epsilon();
  if (boost::multiprecision::abs(sum) <= bound) return SignedLog::zero();
  const double log_abs = static_cast<double>(boost::multiprecision::log(boost::multiprecision::abs(sum))) +
                         static_cast<double>(top_exponent);
  return {sum > 0 ? Sign::Positive : Sign::Negative, log_abs};
}

}  // namespace

SignedLog signed_exp_sum(std::span<const std::int64_t> coeffs, std::int64_t exponent_offset) {
  std::size_t top = coeffs.size();
  for (std::size_t k = coeffs.size(); k-- > 0;) {
    if (coeffs[k] != 0) {
      top = k;
      break;
    }
  }
  if (top == coeffs.size()) return SignedLog::zero();
  const std::int64_t top_exponent = static_cast<std::int64_t>(top) + exponent_offset;

  double sum = 0.0;
  double abs_sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t k = 0; k <= top; ++k) {
    if (coeffs[k] == 0) continue;
    const double scaled = static_cast<double>(coeffs[k]) * std::exp(static_cast<double>(k) - static_cast<double>(top));
    sum += scaled;
    abs_sum += std::fabs(scaled);
    ++terms;
  }
  // exp() is faithful to within 1 ulp, the int->double conversion is exact below 2^53
  // and each addition adds one rounding; underflowed terms contribute at most DBL_MIN each.
  const double eps = std::numeric_limits<double>::epsilon();
  const double bound = abs_sum * eps * static_cast<double>(4 * (terms + 2)) +
                       static_cast<double>(terms) * std::numeric_limits<double>::min();
  // Demand a margin so log_abs is good to ~1e-6 as well, not just the sign.
  if (std::fabs(sum) > 1e6 * bound) {
    return {sum > 0 ? Sign::Positive : Sign::Negative, std::log(std::fabs(sum)) + static_cast<double>(top_exponent)};
  }

  g_fallbacks.fetch_add(1, std::memory_order_relaxed);
  if (auto r = evaluate_wide<256>(coeffs, top, top_exponent); r.sign != Sign::Zero) return r;
  if (auto r = evaluate_wide<1024>(coeffs, top, top_exponent); r.sign != Sign::Zero) return r;
  throw std::runtime_error("signed_exp_sum: cancellation beyond 1024-bit precision");
}

std::uint64_t exp_sum_fallback_count() noexcept { return g_fallbacks.load(std::memory_order_relaxed); }

}  // namespace dam
