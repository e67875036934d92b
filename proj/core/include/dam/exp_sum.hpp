#pragma once

#include <cstdint>
#include <span>

#include "dam/signed_log.hpp"

namespace dam {

/// Evaluates sum_k coeffs[k] * e^(k + exponent_offset) for integer coefficients.
///
/// The sign is exact. Since e is transcendental the sum vanishes only when every
/// coefficient is zero, which is checked directly. Otherwise the terms are summed
/// in double after shifting by the largest exponent with a nonzero coefficient;
/// unless the result clears the rounding error bound by a factor of 1e6 the evaluation is
/// repeated in 256-bit (then 1024-bit) binary floating point.
[[nodiscard]] SignedLog signed_exp_sum(std::span<const std::int64_t> coeffs, std::int64_t exponent_offset);

/// Counters for how often the multiprecision fallback ran (process-wide, for benchmarks/tests).
[[nodiscard]] std::uint64_t exp_sum_fallback_count() noexcept;

}  // namespace dam
