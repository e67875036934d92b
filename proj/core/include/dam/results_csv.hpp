#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "dam/experiments.hpp"

namespace dam {

inline constexpr std::string_view kSweepCsvHeader =
    "model,n,N,M,alpha,rho,n_flips,scheduler,trials,successes,wilson_low,wilson_high,"
    "mean_residual_fraction,alpha_star,seed";

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan" otherwise.
[[nodiscard]] std::string format_double(double v);

/// One CSV row (no trailing newline). The n column is the degree for polynomial and
/// power models, 2 for classical, empty for exponential.
[[nodiscard]] std::string sweep_csv_row(const SweepResult& r);

void write_sweep_csv(std::ostream& out, std::span<const SweepResult> results, bool header = true);

}  // namespace dam
