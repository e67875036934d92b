#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace dam::theory {

// Closed-form capacity quantities. All logarithms are natural.

/// Cramer rate of fair +-1 sums: I(x) = ((1+x) log(1+x) + (1-x) log(1-x)) / 2,
/// with 0 log 0 = 0, so I(+-1) = log 2. Throws std::invalid_argument for |x| > 1.
[[nodiscard]] double entropy_I(double x);

/// Largest exponential load rate that still corrects rho*N random errors: I(1 - 2 rho) / 2.
/// Domain 0 <= rho < 1/2.
[[nodiscard]] double alpha_star(double rho);

/// (2l - 1)!!, the 2l-th moment of a standard normal. l >= 1; throws std::overflow_error past l = 17.
[[nodiscard]] std::uint64_t gaussian_even_moment(unsigned l);

/// c_n = 2 (2n - 3)!!, the polynomial-model capacity constant. n >= 2; n <= 18.
[[nodiscard]] std::uint64_t c_n(unsigned n);

/// N^(n-1) / (c log N). Requires N >= 2, n >= 2, c > 0.
[[nodiscard]] double polynomial_capacity(double n_neurons, unsigned n, double c);

/// Pattern count for an exponential load: round(exp(alpha N)) + 1.
[[nodiscard]] std::uint64_t patterns_for_alpha(double alpha, std::size_t n_neurons);
/// Inverse of the above before rounding: log(M - 1) / N. M = 1 gives -inf.
[[nodiscard]] double alpha_for_patterns(std::uint64_t n_patterns, std::size_t n_neurons);

/// exp(-m eps^2 / (2 (p + eps))) >= P(Bin(m, p) >= m (p + eps)).
/// Requires m >= 1, 0 <= p <= 1, eps > 0, p + eps <= 1.
[[nodiscard]] double binomial_tail_bound(std::uint64_t m, double p, double eps);

/// exp(-m I(x)) >= P(S_m >= m x) for a sum of m fair +-1 variables, x in (0, 1).
[[nodiscard]] double rademacher_tail_bound(std::uint64_t m, double x);

/// P(Bin(m, p) >= k), summed term by term in log space.
[[nodiscard]] double binomial_tail(std::uint64_t m, double p, std::uint64_t k);

/// P(S_m >= m x) for fair +-1 summands; a threshold within 1e-12 relative of an
/// attainable value counts as attained.
[[nodiscard]] double rademacher_tail(std::uint64_t m, double x);

/// -(1/m) log P(S_m >= m x); tends to I(x) as m grows.
[[nodiscard]] double rademacher_rate(std::uint64_t m, double x);

struct ThresholdReport {
  double rho = 0.0;
  double alpha_star = 0.0;
  std::optional<std::size_t> n_neurons;
  std::optional<double> alpha;   ///< load used for m_max; alpha_star when not given
  std::optional<double> m_max;   ///< exp(alpha N), needs n_neurons
  std::optional<unsigned> n_degree;
  std::optional<std::uint64_t> c_n;
  std::optional<double> polynomial_capacity;  ///< N^(n-1) / (c_n log N), needs n_neurons and n_degree
};

[[nodiscard]] ThresholdReport threshold_report(double rho, std::optional<std::size_t> n_neurons = std::nullopt,
                                               std::optional<double> alpha = std::nullopt,
                                               std::optional<unsigned> n_degree = std::nullopt);

}  // namespace dam::theory
