#include "dam/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dam::theory {

namespace {

// (2k - 1)!! for k >= 0, checked against 64-bit overflow.
std::uint64_t odd_double_factorial(unsigned k) {
  std::uint64_t r = 1;
  for (std::uint64_t f = 3; f <= 2ULL * k - 1 && k > 0; f += 2) {
    if (r > std::numeric_limits<std::uint64_t>::max() / f) {
      throw std::overflow_error("double factorial exceeds 64 bits");
    }
    r *= f;
  }
  return r;
}

long double log_binomial(std::uint64_t m, std::uint64_t k) {
  return std::lgamma(static_cast<long double>(m) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
         std::lgamma(static_cast<long double>(m - k) + 1);
}

}  // namespace

double entropy_I(double x) {
  if (!(std::fabs(x) <= 1.0)) throw std::invalid_argument("entropy_I: |x| must be <= 1");
  // log1p keeps full relative accuracy near x = 0.
  const double a = x == -1.0 ? 0.0 : (1.0 + x) * std::log1p(x);
  const double b = x == 1.0 ? 0.0 : (1.0 - x) * std::log1p(-x);
  return 0.5 * (a + b);
}

double alpha_star(double rho) {
  if (!(rho >= 0.0 && rho < 0.5)) throw std::invalid_argument("alpha_star: rho must lie in [0, 1/2)");
  return entropy_I(1.0 - 2.0 * rho) / 2.0;
}

std::uint64_t gaussian_even_moment(unsigned l) {
  if (l < 1) throw std::invalid_argument("gaussian_even_moment: l must be >= 1");
  return odd_double_factorial(l);
}

std::uint64_t c_n(unsigned n) {
  if (n < 2) throw std::invalid_argument("c_n: degree must be >= 2");
  // (2n - 3)!! = (2(n-1) - 1)!!
  const std::uint64_t df = odd_double_factorial(n - 1);
  if (df > std::numeric_limits<std::uint64_t>::max() / 2) throw std::overflow_error("c_n exceeds 64 bits");
  return 2 * df;
}

double polynomial_capacity(double n_neurons, unsigned n, double c) {
  if (!(n_neurons >= 2.0)) throw std::invalid_argument("polynomial_capacity: N must be >= 2");
  if (n < 2) throw std::invalid_argument("polynomial_capacity: degree must be >= 2");
  if (!(c > 0.0)) throw std::invalid_argument("polynomial_capacity: c must be positive");
  return std::pow(n_neurons, static_cast<double>(n - 1)) / (c * std::log(n_neurons));
}

std::uint64_t patterns_for_alpha(double alpha, std::size_t n_neurons) {
  if (n_neurons == 0) throw std::invalid_argument("patterns_for_alpha: N must be positive");
  const double m = std::round(std::exp(alpha * static_cast<double>(n_neurons)));
  if (!(m < 9.0e18)) throw std::overflow_error("patterns_for_alpha: pattern count exceeds 64 bits");
  return static_cast<std::uint64_t>(m) + 1;
}

double alpha_for_patterns(std::uint64_t n_patterns, std::size_t n_neurons) {
  if (n_patterns == 0 || n_neurons == 0) throw std::invalid_argument("alpha_for_patterns: M, N must be positive");
  return std::log(static_cast<double>(n_patterns - 1)) / static_cast<double>(n_neurons);
}

double binomial_tail_bound(std::uint64_t m, double p, double eps) {
  if (m < 1) throw std::invalid_argument("binomial_tail_bound: m must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_tail_bound: p must lie in [0, 1]");
  if (!(eps > 0.0)) throw std::invalid_argument("binomial_tail_bound: eps must be positive");
  if (p + eps > 1.0 + 1e-15) throw std::invalid_argument("binomial_tail_bound: p + eps must be <= 1");
  return std::exp(-static_cast<double>(m) * eps * eps / (2.0 * (p + eps)));
}

double rademacher_tail_bound(std::uint64_t m, double x) {
  if (m < 1) throw std::invalid_argument("rademacher_tail_bound: m must be >= 1");
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("rademacher_tail_bound: x must lie in (0, 1)");
  return std::exp(-static_cast<double>(m) * entropy_I(x));
}

double binomial_tail(std::uint64_t m, double p, std::uint64_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_tail: p must lie in [0, 1]");
  if (k == 0) return 1.0;
  if (k > m) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  long double sum = 0;
  for (std::uint64_t j = k; j <= m; ++j) {
    sum += std::exp(log_binomial(m, j) + static_cast<long double>(j) * lp + static_cast<long double>(m - j) * lq);
  }
  return static_cast<double>(std::min<long double>(sum, 1.0L));
}

double rademacher_tail(std::uint64_t m, double x) {
  if (m < 1) throw std::invalid_argument("rademacher_tail: m must be >= 1");
  // S_m = 2K - m with K ~ Bin(m, 1/2); S_m >= m x  <=>  K >= m (1 + x) / 2.
  const double target = static_cast<double>(m) * (1.0 + x) / 2.0;
  const double k_real = std::ceil(target - 1e-12 * std::max(1.0, std::fabs(target)));
  if (k_real <= 0.0) return 1.0;
  return binomial_tail(m, 0.5, static_cast<std::uint64_t>(k_real));
}

double rademacher_rate(std::uint64_t m, double x) {
  return -std::log(rademacher_tail(m, x)) / static_cast<double>(m);
}

ThresholdReport threshold_report(double rho, std::optional<std::size_t> n_neurons, std::optional<double> alpha,
                                 std::optional<unsigned> n_degree) {
  ThresholdReport r;
  r.rho = rho;
  r.alpha_star = alpha_star(rho);
  r.n_neurons = n_neurons;
  r.alpha = alpha.value_or(r.alpha_star);
  if (n_neurons) r.m_max = std::exp(*r.alpha * static_cast<double>(*n_neurons));
  if (n_degree) {
    r.n_degree = n_degree;
    r.c_n = c_n(*n_degree);
    if (n_neurons) {
      r.polynomial_capacity = polynomial_capacity(static_cast<double>(*n_neurons), *n_degree,
                                                  static_cast<double>(*r.c_n));
    }
  }
  return r;
}

}  // namespace dam::theory
