#include "dam/pattern.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dam {

namespace {

std::uint64_t tail_mask(std::size_t n_neurons) noexcept {
  const std::size_t rem = n_neurons & 63;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

void clear_tail(std::span<std::uint64_t> words, std::size_t n_neurons) noexcept {
  if (!words.empty()) words.back() &= tail_mask(n_neurons);
}

void require_same_length(PatternView a, PatternView b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("pattern length mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

// Flips a uniform k-subset via a partial Fisher-Yates shuffle of the indices.
void flip_random_subset(Pattern& p, std::size_t k, Rng& rng) {
  const std::size_t n = p.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.below(n - t));
    std::swap(idx[t], idx[j]);
    p.flip(idx[t]);
  }
}

// Radius for a uniform point of the Hamming ball B(x, r) in dimension n.
std::size_t sample_ball_radius(std::size_t n, std::size_t r, Rng& rng) {
  // Exact integer weights while |B| fits in 63 bits.
  std::vector<std::uint64_t> counts;
  counts.reserve(r + 1);
  unsigned __int128 binom = 1;
  unsigned __int128 total = 0;
  bool exact = true;
  constexpr unsigned __int128 kLimit = std::numeric_limits<std::int64_t>::max();
  for (std::size_t k = 0; k <= r; ++k) {
    if (k > 0) binom = binom * (n - k + 1) / k;
    total += binom;
    if (binom > kLimit || total > kLimit) {
      exact = false;
      break;
    }
    counts.push_back(static_cast<std::uint64_t>(binom));
  }
  if (exact) {
    std::uint64_t u = rng.below(static_cast<std::uint64_t>(total));
    for (std::size_t k = 0; k <= r; ++k) {
      if (u < counts[k]) return k;
      u -= counts[k];
    }
    return r;
  }
  // Large balls: log-space weights relative to the largest term.
  std::vector<long double> logw(r + 1);
  for (std::size_t k = 0; k <= r; ++k) {
    logw[k] = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
              std::lgamma(static_cast<long double>(n - k) + 1);
  }
  const long double top = *std::max_element(logw.begin(), logw.end());
  long double sum = 0;
  for (auto& w : logw) {
    w = std::exp(w - top);
    sum += w;
  }
  long double u = static_cast<long double>(rng.unit()) * sum;
  for (std::size_t k = 0; k <= r; ++k) {
    if (u < logw[k]) return k;
    u -= logw[k];
  }
  return r;
}

}  // namespace

Pattern::Pattern(std::size_t n_neurons) : n_(n_neurons), words_(words_for(n_neurons), ~std::uint64_t{0}) {
  if (n_neurons == 0) throw std::invalid_argument("Pattern: n_neurons must be positive");
  clear_tail(words_, n_);
}

Pattern::Pattern(PatternView view) : n_(view.size()), words_(view.words().begin(), view.words().end()) {
  if (n_ == 0) throw std::invalid_argument("Pattern: n_neurons must be positive");
}

Pattern Pattern::from_spins(std::span<const int> spins) {
  Pattern p(spins.size());
  for (std::size_t i = 0; i < spins.size(); ++i) p.set(i, spins[i]);
  return p;
}

int Pattern::at(std::size_t i) const {
  if (i >= n_) throw std::out_of_range("Pattern::at: index " + std::to_string(i));
  return spin(i);
}

void Pattern::set(std::size_t i, int value) {
  if (i >= n_) throw std::out_of_range("Pattern::set: index " + std::to_string(i));
  if (value != 1 && value != -1) throw std::invalid_argument("spin values must be -1 or +1");
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value == 1) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

Pattern Pattern::negated() const {
  Pattern out(*this);
  for (auto& w : out.words_) w = ~w;
  clear_tail(out.words_, n_);
  return out;
}

std::vector<int> Pattern::to_spins() const {
  std::vector<int> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = spin(i);
  return out;
}

PatternStore::PatternStore(std::span<const Pattern> patterns)
    : n_(patterns.empty() ? 0 : patterns.front().size()),
      m_(patterns.size()),
      stride_(words_for(n_)) {
  if (patterns.empty()) throw std::invalid_argument("PatternStore: need at least one pattern");
  words_.reserve(m_ * stride_);
  for (const auto& p : patterns) {
    if (p.size() != n_) throw std::invalid_argument("PatternStore: patterns must share one length");
    words_.insert(words_.end(), p.words().begin(), p.words().end());
  }
}

PatternStore::PatternStore(std::size_t n_neurons, std::size_t n_patterns, std::vector<std::uint64_t> words)
    : n_(n_neurons), m_(n_patterns), stride_(words_for(n_neurons)), words_(std::move(words)) {
  if (n_ == 0 || m_ == 0) throw std::invalid_argument("PatternStore: N and M must be positive");
  if (n_ > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw std::invalid_argument("PatternStore: N exceeds 2^31 - 1");
  }
  if (words_.size() != m_ * stride_) throw std::invalid_argument("PatternStore: word count mismatch");
  const std::uint64_t mask = tail_mask(n_);
  for (std::size_t mu = 0; mu < m_; ++mu) {
    if ((words_[mu * stride_ + stride_ - 1] & ~mask) != 0) {
      throw std::invalid_argument("PatternStore: bits set past the last neuron");
    }
  }
}

PatternView PatternStore::at(std::size_t mu) const {
  if (mu >= m_) throw std::out_of_range("PatternStore::at: pattern " + std::to_string(mu));
  return (*this)[mu];
}

std::vector<std::int32_t> PatternStore::overlaps_with(PatternView sigma) const {
  if (sigma.size() != n_) throw std::invalid_argument("overlaps_with: length mismatch");
  std::vector<std::int32_t> out(m_);
  const auto s = sigma.words();
  const auto n = static_cast<std::int64_t>(n_);
  for (std::size_t mu = 0; mu < m_; ++mu) {
    const std::uint64_t* row = words_.data() + mu * stride_;
    std::int64_t diff = 0;
    for (std::size_t w = 0; w < stride_; ++w) diff += std::popcount(row[w] ^ s[w]);
    out[mu] = static_cast<std::int32_t>(n - 2 * diff);
  }
  return out;
}

std::int64_t overlap(PatternView a, PatternView b) {
  return static_cast<std::int64_t>(a.size()) - 2 * static_cast<std::int64_t>(hamming_distance(a, b));
}

std::size_t hamming_distance(PatternView a, PatternView b) {
  require_same_length(a, b);
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t d = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) d += static_cast<std::size_t>(std::popcount(wa[w] ^ wb[w]));
  return d;
}

PatternStore generate_patterns(std::size_t n_neurons, std::size_t n_patterns, const SeedSpec& seed) {
  if (n_neurons == 0) throw std::invalid_argument("generate_patterns: N must be positive");
  if (n_patterns == 0) throw std::invalid_argument("generate_patterns: M must be positive");
  const std::size_t stride = words_for(n_neurons);
  const std::uint64_t mask = tail_mask(n_neurons);
  std::vector<std::uint64_t> words(n_patterns * stride);
  Rng rng(seed);
  for (std::size_t mu = 0; mu < n_patterns; ++mu) {
    for (std::size_t w = 0; w < stride; ++w) words[mu * stride + w] = rng.next();
    words[mu * stride + stride - 1] &= mask;
  }
  return PatternStore(n_neurons, n_patterns, std::move(words));
}

Pattern corrupt_on_sphere(PatternView pattern, std::size_t n_flips, Rng& rng) {
  if (n_flips > pattern.size()) {
    throw std::invalid_argument("corrupt_on_sphere: n_flips " + std::to_string(n_flips) + " exceeds N " +
                                std::to_string(pattern.size()));
  }
  Pattern out(pattern);
  if (n_flips == pattern.size()) return out.negated();
  flip_random_subset(out, n_flips, rng);
  return out;
}

Pattern corrupt_in_ball(PatternView pattern, std::size_t max_flips, Rng& rng) {
  if (max_flips > pattern.size()) {
    throw std::invalid_argument("corrupt_in_ball: max_flips " + std::to_string(max_flips) + " exceeds N " +
                                std::to_string(pattern.size()));
  }
  const std::size_t k = sample_ball_radius(pattern.size(), max_flips, rng);
  Pattern out(pattern);
  flip_random_subset(out, k, rng);
  return out;
}

Pattern corrupt_on_sphere(PatternView pattern, std::size_t n_flips, const SeedSpec& seed) {
  Rng rng(seed);
  return corrupt_on_sphere(pattern, n_flips, rng);
}

Pattern corrupt_in_ball(PatternView pattern, std::size_t max_flips, const SeedSpec& seed) {
  Rng rng(seed);
  return corrupt_in_ball(pattern, max_flips, rng);
}

}  // namespace dam
