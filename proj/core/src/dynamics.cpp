#include "dam/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "dam/exp_sum.hpp"

namespace dam {

namespace {

using Int128 = __int128;
using BigInt = boost::multiprecision::cpp_int;

const double kLogTwoSinhOne = std::log(2.0 * std::sinh(1.0));

void check_index(const NetworkState& state, std::size_t i) {
  if (i >= state.n_neurons()) {
    throw std::out_of_range("neuron index " + std::to_string(i) + " out of range for N=" +
                            std::to_string(state.n_neurons()));
  }
}

unsigned bit_length(std::uint64_t v) noexcept { return static_cast<unsigned>(std::bit_width(v)); }

SignedLog to_signed_log(Int128 v) {
  if (v == 0) return SignedLog::zero();
  const Int128 mag = v < 0 ? -v : v;
  return {v > 0 ? Sign::Positive : Sign::Negative, static_cast<double>(std::log(static_cast<long double>(mag)))};
}

SignedLog to_signed_log(const BigInt& v) {
  if (v == 0) return SignedLog::zero();
  BigInt mag = boost::multiprecision::abs(v);
  const std::size_t msb = boost::multiprecision::msb(mag);
  const std::size_t shift = msb > 60 ? msb - 60 : 0;
  mag >>= shift;
  const double log_abs = std::log(mag.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
  return {v > 0 ? Sign::Positive : Sign::Negative, log_abs};
}

template <typename Int>
Int ipow(Int base, unsigned e) {
  Int r = 1;
  for (unsigned k = 0; k < e; ++k) r *= base;
  return r;
}

// sum_mu xi_i^mu * o_mu^(n-1)
template <typename Int>
Int nspin_sum(const NetworkState& state, std::size_t i, unsigned n) {
  const auto& store = state.store();
  const auto o = state.overlaps();
  Int acc = 0;
  for (std::size_t mu = 0; mu < o.size(); ++mu) {
    const Int term = ipow<Int>(Int(o[mu]), n - 1);
    if (store.bit(mu, i)) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  return acc;
}

// sum_mu (xi_i + r)^n - (-xi_i + r)^n with r = o_mu - xi_i sigma_i
template <typename Int>
Int power_sum(const NetworkState& state, std::size_t i, unsigned n) {
  const auto& store = state.store();
  const auto o = state.overlaps();
  const int s = state.sigma().spin(i);
  Int acc = 0;
  for (std::size_t mu = 0; mu < o.size(); ++mu) {
    const int xi = store.bit(mu, i) ? 1 : -1;
    const Int r = Int(o[mu] - xi * s);
    acc += ipow<Int>(r + xi, n) - ipow<Int>(r - xi, n);
  }
  return acc;
}

// Fills coeffs[e + N + 1] += s_mu for exponent e = o_mu - s_mu; optionally skipping one pattern.
void exp_coefficients(const NetworkState& state, std::size_t i, std::vector<std::int64_t>& coeffs,
                      std::optional<std::size_t> skip) {
  const std::size_t n = state.n_neurons();
  coeffs.assign(2 * n + 3, 0);
  const auto& store = state.store();
  const auto o = state.overlaps();
  const bool sigma_up = state.sigma().bit(i);
  const auto offset = static_cast<std::int64_t>(n) + 1;
  for (std::size_t mu = 0; mu < o.size(); ++mu) {
    if (skip && *skip == mu) continue;
    const int s = store.bit(mu, i) == sigma_up ? 1 : -1;
    coeffs[static_cast<std::size_t>(o[mu] - s + offset)] += s;
  }
}

std::vector<std::int64_t>& scratch(int slot) {
  thread_local std::vector<std::int64_t> buffers[2];
  return buffers[slot];
}

int resolve(Sign keep_margin, int current, TiePolicy ties) {
  switch (keep_margin) {
    case Sign::Positive:
      return current;
    case Sign::Negative:
      return -current;
    case Sign::Zero:
      break;
  }
  return ties == TiePolicy::KeepCurrent ? current : 1;
}

}  // namespace

void ModelSpec::validate() const {
  if ((kind == ModelKind::Polynomial || kind == ModelKind::PowerInteraction) && degree < 2) {
    throw std::invalid_argument("model degree must be >= 2, got " + std::to_string(degree));
  }
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Classical:
      return "classical";
    case ModelKind::Polynomial:
      return "polynomial";
    case ModelKind::Exponential:
      return "exponential";
    case ModelKind::PowerInteraction:
      return "power";
  }
  return "?";
}

std::string_view to_string(TiePolicy policy) noexcept {
  return policy == TiePolicy::KeepCurrent ? "keep" : "plus_one";
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::Converged:
      return "converged";
    case StopReason::Cycle:
      return "cycle";
    case StopReason::MaxPasses:
      return "max_passes";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "classical") return ModelKind::Classical;
  if (name == "polynomial") return ModelKind::Polynomial;
  if (name == "exponential") return ModelKind::Exponential;
  if (name == "power") return ModelKind::PowerInteraction;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

TiePolicy parse_tie_policy(std::string_view name) {
  if (name == "keep") return TiePolicy::KeepCurrent;
  if (name == "plus_one") return TiePolicy::PlusOne;
  throw std::invalid_argument("unknown tie policy '" + std::string(name) + "'");
}

NetworkState::NetworkState(const PatternStore& store, Pattern sigma, std::optional<std::size_t> reference)
    : store_(&store), sigma_(std::move(sigma)) {
  if (sigma_.size() != store.n_neurons()) {
    throw std::invalid_argument("NetworkState: configuration length does not match the store");
  }
  overlaps_ = store.overlaps_with(sigma_);
  set_reference(reference);
}

void NetworkState::set_reference(std::optional<std::size_t> reference) {
  if (reference && *reference >= store_->n_patterns()) {
    throw std::out_of_range("NetworkState: reference pattern out of range");
  }
  reference_ = reference;
}

void NetworkState::flip(std::size_t i) {
  if (i >= sigma_.size()) throw std::out_of_range("NetworkState::flip: index out of range");
  sigma_.flip(i);
  const bool up = sigma_.bit(i);
  for (std::size_t mu = 0; mu < overlaps_.size(); ++mu) {
    // new contribution xi*sigma_new replaces -xi*sigma_new
    overlaps_[mu] += store_->bit(mu, i) == up ? 2 : -2;
  }
}

void NetworkState::assign(Pattern sigma) {
  if (sigma.size() != sigma_.size()) throw std::invalid_argument("NetworkState::assign: length mismatch");
  sigma_ = std::move(sigma);
  overlaps_ = store_->overlaps_with(sigma_);
}

bool NetworkState::overlaps_consistent() const {
  const auto fresh = store_->overlaps_with(sigma_);
  return std::equal(fresh.begin(), fresh.end(), overlaps_.begin(), overlaps_.end());
}

std::int64_t classical_local_field(const NetworkState& state, std::size_t i) {
  check_index(state, i);
  const auto o = state.overlaps();
  const auto& store = state.store();
  std::int64_t h = 0;
  for (std::size_t mu = 0; mu < o.size(); ++mu) h += store.bit(mu, i) ? o[mu] : -o[mu];
  return h;
}

SignedLog nspin_local_field(const NetworkState& state, std::size_t i, unsigned n) {
  if (n < 2) throw std::invalid_argument("nspin_local_field: degree must be >= 2");
  check_index(state, i);
  const unsigned bits = (n - 1) * bit_length(state.n_neurons()) + bit_length(state.n_patterns()) + 1;
  if (bits <= 126) return to_signed_log(nspin_sum<Int128>(state, i, n));
  return to_signed_log(nspin_sum<BigInt>(state, i, n));
}

SignedLog power_interaction_field(const NetworkState& state, std::size_t i, unsigned n) {
  if (n < 2) throw std::invalid_argument("power_interaction_field: degree must be >= 2");
  check_index(state, i);
  const unsigned bits = n * bit_length(state.n_neurons() + 1) + bit_length(state.n_patterns()) + 2;
  if (bits <= 126) return to_signed_log(power_sum<Int128>(state, i, n));
  return to_signed_log(power_sum<BigInt>(state, i, n));
}

SignedLog exp_delta_energy(const NetworkState& state, std::size_t i) {
  check_index(state, i);
  auto& coeffs = scratch(0);
  exp_coefficients(state, i, coeffs, std::nullopt);
  SignedLog r = signed_exp_sum(coeffs, -static_cast<std::int64_t>(state.n_neurons()) - 1);
  if (r.sign != Sign::Zero) r.log_abs += kLogTwoSinhOne;
  return r;
}

SignalNoise exp_signal_noise(const NetworkState& state, std::size_t i, std::size_t reference) {
  check_index(state, i);
  if (reference >= state.n_patterns()) throw std::out_of_range("exp_signal_noise: reference out of range");
  const auto n = static_cast<std::int64_t>(state.n_neurons());
  const int s_ref = state.store().bit(reference, i) == state.sigma().bit(i) ? 1 : -1;
  const std::int64_t e_ref = state.overlaps()[reference] - s_ref;

  SignalNoise out;
  out.signal = {s_ref > 0 ? Sign::Positive : Sign::Negative, static_cast<double>(e_ref) + kLogTwoSinhOne};

  auto& noise = scratch(0);
  exp_coefficients(state, i, noise, reference);
  out.noise = signed_exp_sum(noise, -n - 1);
  if (out.noise.sign != Sign::Zero) out.noise.log_abs += kLogTwoSinhOne;

  // sign(|S| - |N|) = sign(e^{e_ref} - sN * sum_k c_k e^k), all divided by 2 sinh(1).
  auto& diff = scratch(1);
  diff.resize(noise.size());
  const int s_noise = to_int(out.noise.sign);
  for (std::size_t k = 0; k < noise.size(); ++k) diff[k] = -s_noise * noise[k];
  diff[static_cast<std::size_t>(e_ref + n + 1)] += 1;
  out.noise_dominates = signed_exp_sum(diff, -n - 1).sign != Sign::Positive;
  return out;
}

UpdateDecision decide_update(const NetworkState& state, std::size_t i, const ModelSpec& model) {
  model.validate();
  check_index(state, i);
  const int current = state.sigma().spin(i);
  const Sign current_sign = current > 0 ? Sign::Positive : Sign::Negative;

  UpdateDecision d;
  d.neuron = i;
  switch (model.kind) {
    case ModelKind::Classical: {
      std::int64_t h = classical_local_field(state, i);
      if (model.zero_diagonal) h -= static_cast<std::int64_t>(state.n_patterns()) * current;
      d.delta_sign = current_sign * sign_of(h);
      break;
    }
    case ModelKind::Polynomial:
      d.delta_sign = current_sign * nspin_local_field(state, i, model.degree).sign;
      break;
    case ModelKind::PowerInteraction:
      d.delta_sign = current_sign * power_interaction_field(state, i, model.degree).sign;
      break;
    case ModelKind::Exponential:
      d.delta_sign = exp_delta_energy(state, i).sign;
      if (auto ref = state.reference()) {
        const SignalNoise sn = exp_signal_noise(state, i, *ref);
        d.signal = sn.signal;
        d.noise = sn.noise;
        d.noise_dominates = sn.noise_dominates;
      }
      break;
  }
  d.new_value = resolve(d.delta_sign, current, model.tie_policy);
  return d;
}

UpdateDecision decide_and_apply(NetworkState& state, std::size_t i, const ModelSpec& model) {
  UpdateDecision d = decide_update(state, i, model);
  if (d.delta_sign == Sign::Zero) state.add_ties(1);
  if (d.new_value != state.sigma().spin(i)) state.flip(i);
  return d;
}

StepResult synchronous_step(NetworkState& state, const ModelSpec& model, std::vector<UpdateDecision>* decisions) {
  const std::size_t n = state.n_neurons();
  std::vector<UpdateDecision> local;
  auto& out = decisions ? *decisions : local;
  out.clear();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(decide_update(state, i, model));

  StepResult r;
  for (const auto& d : out) {
    if (d.delta_sign == Sign::Zero) ++r.ties;
    if (d.new_value != state.sigma().spin(d.neuron)) {
      state.flip(d.neuron);
      ++r.n_changed;
    }
  }
  state.add_ties(r.ties);
  return r;
}

namespace {

StepResult async_over(NetworkState& state, const ModelSpec& model, std::span<const std::size_t> order) {
  StepResult r;
  for (std::size_t i : order) {
    const int before = state.sigma().spin(i);
    const UpdateDecision d = decide_and_apply(state, i, model);
    if (d.delta_sign == Sign::Zero) ++r.ties;
    if (d.new_value != before) ++r.n_changed;
  }
  return r;
}

}  // namespace

StepResult asynchronous_pass(NetworkState& state, const ModelSpec& model) {
  std::vector<std::size_t> order(state.n_neurons());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return async_over(state, model, order);
}

StepResult asynchronous_pass(NetworkState& state, const ModelSpec& model, Rng& rng) {
  std::vector<std::size_t> order(state.n_neurons());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t t = order.size(); t > 1; --t) {
    std::swap(order[t - 1], order[static_cast<std::size_t>(rng.below(t))]);
  }
  return async_over(state, model, order);
}

FixedPointResult run_to_fixed_point(NetworkState& state, const ModelSpec& model, Schedule schedule,
                                    std::size_t max_passes, Rng* rng) {
  if (max_passes == 0) throw std::invalid_argument("run_to_fixed_point: max_passes must be >= 1");
  if (schedule == Schedule::AsyncRandom && rng == nullptr) {
    throw std::invalid_argument("run_to_fixed_point: random order needs a generator");
  }
  FixedPointResult result;
  std::optional<Pattern> two_back;
  while (result.passes_used < max_passes) {
    std::optional<Pattern> before;
    if (schedule == Schedule::Synchronous) before = state.sigma();

    StepResult step;
    switch (schedule) {
      case Schedule::Synchronous:
        step = synchronous_step(state, model);
        break;
      case Schedule::AsyncSequential:
        step = asynchronous_pass(state, model);
        break;
      case Schedule::AsyncRandom:
        step = asynchronous_pass(state, model, *rng);
        break;
    }
    ++result.passes_used;
    result.total_flips += step.n_changed;
    if (step.n_changed == 0) {
      result.converged = true;
      result.reason = StopReason::Converged;
      return result;
    }
    if (schedule == Schedule::Synchronous) {
      if (two_back && *two_back == state.sigma()) {
        result.reason = StopReason::Cycle;
        return result;
      }
      two_back = std::move(before);
    }
  }
  result.reason = StopReason::MaxPasses;
  return result;
}

}  // namespace dam
