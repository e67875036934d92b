#include "dam/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "dam/pattern.hpp"
#include "dam/theory.hpp"

namespace dam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Streams used by one trial, all children of the trial seed.
struct TrialStreams {
  PatternStore store;
  Rng corruption;
  Rng order;

  explicit TrialStreams(const TrialSpec& spec)
      : store(generate_patterns(spec.n_neurons, spec.n_patterns, spec.seed.child("patterns"))),
        corruption(spec.seed.child("corruption")),
        order(spec.seed.child("order")) {}
};

std::vector<std::size_t> targets_of(const TrialSpec& spec) {
  if (!spec.target.all_patterns) return {spec.target.index};
  std::vector<std::size_t> out(spec.n_patterns);
  for (std::size_t mu = 0; mu < out.size(); ++mu) out[mu] = mu;
  return out;
}

Pattern corrupt(const TrialSpec& spec, PatternView target, Rng& rng) {
  return spec.corruption == Corruption::Sphere ? corrupt_on_sphere(target, spec.n_flips, rng)
                                               : corrupt_in_ball(target, spec.n_flips, rng);
}

// Folds the first-step exponential diagnostics of one target into the trial result.
void audit_first_step(const std::vector<UpdateDecision>& decisions, PatternView target, TrialResult& r) {
  bool first = r.signal_magnitude_log == -std::numeric_limits<double>::infinity();
  for (const auto& d : decisions) {
    const bool wrong = d.new_value != target.spin(d.neuron);
    if (d.noise_dominates) ++r.noise_dominated_neurons;
    if (wrong) {
      ++r.first_step_errors;
      if (!d.noise_dominates) ++r.audit_violations;
    }
    const double gap = d.noise.log_abs - d.signal.log_abs;
    if (first || gap > r.noise_magnitude_log - r.signal_magnitude_log) {
      r.signal_magnitude_log = d.signal.log_abs;
      r.noise_magnitude_log = d.noise.log_abs;
      first = false;
    }
  }
}

double overlay_for(const TrialSpec& spec, double alpha_star_value) {
  switch (spec.model.kind) {
    case ModelKind::Exponential:
      return alpha_star_value;
    case ModelKind::Classical:
      return spec.n_neurons >= 2 ? theory::polynomial_capacity(static_cast<double>(spec.n_neurons), 2, 2.0) : kNaN;
    case ModelKind::Polynomial:
    case ModelKind::PowerInteraction:
      if (spec.n_neurons < 2 || spec.model.degree > 18) return kNaN;
      return theory::polynomial_capacity(static_cast<double>(spec.n_neurons), spec.model.degree,
                                         static_cast<double>(theory::c_n(spec.model.degree)));
  }
  return kNaN;
}

SweepResult aggregate(const TrialSpec& point, std::size_t point_index, std::uint64_t master_seed,
                      std::span<const TrialResult> trials) {
  SweepResult s;
  s.point = point;
  s.point_index = point_index;
  s.master_seed = master_seed;
  s.n_trials = trials.size();
  const std::size_t targets = point.target.all_patterns ? point.n_patterns : 1;
  double residual = 0.0;
  for (const auto& t : trials) {
    if (t.success) ++s.n_success;
    residual += static_cast<double>(t.n_wrong_bits_after) / static_cast<double>(point.n_neurons * targets);
    s.total_ties += t.ties_seen;
    if (t.noise_dominated_neurons > 0) ++s.noise_dominated_trials;
    s.audit_violations += t.audit_violations;
  }
  s.mean_residual_fraction = trials.empty() ? 0.0 : residual / static_cast<double>(trials.size());
  s.wilson = wilson_interval(s.n_success, s.n_trials);
  s.alpha = theory::alpha_for_patterns(point.n_patterns, point.n_neurons);
  s.rho = point.rho();
  s.alpha_star = s.rho < 0.5 ? theory::alpha_star(s.rho) : kNaN;
  s.theory_overlay = overlay_for(point, s.alpha_star);
  return s;
}

}  // namespace

std::string_view to_string(SchedulerKind kind) noexcept {
  switch (kind) {
    case SchedulerKind::SyncOneStep:
      return "sync";
    case SchedulerKind::AsyncOnePass:
      return "async";
    case SchedulerKind::ToFixedPoint:
      return "fixed_point";
  }
  return "?";
}

SchedulerKind parse_scheduler(std::string_view name) {
  if (name == "sync") return SchedulerKind::SyncOneStep;
  if (name == "async") return SchedulerKind::AsyncOnePass;
  if (name == "fixed_point") return SchedulerKind::ToFixedPoint;
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

std::string_view to_string(Corruption c) noexcept { return c == Corruption::Sphere ? "sphere" : "ball"; }

Corruption parse_corruption(std::string_view name) {
  if (name == "sphere") return Corruption::Sphere;
  if (name == "ball") return Corruption::Ball;
  throw std::invalid_argument("unknown corruption '" + std::string(name) + "'");
}

void TrialSpec::validate() const {
  model.validate();
  if (n_neurons == 0) throw std::invalid_argument("trial: N must be positive");
  if (n_patterns == 0) throw std::invalid_argument("trial: M must be positive");
  if (n_flips > n_neurons) throw std::invalid_argument("trial: n_flips exceeds N");
  if (!target.all_patterns && target.index >= n_patterns) {
    throw std::invalid_argument("trial: target pattern index out of range");
  }
  if (scheduler.kind == SchedulerKind::ToFixedPoint && scheduler.max_passes == 0) {
    throw std::invalid_argument("trial: max_passes must be >= 1");
  }
}

bool TrialResult::same_outcome(const TrialResult& o) const noexcept {
  return success == o.success && n_wrong_bits_after == o.n_wrong_bits_after && ties_seen == o.ties_seen &&
         signal_magnitude_log == o.signal_magnitude_log && noise_magnitude_log == o.noise_magnitude_log &&
         noise_dominated_neurons == o.noise_dominated_neurons && first_step_errors == o.first_step_errors &&
         audit_violations == o.audit_violations;
}

TrialResult run_trial(const TrialSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  TrialStreams streams(spec);
  const bool exponential = spec.model.kind == ModelKind::Exponential;

  TrialResult r;
  std::vector<UpdateDecision> decisions;
  for (std::size_t mu : targets_of(spec)) {
    const PatternView target = streams.store[mu];
    NetworkState state(streams.store, corrupt(spec, target, streams.corruption),
                       exponential ? std::optional<std::size_t>(mu) : std::nullopt);

    if (spec.scheduler.kind == SchedulerKind::SyncOneStep) {
      synchronous_step(state, spec.model, exponential ? &decisions : nullptr);
      if (exponential) audit_first_step(decisions, target, r);
    } else {
      if (exponential) {
        decisions.clear();
        for (std::size_t i = 0; i < state.n_neurons(); ++i) decisions.push_back(decide_update(state, i, spec.model));
        audit_first_step(decisions, target, r);
      }
      if (spec.scheduler.kind == SchedulerKind::AsyncOnePass) {
        asynchronous_pass(state, spec.model, streams.order);
      } else {
        (void)run_to_fixed_point(state, spec.model, Schedule::AsyncRandom, spec.scheduler.max_passes,
                                 &streams.order);
      }
    }
    r.n_wrong_bits_after += hamming_distance(state.sigma(), target);
    r.ties_seen += state.tie_count();
  }
  r.success = r.n_wrong_bits_after == 0;
  r.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  return r;
}

SeedSpec trial_seed(std::uint64_t master_seed, std::size_t point_index, std::size_t trial_index) {
  return SeedSpec{master_seed, "point:" + std::to_string(point_index), trial_index};
}

std::vector<SweepResult> run_sweep(std::span<const TrialSpec> grid, const SweepOptions& options) {
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  if (options.n_trials == 0) throw std::invalid_argument("run_sweep: n_trials must be >= 1");
  for (const auto& p : grid) p.validate();

  const std::size_t n_points = grid.size();
  const std::size_t n_trials = options.n_trials;
  const std::size_t n_tasks = n_points * n_trials;
  std::size_t workers = options.parallelism == 0 ? std::thread::hardware_concurrency() : options.parallelism;
  workers = std::clamp<std::size_t>(workers, 1, n_tasks);

  std::vector<std::vector<TrialResult>> results(n_points, std::vector<TrialResult>(n_trials));
  std::vector<std::size_t> remaining(n_points, n_trials);
  std::vector<SweepResult> done;
  done.reserve(n_points);

  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;

  auto cancelled = [&] {
    return failed.load(std::memory_order_relaxed) ||
           (options.cancel != nullptr && options.cancel->load(std::memory_order_relaxed));
  };

  auto worker = [&] {
    while (!cancelled()) {
      const std::size_t task = next_task.fetch_add(1, std::memory_order_relaxed);
      if (task >= n_tasks) return;
      const std::size_t p = task / n_trials;
      const std::size_t t = task % n_trials;
      try {
        TrialSpec spec = grid[p];
        spec.seed = trial_seed(options.master_seed, p, t);
        results[p][t] = run_trial(spec);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
      std::lock_guard lock(mutex);
      --remaining[p];
      // Emit every point that is complete and has no unfinished predecessor.
      while (done.size() < n_points && remaining[done.size()] == 0) {
        const std::size_t q = done.size();
        done.push_back(aggregate(grid[q], q, options.master_seed, results[q]));
        results[q].clear();
        results[q].shrink_to_fit();
        if (options.on_point) options.on_point(done.back());
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return done;
}

SweepResult error_fraction_experiment(TrialSpec spec, std::size_t n_trials, std::size_t parallelism,
                                      std::uint64_t master_seed) {
  if (spec.model.kind == ModelKind::Classical) {
    throw std::invalid_argument("error_fraction_experiment: needs a polynomial, power or exponential model");
  }
  spec.scheduler.kind = SchedulerKind::ToFixedPoint;
  SweepOptions options;
  options.master_seed = master_seed;
  options.n_trials = n_trials;
  options.parallelism = parallelism;
  auto out = run_sweep(std::span<const TrialSpec>(&spec, 1), options);
  return out.front();
}

std::vector<SignalNoiseRecord> signal_noise_profile(const TrialSpec& spec) {
  spec.validate();
  if (spec.model.kind != ModelKind::Exponential) {
    throw std::invalid_argument("signal_noise_profile: exponential model only");
  }
  TrialStreams streams(spec);
  const double n = static_cast<double>(spec.n_neurons);
  const double floor_log = n * (1.0 - 2.0 * spec.rho()) + std::log1p(-std::exp(-2.0)) - 1e-9 * std::max(1.0, n);

  std::vector<SignalNoiseRecord> out;
  for (std::size_t mu : targets_of(spec)) {
    const PatternView target = streams.store[mu];
    const Pattern corrupted = corrupt(spec, target, streams.corruption);
    const NetworkState state(streams.store, corrupted, mu);
    for (std::size_t i = 0; i < state.n_neurons(); ++i) {
      const UpdateDecision d = decide_update(state, i, spec.model);
      SignalNoiseRecord rec;
      rec.target = mu;
      rec.neuron = i;
      rec.log_signal = d.signal.log_abs;
      rec.log_noise = d.noise.log_abs;
      rec.noise_dominates = d.noise_dominates;
      rec.corrupted = corrupted.spin(i) != target.spin(i);
      rec.decided_correctly = d.new_value == target.spin(i);
      if (rec.log_signal < floor_log) {
        throw std::logic_error("signal_noise_profile: |E_signal| below e^{N(1-2rho)}(1-e^-2) at neuron " +
                               std::to_string(i));
      }
      out.push_back(rec);
    }
  }
  return out;
}

}  // namespace dam
