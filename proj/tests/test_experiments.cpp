#include <atomic>
#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "doctest.h"

#include "dam/experiments.hpp"
#include "dam/theory.hpp"

using namespace dam;

namespace {

TrialSpec exp_point(std::size_t N, std::size_t M, std::size_t flips) {
  TrialSpec s;
  s.model = ModelSpec::exponential();
  s.n_neurons = N;
  s.n_patterns = M;
  s.n_flips = flips;
  return s;
}

bool same_sweep(const SweepResult& a, const SweepResult& b) {
  const auto same_double = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return a.point == b.point && a.point_index == b.point_index && a.master_seed == b.master_seed &&
         a.n_trials == b.n_trials && a.n_success == b.n_success && a.wilson.low == b.wilson.low &&
         a.wilson.high == b.wilson.high && same_double(a.alpha, b.alpha) && a.rho == b.rho &&
         same_double(a.alpha_star, b.alpha_star) && same_double(a.theory_overlay, b.theory_overlay) &&
         a.mean_residual_fraction == b.mean_residual_fraction && a.total_ties == b.total_ties &&
         a.noise_dominated_trials == b.noise_dominated_trials && a.audit_violations == b.audit_violations;
}

std::vector<SweepResult> sweep(std::span<const TrialSpec> grid, std::size_t trials, std::size_t threads,
                               std::uint64_t master = 1) {
  SweepOptions o;
  o.master_seed = master;
  o.n_trials = trials;
  o.parallelism = threads;
  return run_sweep(grid, o);
}

}  // namespace

TEST_CASE("a lone stored pattern is always retrieved") {
  const ModelSpec models[] = {ModelSpec::classical(), ModelSpec::polynomial(3), ModelSpec::exponential(),
                              ModelSpec::power_interaction(4)};
  const SchedulerKind kinds[] = {SchedulerKind::SyncOneStep, SchedulerKind::AsyncOnePass, SchedulerKind::ToFixedPoint};
  for (const auto& m : models) {
    for (auto k : kinds) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TrialSpec s;
        s.model = m;
        s.n_neurons = 25;
        s.n_patterns = 1;
        s.scheduler.kind = k;
        s.seed = SeedSpec{seed, "t", 0};
        const auto r = run_trial(s);
        CHECK(r.success);
        CHECK(r.n_wrong_bits_after == 0);
      }
    }
  }
}

TEST_CASE("run_trial is deterministic and success matches residual bits") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = exp_point(30, 200, 6);
    s.seed = SeedSpec{seed, "det", seed};
    s.corruption = seed % 2 ? Corruption::Ball : Corruption::Sphere;
    s.scheduler.kind = static_cast<SchedulerKind>(seed % 3);
    const auto a = run_trial(s);
    const auto b = run_trial(s);
    CHECK(a.same_outcome(b));
    CHECK(a.success == (a.n_wrong_bits_after == 0));
    CHECK(a.audit_violations == 0);
  }
  auto all = exp_point(30, 4, 3);
  all.target = Target::all();
  const auto r = run_trial(all);
  CHECK(r.same_outcome(run_trial(all)));
}

TEST_CASE("exponential model recovers from a quarter of flipped bits at low load") {
  const auto grid = std::vector<TrialSpec>{exp_point(40, 3, 10)};
  // The rate is about 0.994, so 1000 trials sit too close to the 99% line; 20000 put it ~7 sd away.
  const auto res = sweep(grid, 20000, 0, 2024);
  REQUIRE(res.size() == 1);
  CHECK(res[0].success_rate() >= 0.99);
  CHECK(res[0].rho == 0.25);
  CHECK(res[0].audit_violations == 0);
}

TEST_CASE("sweep counts equal individual trial outcomes") {
  const auto grid = std::vector<TrialSpec>{exp_point(30, 500, 6), exp_point(20, 50, 5)};
  const auto res = sweep(grid, 10, 1, 7);
  REQUIRE(res.size() == 2);
  for (std::size_t p = 0; p < 2; ++p) {
    std::size_t wins = 0;
    for (std::size_t t = 0; t < 10; ++t) {
      auto spec = grid[p];
      spec.seed = trial_seed(7, p, t);
      if (run_trial(spec).success) ++wins;
    }
    CHECK(res[p].n_success == wins);
    CHECK(res[p].n_trials == 10);
    CHECK(res[p].point_index == p);
    CHECK(res[p].wilson.low <= res[p].success_rate());
    CHECK(res[p].wilson.high >= res[p].success_rate());
  }
  CHECK(res[0].alpha == doctest::Approx(std::log(499.0) / 30));
  CHECK(res[0].alpha_star == doctest::Approx(theory::alpha_star(0.2)));
  CHECK(res[0].theory_overlay == res[0].alpha_star);
}

TEST_CASE("sweep results do not depend on the thread count") {
  std::vector<TrialSpec> grid;
  for (std::size_t M : {5u, 80u, 600u}) {
    grid.push_back(exp_point(30, M, 5));
    auto poly = grid.back();
    poly.model = ModelSpec::polynomial(3);
    poly.scheduler.kind = SchedulerKind::ToFixedPoint;
    grid.push_back(poly);
  }
  const auto one = sweep(grid, 40, 1, 99);
  const auto eight = sweep(grid, 40, 8, 99);
  const auto hw = sweep(grid, 40, 0, 99);
  REQUIRE(one.size() == grid.size());
  REQUIRE(eight.size() == grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    CHECK(same_sweep(one[p], eight[p]));
    CHECK(same_sweep(one[p], hw[p]));
  }
  CHECK_FALSE(same_sweep(one[0], sweep(grid, 40, 1, 100)[0]));
}

TEST_CASE("sweep callbacks arrive in grid order and cancellation stops early") {
  std::vector<TrialSpec> grid;
  for (std::size_t M = 2; M < 12; ++M) grid.push_back(exp_point(20, M, 2));
  std::vector<std::size_t> order;
  SweepOptions o;
  o.n_trials = 5;
  o.parallelism = 4;
  o.on_point = [&](const SweepResult& r) { order.push_back(r.point_index); };
  const auto res = run_sweep(grid, o);
  CHECK(res.size() == grid.size());
  REQUIRE(order.size() == grid.size());
  for (std::size_t p = 0; p < order.size(); ++p) CHECK(order[p] == p);

  std::atomic<bool> stop{true};
  o.cancel = &stop;
  o.on_point = nullptr;
  CHECK(run_sweep(grid, o).empty());
  CHECK_THROWS_AS(static_cast<void>(run_sweep(std::span<const TrialSpec>{}, SweepOptions{})), std::invalid_argument);
}

TEST_CASE("success does not increase with the exponential load") {
  const double a = theory::alpha_star(0.125);
  std::vector<TrialSpec> grid;
  for (double f : {0.5, 1.0, 1.5}) grid.push_back(exp_point(40, theory::patterns_for_alpha(f * a, 40), 5));
  CHECK(grid[0].n_patterns == 25);
  CHECK(grid[2].n_patterns == 13245);
  const auto res = sweep(grid, 150, 0, 11);
  for (std::size_t p = 1; p < res.size(); ++p) CHECK(res[p].n_success <= res[p - 1].n_success);
  for (const auto& r : res) {
    CHECK(r.noise_dominated_trials >= r.n_trials - r.n_success);
    CHECK(r.audit_violations == 0);
  }
}

TEST_CASE("residual error fraction") {
  TrialSpec s;
  s.model = ModelSpec::polynomial(3);
  s.n_neurons = 60;
  s.n_flips = 6;
  s.n_patterns = 10;
  const auto low = error_fraction_experiment(s, 100, 0, 5);
  CHECK(low.mean_residual_fraction < 0.01);
  CHECK(low.point.scheduler.kind == SchedulerKind::ToFixedPoint);
  CHECK(low.theory_overlay == doctest::Approx(theory::polynomial_capacity(60, 3, 6.0)));

  s.n_patterns = 1;
  CHECK(error_fraction_experiment(s, 50, 0, 5).mean_residual_fraction == 0.0);

  double prev = -1.0;
  for (std::size_t M : {10u, 100u, 400u, 1500u}) {
    s.n_patterns = M;
    const auto r = error_fraction_experiment(s, 60, 0, 5);
    CHECK(r.mean_residual_fraction >= prev);
    prev = r.mean_residual_fraction;
  }
  CHECK(prev > 0.01);

  auto e = exp_point(30, 1, 3);
  CHECK(error_fraction_experiment(e, 10, 1, 0).mean_residual_fraction == 0.0);
  s.model = ModelSpec::classical();
  CHECK_THROWS_AS(static_cast<void>(error_fraction_experiment(s, 10)), std::invalid_argument);
}

TEST_CASE("signal and noise magnitudes") {
  SUBCASE("a single pattern has no noise") {
    auto s = exp_point(30, 1, 4);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      s.seed = SeedSpec{seed, "sn", 0};
      const auto recs = signal_noise_profile(s);
      CHECK(recs.size() == 30);
      for (const auto& r : recs) {
        CHECK(std::isinf(r.log_noise));
        CHECK(r.log_noise < 0);
        CHECK_FALSE(r.noise_dominates);
        CHECK(r.decided_correctly);
      }
    }
  }
  SUBCASE("signal lower bound, N = 40, rho = 0.1, M = 50") {
    auto s = exp_point(40, 50, 4);
    const double bound = 0.8 * 40 + std::log1p(-std::exp(-2.0));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      s.seed = SeedSpec{seed, "sn", 1};
      for (const auto& r : signal_noise_profile(s)) CHECK(r.log_signal >= bound - 1e-9);
    }
  }
  SUBCASE("failures imply noise dominance") {
    std::size_t failures = 0;
    auto s = exp_point(30, 3000, 6);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      s.seed = SeedSpec{seed, "sn", 2};
      const auto trial = run_trial(s);
      bool dominated = false;
      for (const auto& r : signal_noise_profile(s)) {
        if (!r.decided_correctly) CHECK(r.noise_dominates);
        dominated = dominated || r.noise_dominates;
      }
      if (!trial.success) {
        ++failures;
        CHECK(dominated);
      }
      CHECK(dominated == (trial.noise_dominated_neurons > 0));
    }
    CHECK(failures > 0);
  }
  auto poly = exp_point(20, 3, 2);
  poly.model = ModelSpec::polynomial(3);
  CHECK_THROWS_AS(static_cast<void>(signal_noise_profile(poly)), std::invalid_argument);
}

TEST_CASE("clean inputs succeed at least as often as corrupted ones") {
  struct Case {
    ModelSpec model;
    std::size_t N, M, flips;
  };
  const Case cases[] = {{ModelSpec::exponential(), 30, 2000, 6},
                        {ModelSpec::classical(), 40, 6, 6},
                        {ModelSpec::polynomial(3), 40, 60, 8}};
  for (const auto& c : cases) {
    std::size_t clean = 0, noisy = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
      TrialSpec s;
      s.model = c.model;
      s.n_neurons = c.N;
      s.n_patterns = c.M;
      s.seed = SeedSpec{3, "matched", t};
      if (run_trial(s).success) ++clean;
      s.n_flips = c.flips;
      if (run_trial(s).success) ++noisy;
    }
    CHECK(clean >= noisy);
  }
}

TEST_CASE("wilson interval") {
  const auto a = wilson_interval(5, 10);
  CHECK(a.low == doctest::Approx(0.23659309051).epsilon(1e-9));
  CHECK(a.high == doctest::Approx(0.76340690949).epsilon(1e-9));
  const auto z = wilson_interval(0, 10);
  CHECK(z.low == 0.0);
  CHECK(z.high == doctest::Approx(0.27753279).epsilon(1e-7));
  const auto f = wilson_interval(10, 10);
  CHECK(f.high == 1.0);
  for (std::uint64_t n = 1; n <= 60; ++n) {
    for (std::uint64_t k = 0; k <= n; ++k) {
      const auto w = wilson_interval(k, n);
      const double p = static_cast<double>(k) / static_cast<double>(n);
      CHECK(w.low >= 0.0);
      CHECK(w.high <= 1.0);
      CHECK(w.low <= p);
      CHECK(w.high >= p);
    }
  }
  // Exact coverage for n = 30 away from the boundary stays near nominal.
  const std::uint64_t n = 30;
  for (int i = 1; i < 20; ++i) {
    const double p = i / 20.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    double coverage = 0.0;
    for (std::uint64_t k = 0; k <= n; ++k) {
      const auto w = wilson_interval(k, n);
      if (w.low <= p && p <= w.high) coverage += boost::math::pdf(dist, static_cast<double>(k));
    }
    CHECK(coverage >= 0.90);
  }
  CHECK(disjoint({0.1, 0.2}, {0.3, 0.4}));
  CHECK_FALSE(disjoint({0.1, 0.3}, {0.3, 0.4}));
  CHECK_THROWS_AS(static_cast<void>(wilson_interval(1, 0)), std::invalid_argument);
}

TEST_CASE("trial spec validation") {
  auto s = exp_point(10, 1, 11);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.n_flips = 2;
  s.n_patterns = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.n_patterns = 2;
  s.target = Target::fixed(2);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.target = Target::fixed(1);
  CHECK_NOTHROW(s.validate());
  for (auto k : {SchedulerKind::SyncOneStep, SchedulerKind::AsyncOnePass, SchedulerKind::ToFixedPoint}) {
    CHECK(parse_scheduler(to_string(k)) == k);
  }
  for (auto c : {Corruption::Sphere, Corruption::Ball}) CHECK(parse_corruption(to_string(c)) == c);
}
