#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "test_support.hpp"
#include "vcsg/schedules.hpp"

using namespace vcsg;
using namespace vcsg::testing;

namespace {

ScheduleConfig base_config() {
  ScheduleConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.sigma = 1.0;
  cfg.rho = 0.9;
  cfg.L = 1.0;
  cfg.n = 1000;
  return cfg;
}

}  // namespace

TEST_CASE("regime strings round-trip") {
  for (Regime r : {Regime::Init, Regime::Eps, Regime::N, Regime::Fixed}) {
    const auto back = regime_from_string(to_string(r));
    REQUIRE(back.has_value());
    CHECK(*back == r);
  }
  CHECK_FALSE(regime_from_string("bogus").has_value());
  CHECK_FALSE(regime_from_string("").has_value());
}

TEST_CASE("batch size matches the frozen worked example") {
  // S=1, eps=0.01, n=10^6, sigma=1, rho=0.9, j=1: the accuracy term is 100,
  // the size term is 10^6/(1 + 0.14*1000*0.81) = 8741.25874125874, so the
  // accuracy regime wins with B=100.
  ScheduleConfig cfg = base_config();
  cfg.n = 1000000;
  cfg.epsilon = 0.01;
  const BatchChoice c = batch_size(1, 1.0, cfg);
  CHECK(c.B == 100);
  CHECK(c.regime == Regime::Eps);

  // Push the accuracy term above the size term: B rounds the frozen 8741.2587.
  cfg.epsilon = 1e-4;  // accuracy term becomes 10^4 > 8741.26
  const BatchChoice d = batch_size(1, 1.0, cfg);
  CHECK(d.B == 8741);
  CHECK(d.regime == Regime::N);
}

TEST_CASE("degenerate variance proxy falls back to the smallest batch") {
  ScheduleConfig cfg = base_config();
  const BatchChoice c = batch_size(1, 0.0, cfg);
  CHECK(c.B == 3);
  CHECK(c.regime == Regime::N);
}

TEST_CASE("batch sizes round half up and clamp to the valid range") {
  ScheduleConfig cfg = base_config();
  cfg.sigma = 0.0;  // size term collapses to n
  cfg.epsilon = 1.0;
  cfg.n = 10;
  CHECK(batch_size(1, 3.5, cfg).B == 4);   // 3.5 rounds up
  CHECK(batch_size(1, 2.5, cfg).B == 3);   // 2.5 rounds to 3, already the floor
  CHECK(batch_size(1, 2.4, cfg).B == 3);   // 2.4 rounds to 2, clamped up to 3
  CHECK(batch_size(1, 50.0, cfg).B == 10); // accuracy term 50 clamps to n
  CHECK(batch_size(1, 50.0, cfg).regime == Regime::N);  // size term n=10 is smaller
}

TEST_CASE("regime tie goes to the accuracy regime") {
  ScheduleConfig cfg = base_config();
  cfg.sigma = 0.0;
  cfg.epsilon = 1.0;
  cfg.n = 10;
  const BatchChoice c = batch_size(1, 10.0, cfg);  // both terms exactly n = 10
  CHECK(c.B == 10);
  CHECK(c.regime == Regime::Eps);
}

TEST_CASE("zero decay magnitude collapses the size term to n") {
  ScheduleConfig cfg = base_config();
  cfg.sigma = 0.0;
  cfg.n = 500;
  cfg.epsilon = 1e-9;  // accuracy term enormous
  const BatchChoice c = batch_size(3, 2.0, cfg);
  CHECK(c.B == 500);
  CHECK(c.regime == Regime::N);
}

TEST_CASE("batch size validates its inputs") {
  ScheduleConfig cfg = base_config();
  CHECK_THROWS_AS(batch_size(0, 1.0, cfg), std::invalid_argument);  // epochs 1-based
  {
    ScheduleConfig bad = cfg;
    bad.n = 2;
    CHECK_THROWS_AS(batch_size(1, 1.0, bad), std::invalid_argument);
  }
  {
    ScheduleConfig bad = cfg;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(batch_size(1, 1.0, bad), std::invalid_argument);
  }
  {
    ScheduleConfig bad = cfg;
    bad.rho = 1.0;
    CHECK_THROWS_AS(batch_size(1, 1.0, bad), std::invalid_argument);
  }
  {
    ScheduleConfig bad = cfg;
    bad.sigma = -0.1;
    CHECK_THROWS_AS(batch_size(1, 1.0, bad), std::invalid_argument);
  }
  {
    ScheduleConfig bad = cfg;
    bad.c_B = 0.0;
    CHECK_THROWS_AS(batch_size(1, 1.0, bad), std::invalid_argument);
  }
}

TEST_CASE("epoch resolution fills in the regime's minibatch, step, and estimator") {
  ScheduleConfig cfg = base_config();
  cfg.sigma = 0.0;
  cfg.epsilon = 1.0;
  cfg.n = 1000;
  cfg.L = 2.0;

  SECTION("accuracy regime: fourth-root minibatch and constant step") {
    const EpochDecision d = resolve_epoch(1, 16.0, cfg);  // accuracy term exactly 16
    CHECK(d.regime == Regime::Eps);
    CHECK(d.B == 16);
    CHECK(d.b == 2);  // 16^(1/4)
    CHECK(d.eta == 1.0 / (3.0 * 2.0));
    CHECK(d.estimator.family == EstimatorFamily::WeightedUnbiased);
    CHECK(d.estimator.weight == Catch::Approx(0.3219463873877435).margin(1e-15));
  }

  SECTION("size regime: singleton minibatch and root-B damped step") {
    ScheduleConfig c2 = cfg;
    c2.n = 100;
    c2.epsilon = 1e-9;  // accuracy term huge -> size regime, B = n = 100
    const EpochDecision d = resolve_epoch(1, 5.0, c2);
    CHECK(d.regime == Regime::N);
    CHECK(d.B == 100);
    CHECK(d.b == 1);
    CHECK(d.eta == Catch::Approx(1.0 / (3.0 * 2.0 * 10.0)).margin(1e-15));
    CHECK(d.estimator.family == EstimatorFamily::Biased);
    CHECK(d.estimator.weight == 0.625);
  }

  SECTION("non-positive smoothness is rejected") {
    ScheduleConfig bad = cfg;
    bad.L = 0.0;
    CHECK_THROWS_AS(resolve_epoch(1, 1.0, bad), std::invalid_argument);
  }
}

TEST_CASE("resolved decisions always satisfy the regime invariants") {
  Rng rng(9090);
  for (int t = 0; t < 2000; ++t) {
    ScheduleConfig cfg;
    cfg.n = 3 + static_cast<std::size_t>(rng.uniform_below(5000));
    cfg.epsilon = std::pow(10.0, -4.0 * rng.uniform_unit());
    cfg.sigma = 2.0 * rng.uniform_unit();
    cfg.rho = 0.05 + 0.9 * rng.uniform_unit();
    cfg.L = 0.1 + 5.0 * rng.uniform_unit();
    cfg.c_B = 0.5 + 12.0 * rng.uniform_unit();
    const auto j = 1 + static_cast<std::size_t>(rng.uniform_below(30));
    const double s = rng.uniform_unit() < 0.05 ? 0.0 : 3.0 * rng.uniform_unit();
    const EpochDecision d = resolve_epoch(j, s, cfg);
    CHECK(d.B >= 3);
    CHECK(d.B <= cfg.n);
    CHECK(d.b >= 1);
    CHECK(d.b <= d.B);
    if (d.regime == Regime::Eps) {
      CHECK(d.b == static_cast<std::size_t>(
                       std::ceil(std::pow(static_cast<double>(d.B), 0.25))));
      CHECK(d.eta == 1.0 / (3.0 * cfg.L));
      CHECK(d.estimator.family == EstimatorFamily::WeightedUnbiased);
    } else {
      CHECK(d.regime == Regime::N);
      CHECK(d.b == 1);
      CHECK(d.eta ==
            Catch::Approx(1.0 / (3.0 * cfg.L * std::sqrt(static_cast<double>(d.B))))
                .margin(1e-18));
      CHECK(d.estimator.family == EstimatorFamily::Biased);
    }
  }
}

TEST_CASE("variance proxy matches a brute-force two-pass computation") {
  QuadraticObjective f(random_centers(6, 3, 3003));
  const Vector anchor = random_point(3, 77, 0.8);
  const std::vector<std::size_t> batch = {0, 2, 4};
  const Vector mean = batch_mean_grad(f, batch, anchor);
  const double got = estimate_s_star(f, batch, anchor, mean, -1.0);

  // Independent straight-line recomputation.
  double want = 0.0;
  Vector g(3);
  for (std::size_t i : batch) {
    f.component_gradient(i, anchor, g);
    for (std::size_t k = 0; k < 3; ++k) {
      const double t = g[k] - mean[k];
      want += t * t;
    }
  }
  want /= 3.0;
  CHECK(got == Catch::Approx(want).margin(1e-12));
  CHECK(got > 0.0);
}

TEST_CASE("identical components have zero within-batch variance") {
  ConstGradObjective f({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  const Vector anchor = {0.5, -0.5};
  const std::vector<std::size_t> batch = {0, 1, 3};
  const Vector mean = batch_mean_grad(f, batch, anchor);
  CHECK(estimate_s_star(f, batch, anchor, mean, 7.0) == 0.0);
}

TEST_CASE("singleton anchor batches keep the previous variance proxy") {
  QuadraticObjective f(random_centers(4, 2, 4004));
  const Vector anchor = {0.0, 0.0};
  const std::vector<std::size_t> batch = {2};
  const Vector mean = batch_mean_grad(f, batch, anchor);
  CHECK(estimate_s_star(f, batch, anchor, mean, 3.25) == 3.25);
}

TEST_CASE("a full-population anchor batch reproduces the population variance") {
  QuadraticObjective f(random_centers(9, 4, 5005));
  const Vector anchor = random_point(4, 31);
  std::vector<std::size_t> all(9);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Vector mean = batch_mean_grad(f, all, anchor);
  IfoCounter scratch;
  CHECK(estimate_s_star(f, all, anchor, mean, 0.0) == variance_S(f, anchor, scratch));
}

TEST_CASE("variance proxy rejects malformed inputs") {
  QuadraticObjective f(random_centers(4, 2, 6006));
  const Vector anchor = {0.0, 0.0};
  const Vector mean2 = {0.0, 0.0};
  const Vector mean1 = {0.0};
  CHECK_THROWS_AS(estimate_s_star(f, std::vector<std::size_t>{}, anchor, mean2, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_s_star(f, std::vector<std::size_t>{0, 1}, anchor, mean1, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_s_star(f, std::vector<std::size_t>{0, 9}, anchor, mean2, 0.0),
                  std::out_of_range);
}

TEST_CASE("smoothed variance estimate blends half old, half new by default") {
  VarianceEstimate v(0.5);
  CHECK_FALSE(v.initialized());
  v.update(4.0);  // first observation adopted as-is
  CHECK(v.initialized());
  CHECK(v.value() == 4.0);
  v.update(8.0);
  CHECK(v.value() == 6.0);
  v.update(0.0);
  CHECK(v.value() == 3.0);

  VarianceEstimate raw(0.0);  // no smoothing: always the fresh value
  raw.update(4.0);
  raw.update(8.0);
  CHECK(raw.value() == 8.0);

  CHECK_THROWS_AS(VarianceEstimate(1.0), std::invalid_argument);
  CHECK_THROWS_AS(VarianceEstimate(-0.1), std::invalid_argument);
  VarianceEstimate w(0.5);
  CHECK_THROWS_AS(w.update(-1.0), std::invalid_argument);
}

TEST_CASE("unbiased batch floor matches the frozen worked example") {
  // lambda=0.32, n=10^4, S=1, sigma=1, rho=0.9, j=1:
  // 10^4/(1 + 0.1024*100*0.81) = 1075.9166810122222.
  CHECK(batch_lower_bound_unbiased(10000, 1.0, 0.32, 1.0, 0.9, 1) ==
        Catch::Approx(1075.9166810122222).margin(1e-9));
  // sigma = 0 collapses the bound to n.
  CHECK(batch_lower_bound_unbiased(10000, 1.0, 0.32, 0.0, 0.9, 1) == 10000.0);
  // zero variance proxy -> no requirement.
  CHECK(batch_lower_bound_unbiased(10000, 0.0, 0.32, 1.0, 0.9, 1) == 0.0);
}

TEST_CASE("biased batch floor uses the piecewise weight constant") {
  // Below the crossover the constant is (1-w)^2; at w=5/8 that is (3/8)^2 =
  // 0.140625, the rounded 0.14 in the controller's batch rule.
  const double below = batch_lower_bound_biased(10000, 1.0, 0.625, 1.0, 0.9, 1);
  const double plain = detail::batch_floor(10000, 1.0, 0.140625, 1.0, 0.9, 1);
  CHECK(below == plain);

  // Above the crossover: w=0.9 -> (3*0.81 - 1.8)^2 = 0.3969 and the frozen
  // bound value 301.6691353257573.
  CHECK(batch_lower_bound_biased(10000, 1.0, 0.9, 1.0, 0.9, 1) ==
        Catch::Approx(301.6691353257573).margin(1e-9));

  // The crossover itself is outside the domain, and the two one-sided
  // constants genuinely disagree there (0.0858 vs 0.0074): the floor jumps
  // from about 1258 to about 6265 at these inputs, a factor of ~4.98.
  const double cross = std::sqrt(2.0) / 2.0;
  CHECK_THROWS_AS(batch_lower_bound_biased(10000, 1.0, cross, 1.0, 0.9, 1),
                  std::invalid_argument);
  const double just_below = batch_lower_bound_biased(10000, 1.0, cross - 1e-9, 1.0, 0.9, 1);
  const double just_above = batch_lower_bound_biased(10000, 1.0, cross + 1e-9, 1.0, 0.9, 1);
  CHECK(just_above - just_below > 5000.0);
  CHECK(just_above > 4.9 * just_below);
}

TEST_CASE("batch floors are non-decreasing in the epoch index") {
  for (std::size_t j = 1; j < 8; ++j) {
    CHECK(batch_lower_bound_unbiased(5000, 2.0, 0.4, 1.5, 0.8, j) <=
          batch_lower_bound_unbiased(5000, 2.0, 0.4, 1.5, 0.8, j + 1));
    CHECK(batch_lower_bound_biased(5000, 2.0, 0.3, 1.5, 0.8, j) <=
          batch_lower_bound_biased(5000, 2.0, 0.3, 1.5, 0.8, j + 1));
  }
}

TEST_CASE("batch floors validate their inputs") {
  CHECK_THROWS_AS(batch_lower_bound_unbiased(0, 1.0, 0.5, 1.0, 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, -1.0, 0.5, 1.0, 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, 1.0, 0.0, 1.0, 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, 1.0, 1.0, 1.0, 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, 1.0, 0.5, -1.0, 0.9, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, 1.0, 0.5, 1.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_lower_bound_unbiased(10, 1.0, 0.5, 1.0, 0.9, 0), std::invalid_argument);
}
