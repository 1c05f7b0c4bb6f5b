#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcsg/optimizers.hpp"

namespace vcsg {

// Inputs for the convergence-side calculators. B and b are real-valued so the
// positivity scan can sweep fractional batch sizes; runs always pass integers.
struct BoundInputs {
  double L = 1.0;
  double gamma = 1.0 / 3.0;
  double alpha = 0.0;
  double beta = 0.25;
  double lambda = 0.5;
  double delta_f = 1.0;  // f(x0) - f* (or a proxy from below)
  double s_star = 0.0;   // variance upper bound (or an empirical proxy)
  double sigma = 0.0;
  double rho = 0.9;
  double epsilon = 1e-3;
  std::size_t n = 3;
  std::size_t T = 1;
  double B = 3.0;
  double b = 1.0;
};

namespace detail {

inline void check_bound_inputs(const BoundInputs& in, double min_B) {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("bound inputs: ") + what +
                                  " must be finite and non-negative");
  };
  nonneg(in.L, "L");
  nonneg(in.gamma, "gamma");
  nonneg(in.alpha, "alpha");
  nonneg(in.beta, "beta");
  nonneg(in.delta_f, "delta_f");
  nonneg(in.s_star, "s_star");
  nonneg(in.sigma, "sigma");
  nonneg(in.rho, "rho");
  nonneg(in.epsilon, "epsilon");
  nonneg(in.b, "b");
  if (!(in.rho < 1.0)) throw std::invalid_argument("bound inputs: rho must be < 1");
  if (!(in.lambda > 0.0 && in.lambda < 1.0))
    throw std::invalid_argument("bound inputs: lambda must lie in (0, 1)");
  if (!(in.B >= min_B))
    throw std::invalid_argument("bound inputs: B below the formula's domain");
}

}  // namespace detail

// One-epoch decrement coefficient for the weighted-unbiased analysis; the
// stated positivity region is B >= 3, gamma <= 13/50.
inline double theta_unbiased(const BoundInputs& in) {
  detail::check_bound_inputs(in, 3.0);
  const double om = 1.0 - in.lambda;
  const double inner = 2.0 * in.gamma * std::pow(in.B, in.alpha * in.beta - in.alpha) +
                       2.0 * std::pow(in.B, in.beta - 1.0);
  return 2.0 * om - inner * om * om - 1.16 * om * om;
}

// Biased-analysis counterpart; the curvature term enters the bracket with a
// negative sign, so Theta = theta + 4 L B^(2 alpha - 2) (1 - lambda)^2.
inline double theta_biased(const BoundInputs& in) {
  detail::check_bound_inputs(in, 1.0);
  const double om = 1.0 - in.lambda;
  const double inner = 2.0 * in.gamma * std::pow(in.B, in.alpha * in.beta - in.alpha) +
                       2.0 * std::pow(in.B, in.beta - 1.0) -
                       4.0 * in.L * std::pow(in.B, 2.0 * in.alpha - 2.0);
  return 2.0 * om - inner * om * om - 1.16 * om * om;
}

// Without-replacement variance deflation (n - B) / ((n - 1) B); zero for
// full-batch anchors.
inline double finite_population_factor(std::size_t n, double B) {
  if (n < 2) throw std::invalid_argument("finite_population_factor: n must be >= 2");
  if (!(B >= 1.0)) throw std::invalid_argument("finite_population_factor: B must be >= 1");
  const double nd = static_cast<double>(n);
  if (B >= nd) return 0.0;
  return (nd - B) / ((nd - 1.0) * B);
}

// Sum over epochs of b^(alpha-1) B^(1-alpha) for a constant schedule: the
// output-weight normalizer in the one-epoch bounds.
inline double epoch_weight_sum(const BoundInputs& in) {
  if (in.T < 1) throw std::invalid_argument("bound inputs: T must be >= 1");
  if (!(in.b >= 1.0)) throw std::invalid_argument("bound inputs: b must be >= 1");
  return static_cast<double>(in.T) * std::pow(in.b, in.alpha - 1.0) *
         std::pow(in.B, 1.0 - in.alpha);
}

enum class BoundKind { Unbiased, Biased };

inline const char* to_string(BoundKind k) {
  return k == BoundKind::Unbiased ? "unbiased" : "biased";
}

namespace detail {

// Shared RHS shape: (2L/gamma) Df / (theta * sum) + weight * I * S / (theta * B^(1-2a)).
// Exposed so monotonicity-in-theta can be probed directly.
inline double upper_bound_given_theta(const BoundInputs& in, double theta, double var_weight) {
  if (!(theta > 0.0)) throw std::domain_error("upper bound: theta <= 0 makes the bound vacuous");
  if (!(in.gamma > 0.0)) throw std::invalid_argument("bound inputs: gamma must be positive");
  const double first = (2.0 * in.L / in.gamma) * in.delta_f / (theta * epoch_weight_sum(in));
  const double deflate = finite_population_factor(in.n, in.B);
  const double second =
      var_weight * deflate * in.s_star / (theta * std::pow(in.B, 1.0 - 2.0 * in.alpha));
  return first + second;
}

}  // namespace detail

inline double upper_bound_unbiased(const BoundInputs& in) {
  const double th = theta_unbiased(in);
  const double w = 2.0 * std::pow(in.lambda, 4);
  return detail::upper_bound_given_theta(in, th, w);
}

inline double upper_bound_biased(const BoundInputs& in) {
  const double th = theta_biased(in);
  const double om = 1.0 - in.lambda;
  return detail::upper_bound_given_theta(in, th, 2.0 * om * om);
}

// Order-of-magnitude work estimate with every hidden constant set to 1:
// B + sqrt(B) L delta_f / eps at B = min(1/eps, sqrt(n)).
inline double complexity_bound(const BoundInputs& in) {
  if (!(in.epsilon > 0.0)) throw std::invalid_argument("complexity_bound: epsilon must be > 0");
  const double B = std::min(1.0 / in.epsilon, std::sqrt(static_cast<double>(in.n)));
  return B + std::sqrt(B) * in.L * in.delta_f / in.epsilon;
}

struct GridPoint {
  double B = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
};

struct PositivityGridReport {
  std::size_t total = 0;
  std::size_t non_positive = 0;
  GridPoint worst{};  // grid minimizer of theta
  bool all_positive() const { return non_positive == 0; }
};

// Dense scan of theta over the stated positivity region: B log-spaced in
// [3, 1e4], gamma in [0, 0.26], lambda in [0.01, 0.99], all endpoints
// included, per_axis points per axis.
inline PositivityGridReport scan_theta_positivity(std::size_t per_axis = 100, double alpha = 0.0,
                                                  double beta = 0.25) {
  if (per_axis < 2) throw std::invalid_argument("scan_theta_positivity: need >= 2 points per axis");
  PositivityGridReport rep;
  rep.worst.theta = std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(per_axis - 1);
  const double lb = std::log10(3.0);
  BoundInputs in;
  in.alpha = alpha;
  in.beta = beta;
  for (std::size_t ib = 0; ib < per_axis; ++ib) {
    in.B = std::pow(10.0, lb + (4.0 - lb) * static_cast<double>(ib) / m);
    for (std::size_t ig = 0; ig < per_axis; ++ig) {
      in.gamma = 0.26 * static_cast<double>(ig) / m;
      for (std::size_t il = 0; il < per_axis; ++il) {
        in.lambda = 0.01 + (0.99 - 0.01) * static_cast<double>(il) / m;
        const double th = theta_unbiased(in);
        ++rep.total;
        if (!(th > 0.0)) ++rep.non_positive;
        if (th < rep.worst.theta) rep.worst = {in.B, in.gamma, in.lambda, th};
      }
    }
  }
  return rep;
}

struct EpochBoundCheck {
  std::size_t epoch = 0;
  double empirical = 0.0;  // seed-mean of the post-epoch gradient norm squared
  double rhs = 0.0;        // bound evaluated with the epoch budget truncated at j
  bool holds = false;
};

struct BoundReport {
  bool applicable = false;
  std::string reason;  // set when not applicable
  double theta = 0.0;  // theta or Theta, per kind
  std::vector<EpochBoundCheck> epochs;
  bool all_hold = false;
};

// Seed-averaged smoke test of the one-epoch bounds against real traces from a
// constant-schedule run. Inapplicable (no assertion) when the traces do not
// match the stated schedule or the preconditions fail; otherwise each epoch j
// compares the seed mean of ||grad f(x_j)||^2 against the RHS with budget j.
inline BoundReport verify_theorem_bound(const std::vector<RunTrace>& traces,
                                        const BoundInputs& in, BoundKind kind) {
  BoundReport rep;
  auto inapplicable = [&](std::string why) {
    rep.applicable = false;
    rep.reason = std::move(why);
    return rep;
  };
  if (traces.empty()) return inapplicable("no traces supplied");
  const std::size_t epochs = traces.front().epochs.size();
  if (epochs == 0) return inapplicable("traces have no epochs");
  for (const auto& t : traces)
    if (t.epochs.size() != epochs) return inapplicable("traces disagree on epoch count");

  const auto B = static_cast<std::size_t>(in.B);
  const auto b = static_cast<std::size_t>(in.b);
  if (static_cast<double>(B) != in.B || static_cast<double>(b) != in.b)
    return inapplicable("preconditions unmet: B and b must be integral for a run check");
  const double eta_expect = in.gamma / in.L * std::pow(in.b / in.B, in.alpha);
  for (const auto& t : traces)
    for (const auto& rec : t.epochs) {
      if (rec.B != B || rec.b != b)
        return inapplicable("preconditions unmet: trace schedule is not the stated constant (B, b)");
      if (std::abs(rec.eta - eta_expect) > 1e-9 * std::max(1.0, std::abs(eta_expect)))
        return inapplicable("preconditions unmet: trace step size differs from gamma (b/B)^alpha / L");
    }
  const double b_expect = std::pow(in.B, in.beta);
  if (std::abs(in.b - b_expect) > 1e-9 * std::max(1.0, b_expect))
    return inapplicable("preconditions unmet: b differs from B^beta");
  const double gamma_cap = kind == BoundKind::Unbiased ? 13.0 / 50.0 : 1.0 / 3.0;
  if (in.gamma > gamma_cap + 1e-12)
    return inapplicable("preconditions unmet: gamma outside the theorem range");
  double th = 0.0;
  try {
    th = kind == BoundKind::Unbiased ? theta_unbiased(in) : theta_biased(in);
  } catch (const std::invalid_argument& e) {
    return inapplicable(std::string("preconditions unmet: ") + e.what());
  }
  rep.theta = th;
  if (!(th > 0.0)) return inapplicable("preconditions unmet: decrement coefficient non-positive");

  rep.applicable = true;
  rep.all_hold = true;
  const double nseeds = static_cast<double>(traces.size());
  for (std::size_t j = 1; j <= epochs; ++j) {
    double mean = 0.0;
    for (const auto& t : traces) mean += t.epochs[j - 1].grad_norm_sq;
    mean /= nseeds;
    BoundInputs at_j = in;
    at_j.T = j;
    const double rhs =
        kind == BoundKind::Unbiased ? upper_bound_unbiased(at_j) : upper_bound_biased(at_j);
    const bool holds = mean <= rhs;
    rep.epochs.push_back({j, mean, rhs, holds});
    rep.all_hold = rep.all_hold && holds;
  }
  return rep;
}

}  // namespace vcsg
