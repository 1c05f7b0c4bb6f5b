#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "vcsg/estimators.hpp"
#include "vcsg/oracle.hpp"

namespace vcsg {

// Epoch regime of the adaptive controller. `Init` marks the controller's fixed
// full-batch first epoch; `Fixed` marks constant-schedule algorithms (no
// regime logic at all).
enum class Regime { Init, Eps, N, Fixed };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Init: return "init";
    case Regime::Eps: return "eps";
    case Regime::N: return "n";
    case Regime::Fixed: return "fixed";
  }
  return "?";
}

inline std::optional<Regime> regime_from_string(std::string_view s) {
  if (s == "init") return Regime::Init;
  if (s == "eps") return Regime::Eps;
  if (s == "n") return Regime::N;
  if (s == "fixed") return Regime::Fixed;
  return std::nullopt;
}

struct ScheduleConfig {
  double epsilon = 1e-3;     // target accuracy on ||grad f||^2
  double sigma = 1.0;        // decay magnitude in the size-driven batch term
  double rho = 0.9;          // decay rate, in (0, 1)
  double gamma = 1.0 / 3.0;  // step-size factor (controller requires <= 1/3)
  double L = 1.0;            // smoothness constant
  double alpha = 0.0;        // step/batch coupling exponent (analysis side)
  double beta = 0.25;        // minibatch coupling exponent (analysis side)
  std::size_t n = 0;         // number of components
  std::size_t T = 100;       // epoch budget
  double c_B = 1.0;          // multiplier on the accuracy-driven batch term
  double s_star_smoothing = 0.5;  // blend factor for the variance proxy
};

struct BatchChoice {
  std::size_t B = 3;
  Regime regime = Regime::N;
};

namespace detail {
inline std::size_t round_half_up_clamped(double x, std::size_t lo, std::size_t hi) {
  double r = std::floor(x + 0.5);
  if (!(r >= static_cast<double>(lo))) return lo;  // also catches NaN
  if (r >= static_cast<double>(hi)) return hi;
  return static_cast<std::size_t>(r);
}
}  // namespace detail

// Adaptive anchor batch for epoch j (1-based):
//
//   B_j = min( c_B * S / eps,  n * S / (S + 0.14 * sqrt(n) * sigma * rho^(2j)) )
//
// rounded half-up and clamped to [3, n]. The regime is Eps iff the
// accuracy-driven term is the (weak) minimum. The 0.14 decay constant is the
// biased estimator's (1 - w)^2 at its optimal weight 5/8, truncated to two
// digits. A non-positive variance proxy degenerates to the smallest batch.
inline BatchChoice batch_size(std::size_t j, double s_star, const ScheduleConfig& cfg) {
  if (cfg.n < 3) throw std::invalid_argument("batch_size: schedule needs n >= 3");
  if (j == 0) throw std::invalid_argument("batch_size: epochs are 1-based");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("batch_size: epsilon must be positive");
  if (!(cfg.rho > 0.0) || !(cfg.rho < 1.0))
    throw std::invalid_argument("batch_size: rho must lie in (0, 1)");
  if (cfg.sigma < 0.0) throw std::invalid_argument("batch_size: sigma must be >= 0");
  if (!(cfg.c_B > 0.0)) throw std::invalid_argument("batch_size: c_B must be positive");
  if (!(s_star > 0.0)) return {std::min<std::size_t>(3, cfg.n), Regime::N};
  const double nd = static_cast<double>(cfg.n);
  const double term_eps = cfg.c_B * s_star / cfg.epsilon;
  const double decay = 0.14 * std::sqrt(nd) * cfg.sigma *
                       std::pow(cfg.rho, 2.0 * static_cast<double>(j));
  const double term_n = nd * s_star / (s_star + decay);
  const Regime regime = term_eps <= term_n ? Regime::Eps : Regime::N;
  const double chosen = term_eps <= term_n ? term_eps : term_n;
  return {detail::round_half_up_clamped(chosen, 3, cfg.n), regime};
}

struct EpochDecision {
  Regime regime = Regime::N;
  std::size_t B = 3;
  std::size_t b = 1;
  double eta = 0.0;
  EstimatorKind estimator{};
};

// Batch choice plus the regime's minibatch, step size, and estimator family:
//
//   Eps regime: b = ceil(B^(1/4)),  eta = 1/(3L),   weighted-unbiased family
//               (the engine picks the weight per step: optimal vs 1/2);
//   N   regime: b = 1,              eta = B^(-1/2)/(3L),  biased(5/8).
inline EpochDecision resolve_epoch(std::size_t j, double s_star, const ScheduleConfig& cfg) {
  if (!(cfg.L > 0.0)) throw std::invalid_argument("resolve_epoch: L must be positive");
  const auto [B, regime] = batch_size(j, s_star, cfg);
  EpochDecision out;
  out.regime = regime;
  out.B = B;
  if (regime == Regime::Eps) {
    out.b = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(B), 0.25)));
    out.eta = 1.0 / (3.0 * cfg.L);
    out.estimator = EstimatorKind::weighted_unbiased(optimal_weight_unbiased());
  } else {
    out.b = 1;
    out.eta = 1.0 / (3.0 * cfg.L * std::sqrt(static_cast<double>(B)));
    out.estimator = EstimatorKind::biased(optimal_weight_biased);
  }
  return out;
}

// Within-batch empirical variance of component gradients about the batch mean
// at the anchor point:
//
//   (1/|I|) * sum_{i in I} || grad f_i(anchor) - anchor_grad ||^2
//
// The components were just evaluated to form anchor_grad, so this charges no
// new oracle cost (determinism makes re-evaluation a cache read). A singleton
// batch has no within-batch spread: the previous proxy is kept.
inline double estimate_s_star(const FiniteSumObjective& f, std::span<const std::size_t> batch,
                              std::span<const double> anchor_point, const Vector& anchor_grad,
                              double previous) {
  if (anchor_grad.size() != f.dimension())
    throw std::invalid_argument("estimate_s_star: anchor gradient has wrong dimension");
  if (batch.empty()) throw std::invalid_argument("estimate_s_star: empty anchor batch");
  if (batch.size() == 1) return previous;
  Vector g(f.dimension());
  double acc = 0.0;
  for (std::size_t i : batch) {
    if (i >= f.num_components())
      throw std::out_of_range("estimate_s_star: component index out of range");
    f.component_gradient(i, anchor_point, g);
    double dev = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g[k] - anchor_grad[k];
      dev += t * t;
    }
    acc += dev;
  }
  return acc / static_cast<double>(batch.size());
}

// Smoothed variance proxy: value <- s * old + (1 - s) * fresh; the first
// observation is adopted as-is.
class VarianceEstimate {
 public:
  explicit VarianceEstimate(double smoothing) : smoothing_(smoothing) {
    if (smoothing < 0.0 || smoothing >= 1.0)
      throw std::invalid_argument("variance smoothing must lie in [0, 1)");
  }
  bool initialized() const { return initialized_; }
  double value() const { return value_; }
  void update(double fresh) {
    if (fresh < 0.0) throw std::invalid_argument("variance proxy cannot be negative");
    value_ = initialized_ ? smoothing_ * value_ + (1.0 - smoothing_) * fresh : fresh;
    initialized_ = true;
  }

 private:
  double smoothing_;
  double value_ = 0.0;
  bool initialized_ = false;
};

namespace detail {
inline double batch_floor(std::size_t n, double s_star, double c, double sigma, double rho,
                          std::size_t j) {
  if (n == 0) throw std::invalid_argument("batch floor: n must be positive");
  if (s_star < 0.0) throw std::invalid_argument("batch floor: variance must be >= 0");
  if (sigma < 0.0) throw std::invalid_argument("batch floor: sigma must be >= 0");
  if (!(rho > 0.0) || !(rho < 1.0)) throw std::invalid_argument("batch floor: rho must be in (0, 1)");
  if (j == 0) throw std::invalid_argument("batch floor: epochs are 1-based");
  if (s_star == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  const double decay = c * std::sqrt(nd) * sigma * std::pow(rho, 2.0 * static_cast<double>(j));
  return nd * s_star / (s_star + decay);
}
}  // namespace detail

// Smallest anchor batch keeping the weighted-unbiased estimator's leftover
// variance dominated at epoch j:  n S / (S + w^2 sqrt(n) sigma rho^(2j)).
inline double batch_lower_bound_unbiased(std::size_t n, double s_star, double weight,
                                         double sigma, double rho, std::size_t j) {
  EstimatorKind::check_weight(weight);
  return detail::batch_floor(n, s_star, weight * weight, sigma, rho, j);
}

// Biased counterpart; the weight enters through
//   c(w) = (1-w)^2         for w < sqrt(2)/2,
//   c(w) = (3w^2 - 2w)^2   for w > sqrt(2)/2,
// with the crossover point itself outside the domain.
inline double batch_lower_bound_biased(std::size_t n, double s_star, double weight, double sigma,
                                       double rho, std::size_t j) {
  EstimatorKind::check_weight(weight);
  const double crossover = std::sqrt(2.0) / 2.0;
  if (weight == crossover)
    throw std::invalid_argument("biased batch floor is undefined at weight sqrt(2)/2");
  const double c = weight < crossover ? (1.0 - weight) * (1.0 - weight)
                                      : (3.0 * weight * weight - 2.0 * weight) *
                                            (3.0 * weight * weight - 2.0 * weight);
  return detail::batch_floor(n, s_star, c, sigma, rho, j);
}

}  // namespace vcsg
