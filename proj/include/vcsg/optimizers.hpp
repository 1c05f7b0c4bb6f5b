#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "vcsg/estimators.hpp"
#include "vcsg/oracle.hpp"
#include "vcsg/sampler.hpp"
#include "vcsg/schedules.hpp"

namespace vcsg {

enum class Algorithm { Vcsg, BatchingSvrg, Sgd, Svrg, Scsg };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Vcsg: return "vcsg";
    case Algorithm::BatchingSvrg: return "batching_svrg";
    case Algorithm::Sgd: return "sgd";
    case Algorithm::Svrg: return "svrg";
    case Algorithm::Scsg: return "scsg";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_string(std::string_view s) {
  if (s == "vcsg") return Algorithm::Vcsg;
  if (s == "batching_svrg") return Algorithm::BatchingSvrg;
  if (s == "sgd") return Algorithm::Sgd;
  if (s == "svrg") return Algorithm::Svrg;
  if (s == "scsg") return Algorithm::Scsg;
  return std::nullopt;
}

// One row per epoch. `cumulative_ifo` is the work ledger after the epoch:
// exactly sum over epochs so far of (B + b * N); trace evaluations (f and the
// gradient norm below) run on a separate counter and never appear in it.
struct TraceRecord {
  std::size_t epoch = 0;  // j, 1-based
  Regime regime = Regime::Fixed;
  std::size_t B = 0;  // anchor batch size (0 = no anchor, e.g. plain SGD)
  std::size_t b = 0;  // minibatch size
  double eta = 0.0;
  double lambda = 0.0;  // estimator weight in force (0 where meaningless)
  std::uint64_t inner_steps = 0;  // N
  std::uint64_t cumulative_ifo = 0;
  double f = 0.0;
  double grad_norm_sq = 0.0;
  double s_star = 0.0;  // smoothed variance proxy (0 before first estimate)
};

struct RunTrace {
  double initial_f = 0.0;
  double initial_grad_norm_sq = 0.0;
  std::vector<TraceRecord> epochs;
  std::uint64_t cap_events = 0;  // clipped geometric draws
  double best_f = std::numeric_limits<double>::infinity();

  // gap to the best value this run has seen (proxy for the true optimality gap)
  double delta_f() const { return initial_f - best_f; }
};

enum class RunStatus { Ok, Diverged };

struct RunResult {
  RunStatus status = RunStatus::Ok;
  Vector output;                  // weighted-sampled snapshot (final iterate for sgd/divergence)
  std::size_t sampled_epoch = 0;  // 1-based; 0 = initial point
  RunTrace trace;
  std::uint64_t work_ifo = 0;  // optimizer ledger
  std::uint64_t eval_ifo = 0;  // trace/stopping evaluations (reported separately)
  std::optional<std::uint64_t> ifo_to_target{};
};

// Per-epoch constants for the fixed-schedule engine; single-entry vectors
// broadcast across all epochs.
struct FixedSchedule {
  std::vector<std::size_t> B{};
  std::vector<std::size_t> b{};
  std::vector<double> eta{};
};

struct RunConfig {
  Algorithm algorithm = Algorithm::Vcsg;
  ScheduleConfig schedule{};
  EstimatorKind estimator = EstimatorKind::plain();  // batching_svrg only
  FixedSchedule fixed{};                             // batching_svrg only
  double eta0 = 0.0;  // sgd base step; 0 picks the default 1/(3 L sqrt(n))
  std::uint64_t seed = 1;
  std::optional<double> epsilon_stop{};  // early stop once grad_norm_sq <= this
  double init_scale = 0.1;
  std::optional<std::uint64_t> init_seed{};  // defaults to a stream derived from `seed`
};

// First cumulative-IFO value at which the trace certifies ||grad f||^2 <= eps
// (0 when the initial point already qualifies).
inline std::optional<std::uint64_t> ifo_to_target(const RunTrace& trace, double eps) {
  if (trace.initial_grad_norm_sq <= eps) return std::uint64_t{0};
  for (const auto& rec : trace.epochs)
    if (rec.grad_norm_sq <= eps) return rec.cumulative_ifo;
  return std::nullopt;
}

// Initial point: init_scale * standard normal per coordinate, drawn from its
// own stream so run-seed changes never shift the start (unless asked to).
inline Vector initial_point(const FiniteSumObjective& f, const RunConfig& cfg) {
  Rng rng(cfg.init_seed.value_or(cfg.seed) ^ 0x9e3779b97f4a7c15ULL);
  Vector x(f.dimension());
  for (double& e : x) e = cfg.init_scale * rng.normal();
  return x;
}

namespace detail {

struct EpochPlan {
  Regime regime = Regime::Fixed;
  std::size_t B = 1;
  std::size_t b = 1;
  double eta = 0.0;
  double lambda_for_trace = 0.0;
};

constexpr double kDivergenceNormSq = 1e16;  // ||x|| > 1e8

inline bool diverged_point(const Vector& x) {
  return !vec::all_finite(x) || vec::norm_sq(x) > kDivergenceNormSq;
}

// Shared anchor-loop engine. Per epoch j = 1..T:
//   1. sample the anchor batch I_j (size B_j), take its gradient at the anchor,
//   2. refresh the variance proxy from I_j's within-batch spread,
//   3. draw N_j ~ Geom(B_j/(B_j+b_j)),
//   4. run N_j inner steps: sample a minibatch, build the direction from
//      (gk, g0, gj) via `direct`, step by eta_j.
// The run seed drives exactly one stream, consumed in the fixed order
// (anchor subset, geometric draw, inner subsets)*, then one output draw.
template <typename Planner, typename Director>
RunResult run_anchor_loop(const FiniteSumObjective& f, const RunConfig& cfg,
                          Planner&& plan_epoch, Director&& direct) {
  const std::size_t n = f.num_components();
  Rng rng(cfg.seed);
  IfoCounter work, eval;
  RunResult res;
  RunTrace& trace = res.trace;

  Vector x = initial_point(f, cfg);
  {
    const FullEval ev0 = evaluate_full(f, x, eval);
    trace.initial_f = ev0.value;
    trace.initial_grad_norm_sq = ev0.grad_norm_sq;
    trace.best_f = ev0.value;
  }
  std::vector<Vector> snapshots{x};
  VarianceEstimate proxy(cfg.schedule.s_star_smoothing);

  bool stopped_early =
      cfg.epsilon_stop && trace.initial_grad_norm_sq <= *cfg.epsilon_stop;

  for (std::size_t j = 1; !stopped_early && j <= cfg.schedule.T; ++j) {
    const EpochPlan plan = plan_epoch(j, proxy);
    if (plan.B == 0 || plan.B > n || plan.b == 0 || plan.b > n)
      throw std::invalid_argument("epoch plan has batch sizes outside [1, n]");
    if (!(plan.eta > 0.0) || !std::isfinite(plan.eta))
      throw std::invalid_argument("epoch plan has a non-positive step size");

    const auto anchor_batch = sample_subset(n, plan.B, rng);
    const Vector anchor = x;
    const Vector gj = grad_batch(f, anchor_batch, anchor, work);
    if (anchor_batch.size() >= 2)
      proxy.update(estimate_s_star(f, anchor_batch, anchor, gj, proxy.value()));

    const GeometricDraw draw = sample_geometric(plan.B, plan.b, rng);
    trace.cap_events += draw.capped ? 1 : 0;

    bool diverged = false;
    for (std::uint64_t k = 0; k < draw.value; ++k) {
      const auto mini = sample_subset(n, plan.b, rng);
      const Vector gk = grad_batch(f, mini, x, work);
      const Vector g0 = batch_mean_grad(f, mini, anchor);
      const Vector v = direct(plan, gk, g0, gj);
      vec::axpy(-plan.eta, v, x);
      if (diverged_point(x)) {
        diverged = true;
        break;
      }
    }
    if (!diverged) {
      const FullEval ev = evaluate_full(f, x, eval);
      if (!std::isfinite(ev.value)) {
        diverged = true;
      } else {
        TraceRecord rec;
        rec.epoch = j;
        rec.regime = plan.regime;
        rec.B = plan.B;
        rec.b = plan.b;
        rec.eta = plan.eta;
        rec.lambda = plan.lambda_for_trace;
        rec.inner_steps = draw.value;
        rec.cumulative_ifo = work.total();
        rec.f = ev.value;
        rec.grad_norm_sq = ev.grad_norm_sq;
        rec.s_star = proxy.value();
        trace.epochs.push_back(rec);
        trace.best_f = std::min(trace.best_f, ev.value);
        snapshots.push_back(x);
        if (cfg.epsilon_stop && ev.grad_norm_sq <= *cfg.epsilon_stop) stopped_early = true;
      }
    }
    if (diverged) {
      res.status = RunStatus::Diverged;
      res.output = x;
      res.sampled_epoch = j;
      res.work_ifo = work.total();
      res.eval_ifo = eval.total();
      return res;
    }
  }

  // Weighted snapshot pick: P(epoch j) proportional to eta_j * B_j / b_j.
  if (trace.epochs.empty()) {
    res.output = snapshots.front();
    res.sampled_epoch = 0;
  } else {
    std::vector<double> weights;
    weights.reserve(trace.epochs.size());
    for (const auto& rec : trace.epochs)
      weights.push_back(rec.eta * static_cast<double>(rec.B) / static_cast<double>(rec.b));
    const std::size_t pick = sample_output_index(weights, rng);
    res.output = snapshots[pick + 1];
    res.sampled_epoch = pick + 1;
  }
  res.work_ifo = work.total();
  res.eval_ifo = eval.total();
  res.ifo_to_target = ifo_to_target(trace, cfg.schedule.epsilon);
  return res;
}

inline EpochPlan plan_from_fixed(const FixedSchedule& sched, std::size_t j, double lambda) {
  auto pick = [&](const auto& v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string("fixed schedule missing ") + what);
    if (v.size() == 1) return v[0];
    if (j - 1 >= v.size())
      throw std::invalid_argument(std::string("fixed schedule too short for epoch budget: ") +
                                  what);
    return v[j - 1];
  };
  EpochPlan plan;
  plan.regime = Regime::Fixed;
  plan.B = pick(sched.B, "B");
  plan.b = pick(sched.b, "b");
  plan.eta = pick(sched.eta, "eta");
  plan.lambda_for_trace = lambda;
  return plan;
}

}  // namespace detail

// Fixed-schedule anchor loop with a fixed estimator (the plain engine).
inline RunResult run_batching_svrg(const FiniteSumObjective& f, const RunConfig& cfg) {
  return detail::run_anchor_loop(
      f, cfg,
      [&](std::size_t j, const VarianceEstimate&) {
        return detail::plan_from_fixed(cfg.fixed, j, cfg.estimator.weight);
      },
      [&](const detail::EpochPlan&, const Vector& gk, const Vector& g0, const Vector& gj) {
        return estimate(cfg.estimator, gk, g0, gj);
      });
}

// Adaptive variance-controlled run. Epoch 1 is a fixed full-batch warm start
// (B = n, b = ceil(n^(1/4)), eta = 1/(3 L sqrt(n)), biased(5/8)); later epochs
// follow resolve_epoch on the smoothed variance proxy. In the Eps regime the
// estimator weight is chosen per step: the optimal unbiased weight while the
// current minibatch gradient is strictly smaller in norm than its anchor
// counterpart, weight 1/2 otherwise (ties included).
inline RunResult run_vcsg(const FiniteSumObjective& f, const RunConfig& cfg) {
  const std::size_t n = f.num_components();
  if (n < 3) throw std::invalid_argument("vcsg needs n >= 3");
  ScheduleConfig sched = cfg.schedule;
  sched.n = n;
  if (!(sched.gamma > 0.0) || sched.gamma > 1.0 / 3.0 + 1e-12)
    throw std::invalid_argument("vcsg: gamma must lie in (0, 1/3]");
  const double nd = static_cast<double>(n);
  return detail::run_anchor_loop(
      f, cfg,
      [&, sched](std::size_t j, const VarianceEstimate& proxy) {
        detail::EpochPlan plan;
        if (j == 1) {
          plan.regime = Regime::Init;
          plan.B = n;
          plan.b = static_cast<std::size_t>(std::ceil(std::pow(nd, 0.25)));
          plan.eta = 1.0 / (3.0 * sched.L * std::sqrt(nd));
          plan.lambda_for_trace = optimal_weight_biased;
          return plan;
        }
        const EpochDecision dec = resolve_epoch(j, proxy.value(), sched);
        plan.regime = dec.regime;
        plan.B = dec.B;
        plan.b = dec.b;
        plan.eta = dec.eta;
        plan.lambda_for_trace =
            dec.regime == Regime::Eps ? optimal_weight_unbiased() : optimal_weight_biased;
        return plan;
      },
      [&](const detail::EpochPlan& plan, const Vector& gk, const Vector& g0, const Vector& gj) {
        if (plan.regime == Regime::Eps) {
          if (vec::norm_sq(gk) < vec::norm_sq(g0))
            return estimate_weighted_unbiased(optimal_weight_unbiased(), gk, g0, gj);
          return estimate_weighted_unbiased(0.5, gk, g0, gj);
        }
        return estimate_biased(optimal_weight_biased, gk, g0, gj);
      });
}

// Full-batch anchors, singleton minibatches, conservative constant step
// 1/(3 L sqrt(n)), half-weighted unbiased estimator.
inline RunResult run_svrg(const FiniteSumObjective& f, const RunConfig& cfg) {
  RunConfig c = cfg;
  const double nd = static_cast<double>(f.num_components());
  c.fixed.B = {f.num_components()};
  c.fixed.b = {1};
  c.fixed.eta = {1.0 / (3.0 * cfg.schedule.L * std::sqrt(nd))};
  c.estimator = EstimatorKind::weighted_unbiased(0.5);
  return run_batching_svrg(f, c);
}

// Fixed subsampled anchors: B = min(ceil(S0/eps), n) from the variance at the
// initial point, b = 1, eta = (gamma/L) * B^(-2/3), plain estimator.
inline RunResult run_scsg(const FiniteSumObjective& f, const RunConfig& cfg) {
  RunConfig c = cfg;
  IfoCounter probe;
  const Vector x0 = initial_point(f, cfg);
  const double s0 = variance_S(f, x0, probe);
  const double nd = static_cast<double>(f.num_components());
  double Bd = std::ceil(s0 / cfg.schedule.epsilon);
  if (!(Bd >= 1.0)) Bd = 1.0;
  if (Bd > nd) Bd = nd;
  const auto B = static_cast<std::size_t>(Bd);
  c.fixed.B = {B};
  c.fixed.b = {1};
  c.fixed.eta = {cfg.schedule.gamma / cfg.schedule.L * std::pow(Bd, -2.0 / 3.0)};
  c.estimator = EstimatorKind::plain();
  RunResult res = run_batching_svrg(f, c);
  res.eval_ifo += probe.total();  // the B-sizing probe is an evaluation cost
  return res;
}

// Scaled stochastic gradient baseline: n single-component steps per epoch,
//   x <- x - (eta0 / j) * 0.5 * grad f_i(x),
// indices uniform with replacement. Ledger rows carry B = 0, b = 1, N = n so
// the per-epoch cost identity B + b*N = n stays exact.
inline RunResult run_sgd(const FiniteSumObjective& f, const RunConfig& cfg) {
  const std::size_t n = f.num_components();
  const double nd = static_cast<double>(n);
  const double eta0 =
      cfg.eta0 > 0.0 ? cfg.eta0 : 1.0 / (3.0 * cfg.schedule.L * std::sqrt(nd));
  Rng rng(cfg.seed);
  IfoCounter work, eval;
  RunResult res;
  RunTrace& trace = res.trace;
  Vector x = initial_point(f, cfg);
  {
    const FullEval ev0 = evaluate_full(f, x, eval);
    trace.initial_f = ev0.value;
    trace.initial_grad_norm_sq = ev0.grad_norm_sq;
    trace.best_f = ev0.value;
  }
  bool stopped_early = cfg.epsilon_stop && trace.initial_grad_norm_sq <= *cfg.epsilon_stop;
  for (std::size_t j = 1; !stopped_early && j <= cfg.schedule.T; ++j) {
    const double eta_j = eta0 / static_cast<double>(j);
    bool diverged = false;
    for (std::size_t t = 0; t < n; ++t) {
      const auto i = static_cast<std::size_t>(rng.uniform_below(n));
      const Vector g = grad_component(f, i, x, work);
      vec::axpy(-eta_j * 0.5, g, x);
      if (detail::diverged_point(x)) {
        diverged = true;
        break;
      }
    }
    if (!diverged) {
      const FullEval ev = evaluate_full(f, x, eval);
      if (!std::isfinite(ev.value)) {
        diverged = true;
      } else {
        TraceRecord rec;
        rec.epoch = j;
        rec.regime = Regime::Fixed;
        rec.B = 0;
        rec.b = 1;
        rec.eta = eta_j;
        rec.lambda = 0.0;
        rec.inner_steps = n;
        rec.cumulative_ifo = work.total();
        rec.f = ev.value;
        rec.grad_norm_sq = ev.grad_norm_sq;
        rec.s_star = 0.0;
        trace.epochs.push_back(rec);
        trace.best_f = std::min(trace.best_f, ev.value);
        if (cfg.epsilon_stop && ev.grad_norm_sq <= *cfg.epsilon_stop) stopped_early = true;
      }
    }
    if (diverged) {
      res.status = RunStatus::Diverged;
      res.output = x;
      res.sampled_epoch = j;
      res.work_ifo = work.total();
      res.eval_ifo = eval.total();
      return res;
    }
  }
  res.output = x;
  res.sampled_epoch = trace.epochs.size();
  res.work_ifo = work.total();
  res.eval_ifo = eval.total();
  res.ifo_to_target = ifo_to_target(trace, cfg.schedule.epsilon);
  return res;
}

inline RunResult run(const FiniteSumObjective& f, const RunConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::Vcsg: return run_vcsg(f, cfg);
    case Algorithm::BatchingSvrg: return run_batching_svrg(f, cfg);
    case Algorithm::Sgd: return run_sgd(f, cfg);
    case Algorithm::Svrg: return run_svrg(f, cfg);
    case Algorithm::Scsg: return run_scsg(f, cfg);
  }
  throw std::logic_error("unreachable algorithm");
}

}  // namespace vcsg
