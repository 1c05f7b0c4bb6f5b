#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vcsg/vec.hpp"

namespace vcsg {

// Incremental first-order oracle cost meter: one unit buys the value and
// gradient of one component at one point. Plain integer -- a counter is owned
// by exactly one run's thread.
class IfoCounter {
 public:
  void add(std::uint64_t units) { total_ += units; }
  std::uint64_t total() const { return total_; }

 private:
  std::uint64_t total_ = 0;
};

// Finite-sum objective f(x) = (1/n) * sum_i f_i(x).
//
// Implementations must be pure and deterministic: identical (i, x) yields
// identical bits on every call, so re-evaluating a component at a stored
// anchor point reproduces the original value exactly. All randomness lives in
// data generation at construction time.
class FiniteSumObjective {
 public:
  FiniteSumObjective(std::string name, std::size_t n, std::size_t d)
      : name_(std::move(name)), n_(n), d_(d) {
    if (n_ == 0 || d_ == 0)
      throw std::invalid_argument("objective needs at least one component and one dimension");
  }
  virtual ~FiniteSumObjective() = default;

  std::size_t num_components() const { return n_; }
  std::size_t dimension() const { return d_; }
  const std::string& name() const { return name_; }

  // Smoothness constant of the components, attached at construction
  // (closed-form where available, otherwise probe-estimated).
  double smoothness() const { return smoothness_; }
  void set_smoothness(double L) {
    if (!(L > 0.0)) throw std::invalid_argument("smoothness constant must be positive");
    smoothness_ = L;
  }

  // Oracle cost spent while building the problem (e.g. smoothness probes);
  // kept apart from any optimizer run's ledger.
  std::uint64_t construction_ifo() const { return construction_ifo_; }
  void add_construction_ifo(std::uint64_t units) { construction_ifo_ += units; }

  virtual double component_value(std::size_t i, std::span<const double> x) const = 0;
  virtual void component_gradient(std::size_t i, std::span<const double> x,
                                  std::span<double> out) const = 0;

 private:
  std::string name_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  double smoothness_ = 1.0;
  std::uint64_t construction_ifo_ = 0;
};

namespace detail {

inline void check_point(const FiniteSumObjective& f, std::span<const double> x) {
  if (x.size() != f.dimension()) throw std::invalid_argument("point has wrong dimension");
  if (!vec::all_finite(x)) throw std::invalid_argument("point has non-finite coordinates");
}

inline void check_index(const FiniteSumObjective& f, std::size_t i) {
  if (i >= f.num_components()) throw std::out_of_range("component index out of range");
}

// Mean of component gradients over `idx`, accumulated in the given (ascending)
// order. No cost accounting here -- every counted or uncounted batch mean runs
// through this one loop so identical inputs give identical bits.
inline Vector batch_mean_impl(const FiniteSumObjective& f, std::span<const std::size_t> idx,
                              std::span<const double> x) {
  if (idx.empty()) throw std::invalid_argument("batch index set is empty");
  check_point(f, x);
  Vector sum(f.dimension(), 0.0);
  Vector g(f.dimension());
  for (std::size_t i : idx) {
    check_index(f, i);
    f.component_gradient(i, x, g);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (double& e : sum) e *= inv;
  return sum;
}

}  // namespace detail

// --- counted oracle calls -------------------------------------------------

inline Vector grad_component(const FiniteSumObjective& f, std::size_t i,
                             std::span<const double> x, IfoCounter& ifo) {
  detail::check_point(f, x);
  detail::check_index(f, i);
  Vector g(f.dimension());
  f.component_gradient(i, x, g);
  ifo.add(1);
  return g;
}

// Batch gradient (1/|I|) * sum_{i in I} grad f_i(x); costs |I| units.
inline Vector grad_batch(const FiniteSumObjective& f, std::span<const std::size_t> idx,
                         std::span<const double> x, IfoCounter& ifo) {
  Vector g = detail::batch_mean_impl(f, idx, x);
  ifo.add(idx.size());
  return g;
}

// Full gradient = batch gradient over the complete index set (bitwise, same
// accumulation path); costs n units.
inline Vector full_grad(const FiniteSumObjective& f, std::span<const double> x, IfoCounter& ifo) {
  std::vector<std::size_t> all(f.num_components());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return grad_batch(f, all, x, ifo);
}

// Population variance of component gradients at x:
//   (1/n) * sum_i ||grad f_i(x) - grad f(x)||^2;  costs n units.
inline double variance_S(const FiniteSumObjective& f, std::span<const double> x, IfoCounter& ifo) {
  detail::check_point(f, x);
  const std::size_t n = f.num_components();
  const std::size_t d = f.dimension();
  std::vector<Vector> grads(n, Vector(d));
  Vector mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    f.component_gradient(i, x, grads[i]);
    for (std::size_t k = 0; k < d; ++k) mean[k] += grads[i][k];
  }
  for (double& e : mean) e /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dev = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = grads[i][k] - mean[k];
      dev += t * t;
    }
    acc += dev;
  }
  ifo.add(n);
  return acc / static_cast<double>(n);
}

struct FullEval {
  double value = 0.0;
  double grad_norm_sq = 0.0;
  Vector grad;
};

// f(x), grad f(x) and its squared norm in one pass; costs n units. Used for
// trace records and stopping checks, which run on a separate evaluation
// counter so they never pollute an optimizer's work ledger.
inline FullEval evaluate_full(const FiniteSumObjective& f, std::span<const double> x,
                              IfoCounter& eval) {
  detail::check_point(f, x);
  const std::size_t n = f.num_components();
  const std::size_t d = f.dimension();
  FullEval out;
  out.grad.assign(d, 0.0);
  Vector g(d);
  double vsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vsum += f.component_value(i, x);
    f.component_gradient(i, x, g);
    for (std::size_t k = 0; k < d; ++k) out.grad[k] += g[k];
  }
  out.value = vsum / static_cast<double>(n);
  for (double& e : out.grad) e /= static_cast<double>(n);
  out.grad_norm_sq = vec::norm_sq(out.grad);
  eval.add(n);
  return out;
}

inline double grad_norm_sq(const FiniteSumObjective& f, std::span<const double> x,
                           IfoCounter& eval) {
  return evaluate_full(f, x, eval).grad_norm_sq;
}

// --- uncounted anchor re-evaluation ----------------------------------------
//
// The per-epoch cost ledger is B_j + b_j * N_j: each inner step is charged for
// its minibatch once, although the estimator touches that minibatch at two
// points (current iterate and epoch anchor). The anchor-side re-evaluation is
// therefore routed through this uncounted helper; determinism of the
// components makes it equivalent to reading a cache.
inline Vector batch_mean_grad(const FiniteSumObjective& f, std::span<const std::size_t> idx,
                              std::span<const double> x) {
  return detail::batch_mean_impl(f, idx, x);
}

}  // namespace vcsg
