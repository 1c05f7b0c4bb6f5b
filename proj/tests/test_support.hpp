#pragma once

// Shared fixtures and independent oracles for the test suite.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vcsg/oracle.hpp"
#include "vcsg/optimizers.hpp"
#include "vcsg/rng.hpp"

namespace vcsg::testing {

// f_i(x) = 0.5 ||x - c_i||^2: strongly convex, gradients x - c_i, L = 1,
// minimizer mean(c_i).
class QuadraticObjective : public FiniteSumObjective {
 public:
  explicit QuadraticObjective(std::vector<Vector> centers)
      : FiniteSumObjective("test_quadratic", centers.size(),
                           centers.empty() ? 1 : centers.front().size()),
        centers_(std::move(centers)) {
    set_smoothness(1.0);
  }

  double component_value(std::size_t i, std::span<const double> x) const override {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = x[k] - centers_[i][k];
      acc += 0.5 * t * t;
    }
    return acc;
  }
  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - centers_[i][k];
  }

  const std::vector<Vector>& centers() const { return centers_; }

 private:
  std::vector<Vector> centers_;
};

// f_i(x) = g_i . x: constant component gradients, zero curvature. Useful for
// forcing exact gradient ties and known variances.
class ConstGradObjective : public FiniteSumObjective {
 public:
  explicit ConstGradObjective(std::vector<Vector> grads)
      : FiniteSumObjective("test_const_grad", grads.size(),
                           grads.empty() ? 1 : grads.front().size()),
        grads_(std::move(grads)) {
    set_smoothness(1.0);  // any positive constant works for a linear objective
  }

  double component_value(std::size_t i, std::span<const double> x) const override {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += grads_[i][k] * x[k];
    return acc;
  }
  void component_gradient(std::size_t i, std::span<const double>,
                          std::span<double> out) const override {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = grads_[i][k];
  }

 private:
  std::vector<Vector> grads_;
};

// f_i(x) = 0.5 (a_i . x - y_i)^2 with explicit rows: the textbook least-squares
// component for analytic-gradient checks.
class ExplicitLeastSquares : public FiniteSumObjective {
 public:
  ExplicitLeastSquares(std::vector<Vector> rows, Vector targets)
      : FiniteSumObjective("test_least_squares", rows.size(),
                           rows.empty() ? 1 : rows.front().size()),
        rows_(std::move(rows)),
        targets_(std::move(targets)) {
    set_smoothness(1.0);
  }

  double component_value(std::size_t i, std::span<const double> x) const override {
    double r = -targets_[i];
    for (std::size_t k = 0; k < x.size(); ++k) r += rows_[i][k] * x[k];
    return 0.5 * r * r;
  }
  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    double r = -targets_[i];
    for (std::size_t k = 0; k < x.size(); ++k) r += rows_[i][k] * x[k];
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = r * rows_[i][k];
  }

 private:
  std::vector<Vector> rows_;
  Vector targets_;
};

inline std::vector<Vector> random_centers(std::size_t n, std::size_t d, std::uint64_t seed,
                                          double scale = 1.0) {
  Rng rng(seed);
  std::vector<Vector> out(n, Vector(d));
  for (auto& c : out)
    for (double& e : c) e = scale * rng.normal();
  return out;
}

inline Vector random_point(std::size_t d, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Vector x(d);
  for (double& e : x) e = scale * rng.normal();
  return x;
}

// All size-m subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> enumerate_subsets(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == m) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i + (m - cur.size()) <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Exact work-ledger audit: every row adds B + b*N, cumulative strictly
// increasing, and the final row equals the reported total.
inline bool audit_ledger(const RunTrace& trace, std::uint64_t reported_total) {
  std::uint64_t acc = 0;
  for (const auto& r : trace.epochs) {
    acc += static_cast<std::uint64_t>(r.B) + static_cast<std::uint64_t>(r.b) * r.inner_steps;
    if (r.cumulative_ifo != acc) return false;
  }
  return acc == reported_total;
}

// Ledger audit for truncated (diverged) runs: completed rows must still obey
// the per-epoch identity, and the reported total covers at least those rows
// (the aborted epoch's partial work has no row but was still paid for).
inline bool audit_ledger_prefix_ok(const RunResult& res) {
  std::uint64_t acc = 0;
  for (const auto& r : res.trace.epochs) {
    acc += static_cast<std::uint64_t>(r.B) + static_cast<std::uint64_t>(r.b) * r.inner_steps;
    if (r.cumulative_ifo != acc) return false;
  }
  return res.work_ifo >= acc;
}

}  // namespace vcsg::testing
