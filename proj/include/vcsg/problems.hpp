#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcsg/oracle.hpp"
#include "vcsg/rng.hpp"

namespace vcsg {

enum class ProblemKind {
  SigmoidClassification,   // smooth non-convex classification loss
  LeastSquaresNonconvex,   // quadratic data fit + bounded non-convex penalty
  RosenbrockSum,           // chained valley terms, one per component
  TwoLayerMlp,             // tiny perceptron regression on synthetic data
};

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::SigmoidClassification: return "sigmoid_classification";
    case ProblemKind::LeastSquaresNonconvex: return "least_squares_nonconvex";
    case ProblemKind::RosenbrockSum: return "rosenbrock_sum";
    case ProblemKind::TwoLayerMlp: return "two_layer_mlp";
  }
  return "?";
}

inline std::optional<ProblemKind> problem_kind_from_string(std::string_view s) {
  if (s == "sigmoid_classification") return ProblemKind::SigmoidClassification;
  if (s == "least_squares_nonconvex") return ProblemKind::LeastSquaresNonconvex;
  if (s == "rosenbrock_sum") return ProblemKind::RosenbrockSum;
  if (s == "two_layer_mlp") return ProblemKind::TwoLayerMlp;
  return std::nullopt;
}

// Everything needed to rebuild a problem bit-identically.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::SigmoidClassification;
  std::size_t n = 1000;
  std::size_t d = 20;
  std::uint64_t seed = 1;
  // kind-specific knobs (validated per kind by the config layer):
  double label_noise = 0.1;    // sigmoid: fraction of flipped labels
  double reg_weight = 0.1;     // least-squares: non-convex penalty weight
  double target_noise = 0.05;  // regression targets: additive noise scale
  std::size_t hidden = 4;      // mlp: hidden-layer width
};

namespace detail {

inline double stable_sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// max_z |sigmoid''(z)| = 1/(6*sqrt(3)); the sharpest curvature the loss
// s(m) = 1 - sigmoid(m) can exhibit along any direction.
inline double sigmoid_curvature_bound() { return 1.0 / (6.0 * std::sqrt(3.0)); }

// ---------------------------------------------------------------------------

class SigmoidClassificationObjective final : public FiniteSumObjective {
 public:
  SigmoidClassificationObjective(const ProblemSpec& spec)
      : FiniteSumObjective(to_string(ProblemKind::SigmoidClassification), spec.n, spec.d) {
    if (spec.label_noise < 0.0 || spec.label_noise > 1.0)
      throw std::invalid_argument("sigmoid_classification: label_noise must be in [0, 1]");
    Rng rng(spec.seed);
    // fixed draw order: ground truth, then rows, then label flips
    Vector truth(spec.d);
    for (double& e : truth) e = rng.normal();
    rows_.assign(spec.n, Vector(spec.d));
    labels_.assign(spec.n, 1.0);
    for (std::size_t i = 0; i < spec.n; ++i)
      for (double& e : rows_[i]) e = rng.normal();
    for (std::size_t i = 0; i < spec.n; ++i) {
      const double margin = vec::dot(rows_[i], truth);
      labels_[i] = margin >= 0.0 ? 1.0 : -1.0;
      if (rng.uniform_unit() < spec.label_noise) labels_[i] = -labels_[i];
    }
    double max_row = 0.0;
    for (const auto& r : rows_) max_row = std::max(max_row, vec::norm_sq(r));
    set_smoothness(sigmoid_curvature_bound() * max_row);
  }

  // f_i(x) = 1 - sigmoid(y_i * <a_i, x>): near 0 when confidently right,
  // near 1 when confidently wrong; smooth and non-convex.
  double component_value(std::size_t i, std::span<const double> x) const override {
    const double m = labels_[i] * vec::dot(rows_[i], x);
    return 1.0 - stable_sigmoid(m);
  }

  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    const double m = labels_[i] * vec::dot(rows_[i], x);
    const double s = stable_sigmoid(m);
    const double c = -s * (1.0 - s) * labels_[i];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c * rows_[i][k];
  }

 private:
  std::vector<Vector> rows_;
  Vector labels_;
};

// ---------------------------------------------------------------------------

class LeastSquaresNonconvexObjective final : public FiniteSumObjective {
 public:
  LeastSquaresNonconvexObjective(const ProblemSpec& spec)
      : FiniteSumObjective(to_string(ProblemKind::LeastSquaresNonconvex), spec.n, spec.d),
        reg_weight_(spec.reg_weight) {
    if (reg_weight_ < 0.0)
      throw std::invalid_argument("least_squares_nonconvex: reg_weight must be >= 0");
    if (spec.target_noise < 0.0)
      throw std::invalid_argument("least_squares_nonconvex: target_noise must be >= 0");
    Rng rng(spec.seed);
    Vector truth(spec.d);
    for (double& e : truth) e = rng.normal();
    rows_.assign(spec.n, Vector(spec.d));
    targets_.assign(spec.n, 0.0);
    for (std::size_t i = 0; i < spec.n; ++i)
      for (double& e : rows_[i]) e = rng.normal();
    for (std::size_t i = 0; i < spec.n; ++i)
      targets_[i] = vec::dot(rows_[i], truth) + spec.target_noise * rng.normal();
    // Mean-curvature bound: top eigenvalue of (1/n) A^T A, plus the penalty's
    // curvature peak 2 per coordinate.
    set_smoothness(design_top_eigenvalue() + 2.0 * reg_weight_);
  }

  // f_i(x) = 1/2 (<a_i, x> - y_i)^2 + w * sum_k x_k^2 / (1 + x_k^2)
  double component_value(std::size_t i, std::span<const double> x) const override {
    const double r = vec::dot(rows_[i], x) - targets_[i];
    double reg = 0.0;
    for (double e : x) reg += (e * e) / (1.0 + e * e);
    return 0.5 * r * r + reg_weight_ * reg;
  }

  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    const double r = vec::dot(rows_[i], x) - targets_[i];
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double den = 1.0 + x[k] * x[k];
      out[k] = r * rows_[i][k] + reg_weight_ * 2.0 * x[k] / (den * den);
    }
  }

 private:
  double design_top_eigenvalue() const {
    const std::size_t d = dimension();
    const std::size_t n = num_components();
    // M = (1/n) A^T A, explicit since d is small; then power iteration from a
    // fixed start, long enough that 1% accuracy is comfortable.
    std::vector<Vector> M(d, Vector(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = 0; q < d; ++q) M[p][q] += rows_[i][p] * rows_[i][q];
    for (auto& row : M)
      for (double& e : row) e /= static_cast<double>(n);
    Vector v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    Vector w(d);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
      for (std::size_t p = 0; p < d; ++p) w[p] = vec::dot(M[p], v);
      lambda = vec::norm(w);
      if (lambda <= 0.0) return 0.0;
      for (std::size_t p = 0; p < d; ++p) v[p] = w[p] / lambda;
    }
    return lambda;
  }

  std::vector<Vector> rows_;
  Vector targets_;
  double reg_weight_ = 0.0;
};

// ---------------------------------------------------------------------------

class RosenbrockSumObjective final : public FiniteSumObjective {
 public:
  RosenbrockSumObjective(const ProblemSpec& spec)
      : FiniteSumObjective(to_string(ProblemKind::RosenbrockSum), spec.n, spec.d) {
    if (spec.d < 2) throw std::invalid_argument("rosenbrock_sum: needs d >= 2");
    // smoothness probed by make_problem (no closed form)
  }

  // Component i owns valley term k = i mod (d-1):
  //   f_i(x) = 100 (x_{k+1} - x_k^2)^2 + (1 - x_k)^2
  // Every component vanishes with zero gradient at the all-ones point.
  double component_value(std::size_t i, std::span<const double> x) const override {
    const std::size_t k = i % (dimension() - 1);
    const double a = x[k + 1] - x[k] * x[k];
    const double b = 1.0 - x[k];
    return 100.0 * a * a + b * b;
  }

  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    vec::fill(out, 0.0);
    const std::size_t k = i % (dimension() - 1);
    const double a = x[k + 1] - x[k] * x[k];
    out[k] = -400.0 * x[k] * a - 2.0 * (1.0 - x[k]);
    out[k + 1] = 200.0 * a;
  }
};

// ---------------------------------------------------------------------------

class TwoLayerMlpObjective final : public FiniteSumObjective {
 public:
  TwoLayerMlpObjective(const ProblemSpec& spec)
      : FiniteSumObjective(to_string(ProblemKind::TwoLayerMlp), spec.n, spec.d),
        hidden_(spec.hidden) {
    if (hidden_ == 0) throw std::invalid_argument("two_layer_mlp: hidden must be >= 1");
    if (spec.d <= 2 * hidden_ + 1 || (spec.d - 2 * hidden_ - 1) % hidden_ != 0)
      throw std::invalid_argument(
          "two_layer_mlp: d must equal hidden*input_dim + 2*hidden + 1 for some input_dim >= 1");
    if (spec.target_noise < 0.0)
      throw std::invalid_argument("two_layer_mlp: target_noise must be >= 0");
    input_dim_ = (spec.d - 2 * hidden_ - 1) / hidden_;
    Rng rng(spec.seed);
    // fixed draw order: teacher weights, then inputs, then target noise
    Vector teacher(spec.d);
    for (double& e : teacher) e = rng.normal();
    inputs_.assign(spec.n, Vector(input_dim_));
    for (std::size_t i = 0; i < spec.n; ++i)
      for (double& e : inputs_[i]) e = rng.normal();
    targets_.assign(spec.n, 0.0);
    for (std::size_t i = 0; i < spec.n; ++i)
      targets_[i] = forward(teacher, inputs_[i], nullptr) + spec.target_noise * rng.normal();
  }

  // Parameter packing: [W1 (hidden x input, row-major) | b1 | w2 | b2],
  // prediction w2^T tanh(W1 z + b1) + b2, squared-error loss.
  double component_value(std::size_t i, std::span<const double> x) const override {
    const double r = forward(x, inputs_[i], nullptr) - targets_[i];
    return 0.5 * r * r;
  }

  void component_gradient(std::size_t i, std::span<const double> x,
                          std::span<double> out) const override {
    Vector act(hidden_);
    const double r = forward(x, inputs_[i], &act) - targets_[i];
    const std::size_t h = hidden_;
    const std::size_t in = input_dim_;
    const auto w2 = x.subspan(h * in + h, h);
    vec::fill(out, 0.0);
    out[h * in + 2 * h] = r;  // b2
    for (std::size_t u = 0; u < h; ++u) {
      out[h * in + h + u] = r * act[u];  // w2
      const double pre = r * w2[u] * (1.0 - act[u] * act[u]);
      out[h * in + u] = pre;  // b1
      for (std::size_t q = 0; q < in; ++q) out[u * in + q] = pre * inputs_[i][q];  // W1
    }
  }

  std::size_t input_dim() const { return input_dim_; }

 private:
  double forward(std::span<const double> x, const Vector& z, Vector* act_out) const {
    const std::size_t h = hidden_;
    const std::size_t in = input_dim_;
    const auto b1 = x.subspan(h * in, h);
    const auto w2 = x.subspan(h * in + h, h);
    const double b2 = x[h * in + 2 * h];
    double out = b2;
    for (std::size_t u = 0; u < h; ++u) {
      double pre = b1[u];
      for (std::size_t q = 0; q < in; ++q) pre += x[u * in + q] * z[q];
      const double a = std::tanh(pre);
      if (act_out) (*act_out)[u] = a;
      out += w2[u] * a;
    }
    return out;
  }

  std::size_t hidden_ = 0;
  std::size_t input_dim_ = 0;
  std::vector<Vector> inputs_;
  Vector targets_;
};

// Secant probe for problems without a closed-form constant: 1.5x the steepest
// gradient-difference ratio over 100 seeded nearby pairs. Probe cost lands on
// the construction ledger, never on a run's.
inline void probe_smoothness(FiniteSumObjective& f, std::uint64_t seed) {
  Rng rng(seed ^ 0x705eca75ULL);
  IfoCounter probes;
  const std::size_t d = f.dimension();
  double steepest = 0.0;
  for (int p = 0; p < 100; ++p) {
    Vector x(d), y(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = 0.5 * rng.normal();
    for (std::size_t k = 0; k < d; ++k) y[k] = x[k] + 0.1 * rng.normal();
    const Vector gx = full_grad(f, x, probes);
    const Vector gy = full_grad(f, y, probes);
    const double gap = vec::norm(vec::sub(x, y));
    if (gap <= 0.0) continue;
    steepest = std::max(steepest, vec::norm(vec::sub(gx, gy)) / gap);
  }
  f.add_construction_ifo(probes.total());
  f.set_smoothness(std::max(1e-12, 1.5 * steepest));
}

}  // namespace detail

inline std::shared_ptr<FiniteSumObjective> make_problem(const ProblemSpec& spec) {
  if (spec.n < 3) throw std::invalid_argument("problem needs n >= 3 components");
  if (spec.n > 1000000) throw std::invalid_argument("problem size n is out of range");
  if (spec.d > 10000) throw std::invalid_argument("problem dimension d is out of range");
  std::shared_ptr<FiniteSumObjective> obj;
  switch (spec.kind) {
    case ProblemKind::SigmoidClassification:
      obj = std::make_shared<detail::SigmoidClassificationObjective>(spec);
      break;
    case ProblemKind::LeastSquaresNonconvex:
      obj = std::make_shared<detail::LeastSquaresNonconvexObjective>(spec);
      break;
    case ProblemKind::RosenbrockSum: {
      auto ros = std::make_shared<detail::RosenbrockSumObjective>(spec);
      detail::probe_smoothness(*ros, spec.seed);
      obj = ros;
      break;
    }
    case ProblemKind::TwoLayerMlp: {
      auto mlp = std::make_shared<detail::TwoLayerMlpObjective>(spec);
      detail::probe_smoothness(*mlp, spec.seed);
      obj = mlp;
      break;
    }
  }
  return obj;
}

}  // namespace vcsg
