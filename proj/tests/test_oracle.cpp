#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "test_support.hpp"
#include "vcsg/oracle.hpp"
#include "vcsg/problems.hpp"

using namespace vcsg;
using namespace vcsg::testing;

namespace {

// Independent central-difference gradient of the i-th component.
Vector fd_component_gradient(const FiniteSumObjective& f, std::size_t i, const Vector& x,
                             double h = 1e-5) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    g[k] = (f.component_value(i, xp) - f.component_value(i, xm)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return g;
}

// Straight-line re-derivation of the population gradient variance.
double variance_two_pass(const FiniteSumObjective& f, const Vector& x) {
  const std::size_t n = f.num_components();
  Vector mean(x.size(), 0.0);
  std::vector<Vector> grads(n, Vector(x.size()));
  for (std::size_t i = 0; i < n; ++i) {
    f.component_gradient(i, x, grads[i]);
    for (std::size_t k = 0; k < x.size(); ++k) mean[k] += grads[i][k];
  }
  for (double& e : mean) e /= static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dev = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = grads[i][k] - mean[k];
      dev += t * t;
    }
    acc += dev;
  }
  return acc / static_cast<double>(n);
}

}  // namespace

TEST_CASE("component gradients match hand formulas on synthetic objectives") {
  QuadraticObjective quad(random_centers(6, 3, 11));
  const Vector x = random_point(3, 5);
  IfoCounter ifo;
  for (std::size_t i = 0; i < 6; ++i) {
    const Vector g = grad_component(quad, i, x, ifo);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(g[k] == x[k] - quad.centers()[i][k]);  // exact arithmetic identity
  }
  CHECK(ifo.total() == 6);
}

TEST_CASE("built-in problem gradients agree with finite differences") {
  std::vector<ProblemSpec> specs;
  {
    ProblemSpec s;
    s.kind = ProblemKind::SigmoidClassification;
    s.n = 12;
    s.d = 5;
    s.seed = 3;
    specs.push_back(s);
  }
  {
    ProblemSpec s;
    s.kind = ProblemKind::LeastSquaresNonconvex;
    s.n = 12;
    s.d = 5;
    s.seed = 4;
    specs.push_back(s);
  }
  {
    ProblemSpec s;
    s.kind = ProblemKind::RosenbrockSum;
    s.n = 10;
    s.d = 6;
    s.seed = 5;
    specs.push_back(s);
  }
  {
    ProblemSpec s;
    s.kind = ProblemKind::TwoLayerMlp;
    s.n = 10;
    s.hidden = 3;
    s.d = 3 * 4 + 2 * 3 + 1;  // input_dim 4
    s.seed = 6;
    specs.push_back(s);
  }
  for (const auto& spec : specs) {
    auto f = make_problem(spec);
    const Vector x = random_point(f->dimension(), 77, 0.3);
    Vector g(f->dimension());
    for (std::size_t i = 0; i < std::min<std::size_t>(f->num_components(), 6); ++i) {
      f->component_gradient(i, x, g);
      const Vector fd = fd_component_gradient(*f, i, x);
      for (std::size_t k = 0; k < g.size(); ++k) {
        INFO(f->name() << " component " << i << " coordinate " << k);
        CHECK(g[k] == Catch::Approx(fd[k]).margin(1e-6).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("batch gradient over the full index set reproduces the full gradient bitwise") {
  QuadraticObjective quad(random_centers(9, 4, 21));
  const Vector x = random_point(4, 9);
  IfoCounter a, b;
  std::vector<std::size_t> all(9);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Vector gb = grad_batch(quad, all, x, a);
  const Vector gf = full_grad(quad, x, b);
  REQUIRE(gb.size() == gf.size());
  for (std::size_t k = 0; k < gb.size(); ++k) CHECK(gb[k] == gf[k]);
  CHECK(a.total() == 9);
  CHECK(b.total() == 9);
}

TEST_CASE("singleton batches reproduce component gradients bitwise") {
  QuadraticObjective quad(random_centers(5, 3, 31));
  const Vector x = random_point(3, 2);
  IfoCounter a, b;
  for (std::size_t i = 0; i < 5; ++i) {
    const std::vector<std::size_t> idx = {i};
    const Vector gb = grad_batch(quad, idx, x, a);
    const Vector gc = grad_component(quad, i, x, b);
    for (std::size_t k = 0; k < 3; ++k) CHECK(gb[k] == gc[k]);
  }
}

TEST_CASE("subset-mean gradients average back to the full gradient") {
  // Each index appears in the same number of size-m subsets, so the average
  // of subset means over all C(6,3) subsets equals the full mean.
  QuadraticObjective quad(random_centers(6, 3, 41));
  const Vector x = random_point(3, 14);
  IfoCounter ifo;
  const Vector full = full_grad(quad, x, ifo);
  const auto subsets = enumerate_subsets(6, 3);
  REQUIRE(subsets.size() == 20);
  Vector acc(3, 0.0);
  for (const auto& s : subsets) {
    const Vector g = batch_mean_grad(quad, s, x);
    for (std::size_t k = 0; k < 3; ++k) acc[k] += g[k];
  }
  for (double& e : acc) e /= static_cast<double>(subsets.size());
  CHECK(max_abs_diff(acc, full) <= 1e-12);
}

TEST_CASE("gradient variance matches hand-computed and two-pass values") {
  // Constant gradients (1,0), (0,1), (-1,-1): mean (0,0), squared deviations
  // 1, 1, 2 -> variance (1+1+2)/3.
  ConstGradObjective f({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}});
  const Vector x = {0.3, -0.8};
  IfoCounter ifo;
  CHECK(variance_S(f, x, ifo) == Catch::Approx(4.0 / 3.0).margin(1e-15));
  CHECK(ifo.total() == 3);

  QuadraticObjective quad(random_centers(17, 6, 51));
  const Vector y = random_point(6, 4);
  IfoCounter ifo2;
  CHECK(variance_S(quad, y, ifo2) ==
        Catch::Approx(variance_two_pass(quad, y)).margin(1e-13));
}

TEST_CASE("full evaluation reports value, gradient, and squared norm consistently") {
  // Single center c with x - c = (3,4): gradient norm squared is 25.
  QuadraticObjective quad({{1.0, 2.0}});
  const Vector x = {4.0, 6.0};
  IfoCounter eval;
  const FullEval fe = evaluate_full(quad, x, eval);
  CHECK(fe.grad.size() == 2);
  CHECK(fe.grad[0] == 3.0);
  CHECK(fe.grad[1] == 4.0);
  CHECK(fe.grad_norm_sq == 25.0);
  CHECK(fe.value == Catch::Approx(0.5 * 25.0).margin(1e-15));
  CHECK(eval.total() == 1);
  IfoCounter eval2;
  CHECK(grad_norm_sq(quad, x, eval2) == 25.0);
}

TEST_CASE("problem construction is deterministic per seed") {
  ProblemSpec spec;
  spec.kind = ProblemKind::SigmoidClassification;
  spec.n = 40;
  spec.d = 7;
  spec.seed = 123;
  auto f = make_problem(spec);
  auto g = make_problem(spec);
  CHECK(f->smoothness() == g->smoothness());
  Rng rng(5150);
  Vector gf(7), gg(7);
  for (int t = 0; t < 100; ++t) {
    Vector x(7);
    for (double& e : x) e = rng.normal();
    const std::size_t i = static_cast<std::size_t>(rng.uniform_below(40));
    CHECK(f->component_value(i, x) == g->component_value(i, x));
    f->component_gradient(i, x, gf);
    g->component_gradient(i, x, gg);
    for (std::size_t k = 0; k < 7; ++k) CHECK(gf[k] == gg[k]);
  }

  spec.seed = 124;  // different seed must change the data
  auto h = make_problem(spec);
  const Vector origin(7, 0.1);
  bool any_diff = false;
  for (std::size_t i = 0; i < 40 && !any_diff; ++i)
    any_diff = f->component_value(i, origin) != h->component_value(i, origin);
  CHECK(any_diff);
}

TEST_CASE("least-squares smoothness constant matches a curvature probe") {
  // With zero penalty weight the objective is an exact quadratic, so
  // Hessian-vector products via symmetric gradient differences are exact and
  // power iteration on them recovers the top curvature independently.
  ProblemSpec spec;
  spec.kind = ProblemKind::LeastSquaresNonconvex;
  spec.n = 60;
  spec.d = 8;
  spec.seed = 99;
  spec.reg_weight = 0.0;
  auto f = make_problem(spec);

  IfoCounter eval;
  const Vector x0(8, 0.0);
  Vector v = random_point(8, 1);
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    const double nv = std::sqrt(vec::norm_sq(v));
    for (double& e : v) e /= nv;
    Vector xp = x0, xm = x0;
    const double t = 1e-3;
    for (std::size_t k = 0; k < 8; ++k) {
      xp[k] += t * v[k];
      xm[k] -= t * v[k];
    }
    const Vector gp = full_grad(*f, xp, eval);
    const Vector gm = full_grad(*f, xm, eval);
    Vector hv(8);
    for (std::size_t k = 0; k < 8; ++k) hv[k] = (gp[k] - gm[k]) / (2.0 * t);
    lambda = vec::dot(v, hv);
    v = hv;
  }
  CHECK(f->smoothness() == Catch::Approx(lambda).epsilon(0.01));
}

TEST_CASE("sigmoid problem stays finite at extreme points") {
  ProblemSpec spec;
  spec.kind = ProblemKind::SigmoidClassification;
  spec.n = 20;
  spec.d = 4;
  spec.seed = 8;
  auto f = make_problem(spec);
  Vector g(4);
  for (double scale : {0.0, 50.0, -50.0, 1000.0}) {
    const Vector x(4, scale);
    for (std::size_t i = 0; i < 20; ++i) {
      const double v = f->component_value(i, x);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      f->component_gradient(i, x, g);
      for (double e : g) CHECK(std::isfinite(e));
    }
  }
}

TEST_CASE("subset-mean deviation matches the finite-population identity exactly") {
  // Exhaustive check of E_I ||mean_I(z) - mean(z)||^2 =
  // (n-m)/((n-1) m) * (1/n) sum ||z_i - mean||^2 for every n <= 8 and m <= n.
  Rng rng(60601);
  for (std::size_t n = 2; n <= 8; ++n) {
    std::vector<Vector> z(n, Vector(3));
    for (auto& row : z)
      for (double& e : row) e = rng.normal();
    ConstGradObjective f(z);
    const Vector x(3, 0.0);
    IfoCounter ifo;
    const Vector mean = full_grad(f, x, ifo);
    const double s = variance_S(f, x, ifo);
    for (std::size_t m = 1; m <= n; ++m) {
      double acc = 0.0;
      const auto subsets = enumerate_subsets(n, m);
      for (const auto& idx : subsets) {
        const Vector gm = batch_mean_grad(f, idx, x);
        double dev = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          const double t = gm[k] - mean[k];
          dev += t * t;
        }
        acc += dev;
      }
      acc /= static_cast<double>(subsets.size());
      const double factor =
          m >= n ? 0.0
                 : static_cast<double>(n - m) /
                       (static_cast<double>(n - 1) * static_cast<double>(m));
      INFO("n=" << n << " m=" << m);
      CHECK(acc == Catch::Approx(factor * s).margin(1e-12));
    }
  }
}

TEST_CASE("oracle helpers charge exactly their advertised cost") {
  QuadraticObjective quad(random_centers(13, 3, 71));
  const Vector x = random_point(3, 6);
  IfoCounter work;
  (void)grad_component(quad, 4, x, work);
  CHECK(work.total() == 1);
  (void)grad_batch(quad, std::vector<std::size_t>{1, 5, 9}, x, work);
  CHECK(work.total() == 4);
  (void)full_grad(quad, x, work);
  CHECK(work.total() == 17);
  (void)variance_S(quad, x, work);
  CHECK(work.total() == 30);
  (void)evaluate_full(quad, x, work);
  CHECK(work.total() == 43);
  (void)batch_mean_grad(quad, std::vector<std::size_t>{0, 1}, x);  // uncounted
  CHECK(work.total() == 43);
}

TEST_CASE("oracle helpers validate their inputs") {
  QuadraticObjective quad(random_centers(4, 2, 81));
  IfoCounter ifo;
  const Vector bad_dim = {1.0};
  const Vector nan_pt = {0.0, std::numeric_limits<double>::quiet_NaN()};
  const Vector ok = {0.0, 0.0};
  CHECK_THROWS_AS(grad_component(quad, 0, bad_dim, ifo), std::invalid_argument);
  CHECK_THROWS_AS(grad_component(quad, 9, ok, ifo), std::out_of_range);
  CHECK_THROWS_AS(grad_component(quad, 0, nan_pt, ifo), std::invalid_argument);
  CHECK_THROWS_AS(grad_batch(quad, std::vector<std::size_t>{}, ok, ifo), std::invalid_argument);
  CHECK(ifo.total() == 0);
}
