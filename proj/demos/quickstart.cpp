// Minimal library tour: build a problem, run the adaptive controller and a
// fixed-schedule baseline on it, and print the per-epoch work ledger.

#include <cstdio>

#include "vcsg/vcsg.hpp"

int main() {
  vcsg::ProblemSpec spec;
  spec.kind = vcsg::ProblemKind::SigmoidClassification;
  spec.n = 300;
  spec.d = 10;
  spec.seed = 7;
  const auto problem = vcsg::make_problem(spec);

  vcsg::RunConfig cfg;
  cfg.schedule.n = problem->num_components();
  cfg.schedule.L = problem->smoothness();
  cfg.schedule.epsilon = 1e-3;
  cfg.schedule.T = 12;
  cfg.seed = 42;

  std::printf("problem: %s  n=%zu d=%zu L=%.4f\n", problem->name().c_str(),
              problem->num_components(), problem->dimension(), problem->smoothness());

  for (const auto algo : {vcsg::Algorithm::Vcsg, vcsg::Algorithm::Svrg}) {
    cfg.algorithm = algo;
    const vcsg::RunResult res = vcsg::run(*problem, cfg);
    std::printf("\n%s (initial f=%.6f, |g|^2=%.3e)\n", vcsg::to_string(algo),
                res.trace.initial_f, res.trace.initial_grad_norm_sq);
    std::printf("  %3s %-5s %6s %4s %10s %8s %12s %12s\n", "j", "reg", "B", "b", "eta", "N",
                "ifo", "|grad|^2");
    for (const auto& r : res.trace.epochs)
      std::printf("  %3zu %-5s %6zu %4zu %10.3e %8llu %12llu %12.5e\n", r.epoch,
                  vcsg::to_string(r.regime), r.B, r.b, r.eta,
                  static_cast<unsigned long long>(r.inner_steps),
                  static_cast<unsigned long long>(r.cumulative_ifo), r.grad_norm_sq);
    std::printf("  sampled epoch %zu, work IFO %llu, eval IFO %llu\n", res.sampled_epoch,
                static_cast<unsigned long long>(res.work_ifo),
                static_cast<unsigned long long>(res.eval_ifo));
  }
  return 0;
}
