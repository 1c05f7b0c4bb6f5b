#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcsg/analysis.hpp"
#include "vcsg/bench.hpp"
#include "vcsg/config.hpp"

namespace vcsg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDiverged = 2;

namespace detail {

inline BoundInputs parse_bound_inputs(const nlohmann::json& j) {
  require_object(j, "analyze");
  require_known_fields(j,
                       {"L", "gamma", "alpha", "beta", "lambda", "delta_f", "s_star", "sigma",
                        "rho", "epsilon", "n", "T", "B", "b", "grid_per_axis"},
                       "analyze");
  BoundInputs in;
  in.L = get_double(j, "L", in.L, "analyze");
  in.gamma = get_double(j, "gamma", in.gamma, "analyze");
  in.alpha = get_double(j, "alpha", in.alpha, "analyze");
  in.beta = get_double(j, "beta", in.beta, "analyze");
  in.lambda = get_double(j, "lambda", in.lambda, "analyze");
  in.delta_f = get_double(j, "delta_f", in.delta_f, "analyze");
  in.s_star = get_double(j, "s_star", in.s_star, "analyze");
  in.sigma = get_double(j, "sigma", in.sigma, "analyze");
  in.rho = get_double(j, "rho", in.rho, "analyze");
  in.epsilon = get_double(j, "epsilon", in.epsilon, "analyze");
  in.n = get_u64(j, "n", in.n, "analyze");
  in.T = get_u64(j, "T", in.T, "analyze");
  in.B = get_double(j, "B", in.B, "analyze");
  in.b = get_double(j, "b", in.b, "analyze");
  return in;
}

inline int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                       const std::string& out_dir, OutputFormat format) {
  RunSetup setup = parse_single_run_config(read_json_file(config_path));
  if (seed) setup.run.seed = *seed;
  auto obj = materialize(setup);
  const CellResult cell = run_cell(*obj, setup, setup.run.seed, setup.run.schedule.epsilon);
  write_cell_outputs(cell, out_dir, format);
  std::cout << cell_summary_json(cell).dump(2) << "\n";
  return cell.result.status == RunStatus::Diverged ? kExitDiverged : kExitOk;
}

inline int compare_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                           std::optional<std::string> out_dir,
                           std::optional<OutputFormat> format, std::size_t jobs) {
  BenchConfig cfg = parse_bench_config(read_json_file(config_path));
  if (seed) cfg.seeds = {*seed};
  if (out_dir) cfg.out_dir = *out_dir;
  if (format) cfg.format = *format;
  const CompareOutput out = run_compare(cfg, jobs);
  const std::filesystem::path dir = cfg.out_dir;
  for (const auto& cell : out.cells) write_cell_outputs(cell, dir, cfg.format);
  if (cfg.format != OutputFormat::Json)
    write_text_atomic(dir / "comparison.csv", comparison_csv(out.table));
  if (cfg.format != OutputFormat::Csv)
    write_text_atomic(dir / "comparison.json", comparison_json(out.table).dump(2) + "\n");
  std::cout << comparison_json(out.table).dump(2) << "\n";
  return out.any_diverged ? kExitDiverged : kExitOk;
}

inline int analyze_command(const std::string& config_path) {
  const nlohmann::json doc = read_json_file(config_path);
  BoundInputs in;
  std::size_t per_axis = 100;
  try {
    in = parse_bound_inputs(doc);
    per_axis = get_u64(doc, "grid_per_axis", per_axis, "analyze");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json rep;
  auto guarded = [&](auto&& fn) -> nlohmann::json {
    try {
      return fn();
    } catch (const std::domain_error&) {
      return nullptr;  // vacuous bound (non-positive decrement coefficient)
    }
  };
  try {
    rep["theta"] = theta_unbiased(in);
    rep["Theta"] = theta_biased(in);
    rep["bound_unbiased"] = guarded([&] { return upper_bound_unbiased(in); });
    rep["bound_biased"] = guarded([&] { return upper_bound_biased(in); });
    rep["complexity"] = complexity_bound(in);
    const PositivityGridReport grid = scan_theta_positivity(per_axis, in.alpha, in.beta);
    rep["positivity_region_ok"] = grid.all_positive();
    rep["positivity_detail"] = {
        {"grid_points", grid.total},
        {"non_positive", grid.non_positive},
        {"min_theta", grid.worst.theta},
        {"argmin", {{"B", grid.worst.B}, {"gamma", grid.worst.gamma}, {"lambda", grid.worst.lambda}}}};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::cout << rep.dump(2) << "\n";
  return kExitOk;
}

inline int problems_command() {
  nlohmann::json out = nlohmann::json::array();
  auto add = [&](ProblemKind kind, const char* what, const ProblemSpec& defaults) {
    out.push_back({{"kind", to_string(kind)},
                   {"summary", what},
                   {"defaults",
                    {{"n", defaults.n},
                     {"d", defaults.d},
                     {"seed", defaults.seed},
                     {"label_noise", defaults.label_noise},
                     {"reg_weight", defaults.reg_weight},
                     {"target_noise", defaults.target_noise},
                     {"hidden", defaults.hidden}}}});
  };
  ProblemSpec def;
  add(ProblemKind::SigmoidClassification,
      "binary classification with a smooth non-convex sigmoid loss; closed-form smoothness", def);
  add(ProblemKind::LeastSquaresNonconvex,
      "linear least squares plus a bounded non-convex regularizer; smoothness from the design "
      "spectrum",
      def);
  ProblemSpec ros = def;
  add(ProblemKind::RosenbrockSum, "finite-sum Rosenbrock valley; smoothness probed numerically",
      ros);
  ProblemSpec mlp = def;
  mlp.d = mlp.hidden * 4 + 2 * mlp.hidden + 1;
  add(ProblemKind::TwoLayerMlp,
      "two-layer tanh regression against a teacher network; smoothness probed numerically", mlp);
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"finite-sum stochastic optimization bench: variance-controlled SVRG-family "
               "algorithms with exact oracle-call accounting"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed{};
  std::string out_dir = "out";
  std::optional<std::string> out_override{};
  std::string format_str = "both";
  std::optional<std::string> format_override{};
  std::size_t jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "execute one configured run");
  run_cmd->add_option("--config", config_path, "JSON run config")->required();
  run_cmd->add_option("--seed", [&seed](const CLI::results_t& r) {
    seed = std::stoull(r.at(0));
    return true;
  }, "override the config seed");
  run_cmd->add_option("--out", out_dir, "output directory (default: out)");
  run_cmd->add_option("--format", format_str, "csv|json|both (default: both)");

  auto* cmp_cmd = app.add_subcommand("compare", "execute an algorithms-by-seeds matrix");
  cmp_cmd->add_option("--config", config_path, "JSON bench config")->required();
  cmp_cmd->add_option("--seed", [&seed](const CLI::results_t& r) {
    seed = std::stoull(r.at(0));
    return true;
  }, "replace the config seed list with one seed");
  cmp_cmd->add_option("--out", [&out_override](const CLI::results_t& r) {
    out_override = r.at(0);
    return true;
  }, "output directory (default: from config)");
  cmp_cmd->add_option("--format", [&format_override](const CLI::results_t& r) {
    format_override = r.at(0);
    return true;
  }, "csv|json|both (default: from config)");
  cmp_cmd->add_option("--jobs", jobs, "max concurrent cells (default: 1)");

  auto* ana_cmd = app.add_subcommand("analyze", "evaluate the convergence-bound calculators");
  ana_cmd->add_option("--config", config_path, "JSON bound inputs")->required();

  app.add_subcommand("problems", "list built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run_cmd->parsed())
      return detail::run_command(config_path, seed, out_dir,
                                 output_format_from_string(format_str));
    if (cmp_cmd->parsed()) {
      std::optional<OutputFormat> fmt{};
      if (format_override) fmt = output_format_from_string(*format_override);
      return detail::compare_command(config_path, seed, out_override, fmt, jobs);
    }
    if (ana_cmd->parsed()) return detail::analyze_command(config_path);
    return detail::problems_command();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace vcsg
