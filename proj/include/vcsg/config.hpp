#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcsg/optimizers.hpp"
#include "vcsg/problems.hpp"

namespace vcsg {

// Any schema violation in a user-supplied config; the CLI maps it to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json, Both };

inline const char* to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
    case OutputFormat::Both: return "both";
  }
  return "?";
}

inline OutputFormat output_format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "both") return OutputFormat::Both;
  throw ConfigError("format: expected one of csv|json|both, got '" + std::string(s) + "'");
}

// One executable run: problem + algorithm + knobs. The smoothness constant is
// resolved at materialization (config value if given, else the problem's own).
struct RunSetup {
  std::string name;  // output file stem; defaults to the algorithm tag
  ProblemSpec problem{};
  RunConfig run{};
  std::optional<double> L_override{};
};

struct BenchConfig {
  std::vector<RunSetup> runs;
  std::vector<std::uint64_t> seeds{1};
  double target_epsilon = 1e-3;  // accuracy for IFO-to-target tables
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Both;
};

namespace detail {

using nlohmann::json;

inline void require_object(const json& j, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
}

inline void require_known_fields(const json& obj, std::initializer_list<const char*> allowed,
                                 const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(std::string(where) + ": unknown field '" + it.key() + "'");
  }
}

inline double get_double(const json& obj, const char* key, double def, const char* where) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t def,
                             const char* where) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError(std::string(where) + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string get_string(const json& obj, const char* key, const char* where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string(where) + "." + key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail

inline ProblemSpec parse_problem_spec(const nlohmann::json& j) {
  using detail::get_double;
  using detail::get_u64;
  detail::require_object(j, "problem");
  detail::require_known_fields(
      j, {"kind", "n", "d", "seed", "label_noise", "reg_weight", "target_noise", "hidden"},
      "problem");
  if (!j.contains("kind")) throw ConfigError("problem: missing required field 'kind'");
  const std::string kind_str = detail::get_string(j, "kind", "problem");
  const auto kind = problem_kind_from_string(kind_str);
  if (!kind) throw ConfigError("problem.kind: unknown problem '" + kind_str + "'");

  ProblemSpec spec;
  spec.kind = *kind;
  spec.hidden = get_u64(j, "hidden", spec.hidden, "problem");
  spec.n = get_u64(j, "n", spec.n, "problem");
  // Per-kind default dimension: the mlp packs [W1|b1|w2|b2] for a 4-wide input.
  const std::size_t default_d =
      spec.kind == ProblemKind::TwoLayerMlp ? spec.hidden * 4 + 2 * spec.hidden + 1 : spec.d;
  spec.d = get_u64(j, "d", default_d, "problem");
  spec.seed = get_u64(j, "seed", spec.seed, "problem");
  spec.label_noise = get_double(j, "label_noise", spec.label_noise, "problem");
  spec.reg_weight = get_double(j, "reg_weight", spec.reg_weight, "problem");
  spec.target_noise = get_double(j, "target_noise", spec.target_noise, "problem");
  return spec;
}

namespace detail {

inline void apply_schedule_json(const json& j, ScheduleConfig& sched,
                                std::optional<double>& L_override) {
  require_object(j, "schedule");
  require_known_fields(j,
                       {"epsilon", "sigma", "rho", "gamma", "L", "alpha", "beta", "T", "c_B",
                        "s_star_smoothing"},
                       "schedule");
  sched.epsilon = get_double(j, "epsilon", sched.epsilon, "schedule");
  sched.sigma = get_double(j, "sigma", sched.sigma, "schedule");
  sched.rho = get_double(j, "rho", sched.rho, "schedule");
  sched.gamma = get_double(j, "gamma", sched.gamma, "schedule");
  sched.alpha = get_double(j, "alpha", sched.alpha, "schedule");
  sched.beta = get_double(j, "beta", sched.beta, "schedule");
  sched.T = get_u64(j, "T", sched.T, "schedule");
  sched.c_B = get_double(j, "c_B", sched.c_B, "schedule");
  sched.s_star_smoothing = get_double(j, "s_star_smoothing", sched.s_star_smoothing, "schedule");
  if (j.contains("L")) {
    const double L = get_double(j, "L", 0.0, "schedule");
    if (!(L > 0.0)) throw ConfigError("schedule.L: must be positive when supplied");
    L_override = L;
  }
  if (!(sched.epsilon > 0.0)) throw ConfigError("schedule.epsilon: must be positive");
  if (sched.sigma < 0.0) throw ConfigError("schedule.sigma: must be non-negative");
  if (!(sched.rho > 0.0 && sched.rho < 1.0))
    throw ConfigError("schedule.rho: must lie in (0, 1)");
  if (!(sched.gamma > 0.0)) throw ConfigError("schedule.gamma: must be positive");
  if (sched.alpha < 0.0 || sched.alpha > 1.0)
    throw ConfigError("schedule.alpha: must lie in [0, 1]");
  if (sched.beta < 0.0 || sched.beta > 1.0) throw ConfigError("schedule.beta: must lie in [0, 1]");
  if (sched.T < 1) throw ConfigError("schedule.T: must be >= 1");
  if (!(sched.c_B > 0.0)) throw ConfigError("schedule.c_B: must be positive");
  if (sched.s_star_smoothing < 0.0 || sched.s_star_smoothing >= 1.0)
    throw ConfigError("schedule.s_star_smoothing: must lie in [0, 1)");
}

inline std::vector<std::size_t> parse_size_list(const json& v, const char* where) {
  auto one = [&](const json& e) -> std::size_t {
    if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0)
      throw ConfigError(std::string(where) + ": entries must be positive integers");
    return e.get<std::size_t>();
  };
  std::vector<std::size_t> out;
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(std::string(where) + ": list must not be empty");
    for (const auto& e : v) out.push_back(one(e));
  } else {
    out.push_back(one(v));
  }
  return out;
}

inline std::vector<double> parse_eta_list(const json& v, const char* where) {
  auto one = [&](const json& e) -> double {
    if (!e.is_number() || !(e.get<double>() > 0.0))
      throw ConfigError(std::string(where) + ": entries must be positive numbers");
    return e.get<double>();
  };
  std::vector<double> out;
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(std::string(where) + ": list must not be empty");
    for (const auto& e : v) out.push_back(one(e));
  } else {
    out.push_back(one(v));
  }
  return out;
}

inline FixedSchedule parse_fixed_schedule(const json& j) {
  require_object(j, "fixed");
  require_known_fields(j, {"B", "b", "eta"}, "fixed");
  for (const char* key : {"B", "b", "eta"})
    if (!j.contains(key))
      throw ConfigError(std::string("fixed: missing required field '") + key + "'");
  FixedSchedule fs;
  fs.B = parse_size_list(j.at("B"), "fixed.B");
  fs.b = parse_size_list(j.at("b"), "fixed.b");
  fs.eta = parse_eta_list(j.at("eta"), "fixed.eta");
  return fs;
}

}  // namespace detail

// Parse one run object. `base_problem` / `base_schedule` supply whole-object
// defaults when a compare entry omits its own (no deep merging).
inline RunSetup parse_run_setup(const nlohmann::json& j, const nlohmann::json* base_problem,
                                const nlohmann::json* base_schedule) {
  using detail::json;
  detail::require_object(j, "run");
  detail::require_known_fields(j,
                               {"name", "problem", "algorithm", "schedule", "estimator", "fixed",
                                "eta0", "seed", "epsilon_stop", "init_scale", "init_seed"},
                               "run");
  if (!j.contains("algorithm")) throw ConfigError("run: missing required field 'algorithm'");
  const std::string algo_str = detail::get_string(j, "algorithm", "run");
  const auto algo = algorithm_from_string(algo_str);
  if (!algo) throw ConfigError("run.algorithm: unknown algorithm '" + algo_str + "'");

  RunSetup setup;
  setup.run.algorithm = *algo;
  setup.name = j.contains("name") ? detail::get_string(j, "name", "run") : algo_str;

  const json* prob = j.contains("problem") ? &j.at("problem") : base_problem;
  if (!prob) throw ConfigError("run: missing required field 'problem'");
  setup.problem = parse_problem_spec(*prob);

  const json* sched = j.contains("schedule") ? &j.at("schedule") : base_schedule;
  if (sched) detail::apply_schedule_json(*sched, setup.run.schedule, setup.L_override);

  constexpr double kGammaCap = 1.0 / 3.0 + 1e-12;
  if ((*algo == Algorithm::Vcsg || *algo == Algorithm::Scsg) &&
      setup.run.schedule.gamma > kGammaCap)
    throw ConfigError("schedule.gamma: must be <= 1/3 for " + algo_str);

  if (j.contains("estimator")) {
    if (*algo != Algorithm::BatchingSvrg)
      throw ConfigError("run.estimator: only applies to batching_svrg");
    try {
      setup.run.estimator = parse_estimator(detail::get_string(j, "estimator", "run"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("run.estimator: ") + e.what());
    }
  }
  if (j.contains("fixed")) {
    if (*algo != Algorithm::BatchingSvrg)
      throw ConfigError("run.fixed: only applies to batching_svrg");
    setup.run.fixed = detail::parse_fixed_schedule(j.at("fixed"));
  } else if (*algo == Algorithm::BatchingSvrg) {
    throw ConfigError("run: batching_svrg requires a 'fixed' schedule ({B, b, eta})");
  }
  if (j.contains("eta0")) {
    if (*algo != Algorithm::Sgd) throw ConfigError("run.eta0: only applies to sgd");
    setup.run.eta0 = detail::get_double(j, "eta0", 0.0, "run");
    if (!(setup.run.eta0 > 0.0)) throw ConfigError("run.eta0: must be positive");
  }
  setup.run.seed = detail::get_u64(j, "seed", setup.run.seed, "run");
  if (j.contains("epsilon_stop") && !j.at("epsilon_stop").is_null()) {
    const double es = detail::get_double(j, "epsilon_stop", 0.0, "run");
    if (!(es > 0.0)) throw ConfigError("run.epsilon_stop: must be positive (or null)");
    setup.run.epsilon_stop = es;
  }
  setup.run.init_scale = detail::get_double(j, "init_scale", setup.run.init_scale, "run");
  if (!(setup.run.init_scale > 0.0)) throw ConfigError("run.init_scale: must be positive");
  if (j.contains("init_seed"))
    setup.run.init_seed = detail::get_u64(j, "init_seed", 0, "run");
  return setup;
}

inline BenchConfig parse_bench_config(const nlohmann::json& j) {
  using detail::json;
  detail::require_object(j, "config");
  detail::require_known_fields(j,
                               {"problem", "schedule", "runs", "algorithms", "seeds",
                                "target_epsilon", "out", "format"},
                               "config");
  const json* base_problem = j.contains("problem") ? &j.at("problem") : nullptr;
  const json* base_schedule = j.contains("schedule") ? &j.at("schedule") : nullptr;

  BenchConfig cfg;
  if (j.contains("runs") == j.contains("algorithms"))
    throw ConfigError("config: provide exactly one of 'runs' or 'algorithms'");
  if (j.contains("runs")) {
    const json& runs = j.at("runs");
    if (!runs.is_array() || runs.empty())
      throw ConfigError("config.runs: expected a non-empty array");
    for (const auto& r : runs) cfg.runs.push_back(parse_run_setup(r, base_problem, base_schedule));
  } else {
    const json& algos = j.at("algorithms");
    if (!algos.is_array() || algos.empty())
      throw ConfigError("config.algorithms: expected a non-empty array");
    for (const auto& a : algos) {
      if (!a.is_string()) throw ConfigError("config.algorithms: entries must be strings");
      json run_obj = {{"algorithm", a.get<std::string>()}};
      cfg.runs.push_back(parse_run_setup(run_obj, base_problem, base_schedule));
    }
  }
  if (j.contains("seeds")) {
    const json& seeds = j.at("seeds");
    if (!seeds.is_array() || seeds.empty())
      throw ConfigError("config.seeds: expected a non-empty array");
    cfg.seeds.clear();
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned())
        throw ConfigError("config.seeds: entries must be non-negative integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  cfg.target_epsilon = detail::get_double(j, "target_epsilon", cfg.target_epsilon, "config");
  if (!(cfg.target_epsilon > 0.0)) throw ConfigError("config.target_epsilon: must be positive");
  if (j.contains("out")) cfg.out_dir = detail::get_string(j, "out", "config");
  if (j.contains("format"))
    cfg.format = output_format_from_string(detail::get_string(j, "format", "config"));
  return cfg;
}

// Single-run config file: the same object shape parse_run_setup accepts.
inline RunSetup parse_single_run_config(const nlohmann::json& j) {
  return parse_run_setup(j, nullptr, nullptr);
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

// Build the problem and finish the run config against it: component count and
// (unless overridden) the problem's own smoothness constant.
inline std::shared_ptr<FiniteSumObjective> materialize(RunSetup& setup) {
  auto obj = make_problem(setup.problem);
  setup.run.schedule.n = obj->num_components();
  setup.run.schedule.L = setup.L_override.value_or(obj->smoothness());
  if (!(setup.run.schedule.L > 0.0))
    throw ConfigError("schedule.L: resolved smoothness constant must be positive");
  return obj;
}

}  // namespace vcsg
