#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vcsg/config.hpp"
#include "vcsg/trace_io.hpp"

namespace vcsg {

struct CellResult {
  std::string run_name;
  std::uint64_t seed = 0;
  RunResult result;
  double wall_seconds = 0.0;  // informational only, never asserted on
  std::optional<std::uint64_t> ifo_to_target{};  // at the bench-wide target accuracy
};

struct ComparisonRow {
  std::string name;
  std::size_t seeds = 0;
  std::size_t reached = 0;
  std::size_t diverged = 0;
  std::optional<double> median_ifo{};  // absent when most seeds never reach the target
  std::optional<double> iqr_lo{};
  std::optional<double> iqr_hi{};
  double median_final_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double mean_wall_seconds = 0.0;
};

struct ComparisonTable {
  double target_epsilon = 0.0;
  std::vector<ComparisonRow> rows;
};

// Nearest-rank quantile on a sorted sample (q in (0, 1]): value at index
// ceil(q m) - 1. No interpolation, so medians of IFO counts stay attainable
// sample values.
inline double nearest_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank: empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("nearest_rank: q must lie in (0, 1]");
  const auto m = static_cast<double>(sorted.size());
  auto idx = static_cast<std::size_t>(std::ceil(q * m)) - 1;
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  return sorted[idx];
}

inline CellResult run_cell(const FiniteSumObjective& obj, const RunSetup& setup,
                           std::uint64_t seed, double target_epsilon) {
  RunConfig rc = setup.run;
  rc.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = run(obj, rc);
  const auto t1 = std::chrono::steady_clock::now();
  CellResult cell;
  cell.run_name = setup.name;
  cell.seed = seed;
  cell.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  cell.ifo_to_target = ifo_to_target(res.trace, target_epsilon);
  cell.result = std::move(res);
  return cell;
}

namespace detail {

// Unreached cells enter the order statistics as +infinity, so a quantile is
// reported only when that quantile's rank actually reached the target.
inline void fill_ifo_stats(ComparisonRow& row, std::vector<double> ifos) {
  std::sort(ifos.begin(), ifos.end());
  auto pick = [&](double q) -> std::optional<double> {
    const double v = nearest_rank(ifos, q);
    if (std::isinf(v)) return std::nullopt;
    return v;
  };
  row.median_ifo = pick(0.5);
  row.iqr_lo = pick(0.25);
  row.iqr_hi = pick(0.75);
}

}  // namespace detail

// Aggregate per-run statistics over seeds. Cells must cover each run name with
// the same seed count (as produced by run_compare).
inline ComparisonTable build_comparison_table(const std::vector<CellResult>& cells,
                                              const std::vector<std::string>& run_order,
                                              double target_epsilon) {
  ComparisonTable table;
  table.target_epsilon = target_epsilon;
  for (const auto& name : run_order) {
    ComparisonRow row;
    row.name = name;
    std::vector<double> ifos;
    std::vector<double> finals;
    double wall = 0.0;
    for (const auto& cell : cells) {
      if (cell.run_name != name) continue;
      ++row.seeds;
      wall += cell.wall_seconds;
      if (cell.result.status == RunStatus::Diverged) ++row.diverged;
      if (cell.ifo_to_target) {
        ++row.reached;
        ifos.push_back(static_cast<double>(*cell.ifo_to_target));
      } else {
        ifos.push_back(std::numeric_limits<double>::infinity());
      }
      const auto& tr = cell.result.trace;
      finals.push_back(tr.epochs.empty() ? tr.initial_grad_norm_sq
                                         : tr.epochs.back().grad_norm_sq);
    }
    if (row.seeds == 0) throw std::invalid_argument("comparison: no cells for run " + name);
    detail::fill_ifo_stats(row, std::move(ifos));
    std::sort(finals.begin(), finals.end());
    row.median_final_grad_norm_sq = nearest_rank(finals, 0.5);
    row.mean_wall_seconds = wall / static_cast<double>(row.seeds);
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::string comparison_csv(const ComparisonTable& table) {
  std::string out =
      "algorithm,seeds,reached,diverged,median_ifo,iqr25_ifo,iqr75_ifo,"
      "median_final_grad_norm_sq,mean_wall_seconds\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("unreached");
  };
  for (const auto& r : table.rows) {
    out += r.name;
    out.push_back(',');
    out += std::to_string(r.seeds);
    out.push_back(',');
    out += std::to_string(r.reached);
    out.push_back(',');
    out += std::to_string(r.diverged);
    out.push_back(',');
    out += cell(r.median_ifo);
    out.push_back(',');
    out += cell(r.iqr_lo);
    out.push_back(',');
    out += cell(r.iqr_hi);
    out.push_back(',');
    out += format_double(r.median_final_grad_norm_sq);
    out.push_back(',');
    out += format_double(r.mean_wall_seconds);
    out.push_back('\n');
  }
  return out;
}

inline nlohmann::json comparison_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row;
    row["algorithm"] = r.name;
    row["seeds"] = r.seeds;
    row["reached"] = r.reached;
    row["diverged"] = r.diverged;
    row["median_ifo"] = r.median_ifo ? nlohmann::json(*r.median_ifo) : nlohmann::json(nullptr);
    row["iqr25_ifo"] = r.iqr_lo ? nlohmann::json(*r.iqr_lo) : nlohmann::json(nullptr);
    row["iqr75_ifo"] = r.iqr_hi ? nlohmann::json(*r.iqr_hi) : nlohmann::json(nullptr);
    row["median_final_grad_norm_sq"] = r.median_final_grad_norm_sq;
    row["mean_wall_seconds"] = r.mean_wall_seconds;
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"target_epsilon", table.target_epsilon}, {"rows", std::move(rows)}};
}

struct CompareOutput {
  ComparisonTable table;
  std::vector<CellResult> cells;
  bool any_diverged = false;
};

// Execute the (run x seed) matrix, at most `jobs` cells in flight. Each cell
// owns its RNG and counters; problems are materialized once per run and shared
// read-only, so results do not depend on `jobs`.
inline CompareOutput run_compare(BenchConfig& cfg, std::size_t jobs = 1) {
  if (cfg.runs.empty()) throw ConfigError("config: no runs to execute");
  if (cfg.seeds.empty()) throw ConfigError("config: no seeds to execute");
  std::vector<std::string> names;
  for (const auto& setup : cfg.runs) {
    if (std::find(names.begin(), names.end(), setup.name) != names.end())
      throw ConfigError("config.runs: duplicate run name '" + setup.name + "'");
    names.push_back(setup.name);
  }
  std::vector<std::shared_ptr<FiniteSumObjective>> problems;
  problems.reserve(cfg.runs.size());
  for (auto& setup : cfg.runs) problems.push_back(materialize(setup));

  struct Job {
    std::size_t run_idx;
    std::uint64_t seed;
  };
  std::vector<Job> todo;
  for (std::size_t r = 0; r < cfg.runs.size(); ++r)
    for (const auto seed : cfg.seeds) todo.push_back({r, seed});

  std::vector<CellResult> cells(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        const Job& job = todo[i];
        cells[i] =
            run_cell(*problems[job.run_idx], cfg.runs[job.run_idx], job.seed, cfg.target_epsilon);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, todo.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  CompareOutput out;
  out.table = build_comparison_table(cells, names, cfg.target_epsilon);
  for (const auto& c : cells)
    out.any_diverged = out.any_diverged || c.result.status == RunStatus::Diverged;
  out.cells = std::move(cells);
  return out;
}

inline nlohmann::json cell_summary_json(const CellResult& cell) {
  nlohmann::json j = summary_json(cell.result);
  j["name"] = cell.run_name;
  j["seed"] = cell.seed;
  j["wall_seconds"] = cell.wall_seconds;
  return j;
}

// Persist one cell under out_dir as <name>_seed<seed>.{csv,json} per format.
inline void write_cell_outputs(const CellResult& cell, const std::filesystem::path& out_dir,
                               OutputFormat format) {
  const std::string stem = cell.run_name + "_seed" + std::to_string(cell.seed);
  if (format != OutputFormat::Json)
    emit_trace_csv(cell.result.trace, out_dir / (stem + ".csv"));
  if (format != OutputFormat::Csv)
    write_text_atomic(out_dir / (stem + ".json"), cell_summary_json(cell).dump(2) + "\n");
}

}  // namespace vcsg
