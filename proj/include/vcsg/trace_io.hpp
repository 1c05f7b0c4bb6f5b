#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "vcsg/optimizers.hpp"

namespace vcsg {

// Shortest decimal form that parses back to the same double. std::to_chars is
// fully specified, so formatted traces are byte-identical across platforms.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kTraceHeader =
    "j,regime,B,b,eta,lambda,N,ifo,f,grad_norm_sq,s_star";

inline std::string trace_csv(const RunTrace& trace) {
  std::string out{kTraceHeader};
  out.push_back('\n');
  for (const auto& r : trace.epochs) {
    out += std::to_string(r.epoch);
    out.push_back(',');
    out += to_string(r.regime);
    out.push_back(',');
    out += std::to_string(r.B);
    out.push_back(',');
    out += std::to_string(r.b);
    out.push_back(',');
    out += format_double(r.eta);
    out.push_back(',');
    out += format_double(r.lambda);
    out.push_back(',');
    out += std::to_string(r.inner_steps);
    out.push_back(',');
    out += std::to_string(r.cumulative_ifo);
    out.push_back(',');
    out += format_double(r.f);
    out.push_back(',');
    out += format_double(r.grad_norm_sq);
    out.push_back(',');
    out += format_double(r.s_star);
    out.push_back('\n');
  }
  return out;
}

// Write-to-temp-then-rename so concurrent bench cells never expose a torn file.
inline void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " +
                               ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                                   ec.message());
}

inline void emit_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  write_text_atomic(path, trace_csv(trace));
}

namespace detail {

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::runtime_error("trace line " + std::to_string(line) + ": bad " + what + " '" +
                             std::string(field) + "'");
  return value;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace detail

inline std::vector<TraceRecord> parse_trace_csv(std::string_view text) {
  std::vector<TraceRecord> records;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kTraceHeader)
        throw std::runtime_error("trace line 1: unexpected header '" + std::string(line) + "'");
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 11)
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 11 fields, got " +
                               std::to_string(f.size()));
    TraceRecord r;
    r.epoch = detail::parse_number<std::size_t>(f[0], lineno, "epoch");
    const auto regime = regime_from_string(f[1]);
    if (!regime)
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": bad regime '" +
                               std::string(f[1]) + "'");
    r.regime = *regime;
    r.B = detail::parse_number<std::size_t>(f[2], lineno, "B");
    r.b = detail::parse_number<std::size_t>(f[3], lineno, "b");
    r.eta = detail::parse_number<double>(f[4], lineno, "eta");
    r.lambda = detail::parse_number<double>(f[5], lineno, "lambda");
    r.inner_steps = detail::parse_number<std::uint64_t>(f[6], lineno, "N");
    r.cumulative_ifo = detail::parse_number<std::uint64_t>(f[7], lineno, "ifo");
    r.f = detail::parse_number<double>(f[8], lineno, "f");
    r.grad_norm_sq = detail::parse_number<double>(f[9], lineno, "grad_norm_sq");
    r.s_star = detail::parse_number<double>(f[10], lineno, "s_star");
    records.push_back(r);
  }
  return records;
}

inline std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_csv(ss.str());
}

// JSON mirror of a RunResult; the per-epoch table stays in the CSV.
inline nlohmann::json summary_json(const RunResult& res) {
  nlohmann::json j;
  j["status"] = res.status == RunStatus::Ok ? "ok" : "diverged";
  j["sampled_epoch"] = res.sampled_epoch;
  j["epochs"] = res.trace.epochs.size();
  j["work_ifo"] = res.work_ifo;
  j["eval_ifo"] = res.eval_ifo;
  j["initial_f"] = res.trace.initial_f;
  j["initial_grad_norm_sq"] = res.trace.initial_grad_norm_sq;
  j["best_f"] = res.trace.best_f;
  j["delta_f"] = res.trace.delta_f();
  j["cap_events"] = res.trace.cap_events;
  if (!res.trace.epochs.empty()) {
    const auto& last = res.trace.epochs.back();
    j["final_f"] = last.f;
    j["final_grad_norm_sq"] = last.grad_norm_sq;
  }
  if (res.ifo_to_target)
    j["ifo_to_target"] = *res.ifo_to_target;
  else
    j["ifo_to_target"] = nullptr;
  j["output"] = res.output;
  return j;
}

}  // namespace vcsg
