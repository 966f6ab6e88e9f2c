#pragma once

// Experiment harness behind the `slm_bench` CLI. Each subcommand is a plain
// function here so it can be tested without going through argument parsing.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "slm/benchfuncs.hpp"
#include "slm/config.hpp"
#include "slm/engine.hpp"
#include "slm/error.hpp"
#include "slm/grid.hpp"

namespace slm {

inline constexpr int kReportSchemaVersion = 1;

inline const char* const kComparisonHeader = "Algorithm,Iteration,Optimal point,Best Point,Error";
inline const char* const kSpeedupHeader = "Algorithm,NP,Time,LB Time,Speedup,Efficiency";
inline const char* const kTraceHeader = "generation,h,point,mutated point,label,solution";

struct ExperimentConfig {
  std::string function = "f1";
  std::optional<SearchDomain> domain;  // defaults to the function's canonical box
  EngineConfig engine;
  ExecutionBackend backend;
  std::vector<std::size_t> sweep{1, 2, 4};
  std::size_t trials = 30;
  std::uint64_t seed = 1;
  double delay_ms = 0.0;
  std::size_t hardware_cap = std::max(1U, std::thread::hardware_concurrency());

  // Baseline budgets (compare)
  std::size_t rs_budget = 1000;
  std::size_t rsw_budget = 500;
  std::size_t sa_budget = 150;
  std::optional<std::vector<double>> rsw_start;  // defaults to the domain's upper corner
  double rsw_step = 0.1;
  AnnealingSchedule sa;

  void validate() const {
    engine.validate();
    backend.validate();
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (sweep.empty()) throw ConfigError("worker sweep is empty");
    for (auto p : sweep)
      if (p < 1) throw ConfigError("sweep values must be at least 1");
    if (delay_ms < 0) throw ConfigError("delay must be non-negative");
    if (rs_budget < 1 || rsw_budget < 1 || sa_budget < 1) throw ConfigError("baseline budgets must be at least 1");
  }
};

// ---------------------------------------------------------------------------
// Parsing helpers

namespace detail {

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

/// "lo,hi" (every axis) or "lo,hi;lo,hi;..." (one pair per axis).
inline SearchDomain parse_domain(const std::string& text, std::size_t dimension) {
  std::vector<double> lo;
  std::vector<double> hi;
  for (const auto& pair : detail::split(text, ';')) {
    const auto parts = detail::split(pair, ',');
    if (parts.size() != 2) throw ConfigError("domain axis must be 'lo,hi', got '" + pair + "'");
    lo.push_back(detail::parse_double(parts[0]));
    hi.push_back(detail::parse_double(parts[1]));
  }
  if (lo.size() == 1 && dimension > 1) {
    lo.assign(dimension, lo[0]);
    hi.assign(dimension, hi[0]);
  }
  if (lo.size() != dimension)
    throw ConfigError("domain has " + std::to_string(lo.size()) + " axes, function needs " + std::to_string(dimension));
  return SearchDomain(std::move(lo), std::move(hi));
}

/// "a..b" or a comma-separated list.
inline std::vector<std::size_t> parse_sweep(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_count = [](const std::string& s) {
    const double v = detail::parse_double(s);
    if (v < 1 || v != std::floor(v)) throw ConfigError("worker counts must be positive integers, got '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto a = to_count(text.substr(0, dots));
    const auto b = to_count(text.substr(dots + 2));
    if (b < a) throw ConfigError("empty sweep range '" + text + "'");
    for (auto p = a; p <= b; ++p) out.push_back(p);
    return out;
  }
  for (const auto& part : detail::split(text, ',')) out.push_back(to_count(part));
  if (out.empty()) throw ConfigError("empty sweep");
  return out;
}

inline LabelingStrategy parse_strategy(const std::string& s) {
  if (s == "best-neighbor") return LabelingStrategy::BestNeighbor;
  if (s == "gradient") return LabelingStrategy::GradientFixedPoint;
  throw ConfigError("unknown strategy '" + s + "' (expected best-neighbor or gradient)");
}

inline Sense parse_sense(const std::string& s) {
  if (s == "min") return Sense::Min;
  if (s == "max") return Sense::Max;
  throw ConfigError("unknown sense '" + s + "' (expected min or max)");
}

// ---------------------------------------------------------------------------
// Formatting

/// Shortest decimal that round-trips.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline std::string format_point(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_number(x[i]);
  return s + ")";
}

/// `v` cut (not rounded) to `decimals` places, after rounding away binary noise at 1e-6.
inline std::string format_truncated(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  const auto dot = s.find('.');
  if (dot == std::string::npos) return s;
  return decimals == 0 ? s.substr(0, dot) : s.substr(0, dot + 1 + static_cast<std::size_t>(decimals));
}

inline std::string csv_quote(const std::string& s) { return '"' + s + '"'; }

// ---------------------------------------------------------------------------
// Run report

inline nlohmann::json to_json(const Cell& c, const SearchDomain& d) {
  const auto verts = cell_vertices(c);
  return {{"level", c.level()},
          {"anchor", c.anchor()},
          {"lower", to_coords(verts.front(), d)},
          {"upper", to_coords(verts.back(), d)}};
}

inline nlohmann::json to_json(const RunReport& r, const SearchDomain& d) {
  using nlohmann::json;
  json gens = json::array();
  for (const auto& t : r.generations) {
    json verts = json::array();
    for (const auto& v : t.vertices) {
      verts.push_back({{"point", v.x},
                       {"value", v.value},
                       {"label", v.label.value},
                       {"mutated", v.mutated_x},
                       {"mutated_value", v.mutated_value}});
    }
    json survivors = json::array();
    for (const auto& c : t.survivors) survivors.push_back(to_json(c, d));
    json g = {{"generation", t.generation},
              {"step", t.step},
              {"active_cells", t.active.size()},
              {"fallback", t.fallback},
              {"evaluations", t.evaluations},
              {"vertex_labelings", t.vertex_labelings},
              {"vertices", verts},
              {"survivors", survivors}};
    if (t.best_so_far) g["best_so_far"] = {{"point", t.best_so_far->x}, {"cost", t.best_so_far->cost}};
    gens.push_back(std::move(g));
  }
  json finals = json::array();
  for (const auto& f : r.final_points)
    finals.push_back({{"cell", to_json(f.cell, d)}, {"point", f.x}, {"value", f.value}, {"label", f.label.value}});
  return {{"generations", gens},
          {"final_points", finals},
          {"best", {{"point", r.best.x}, {"value", r.best.value}}},
          {"last_complete_generation", r.last_complete_generation},
          {"evaluations", r.evaluations},
          {"vertex_labelings", r.vertex_labelings},
          {"registry_evaluations", r.registry_evaluations},
          {"wall_seconds", r.wall_seconds}};
}

/// Per-generation table: point, its mutated point, label; the best-so-far
/// point appears in the solution column of each generation's first row.
inline void write_trace_csv(std::ostream& os, const RunReport& r) {
  os << kTraceHeader << '\n';
  for (const auto& t : r.generations) {
    bool first = true;
    for (const auto& v : t.vertices) {
      os << t.generation << ',' << format_number(t.step.front()) << ',' << csv_quote(format_point(v.x)) << ','
         << csv_quote(format_point(v.mutated_x)) << ',' << v.label.value << ',';
      if (first && t.best_so_far) os << csv_quote(format_point(t.best_so_far->x));
      os << '\n';
      first = false;
    }
  }
}

struct ResolvedProblem {
  BenchFunction bench;
  SearchDomain domain;
  Objective objective;
};

inline ResolvedProblem resolve(const ExperimentConfig& cfg) {
  auto bench = bench_function(cfg.function);
  SearchDomain d = cfg.domain.value_or(bench.domain);
  if (d.dimension() != bench.domain.dimension())
    throw ConfigError("domain dimension does not match function '" + cfg.function + "'");
  auto obj = bench.objective.with_sense(cfg.engine.sense);
  if (cfg.delay_ms > 0)
    obj = with_delay(obj, std::chrono::duration_cast<std::chrono::nanoseconds>(
                              std::chrono::duration<double, std::milli>(cfg.delay_ms)));
  return {std::move(bench), std::move(d), std::move(obj)};
}

struct RunOutput {
  RunReport report;
  nlohmann::json json;
};

/// One engine run; the JSON document carries the schema version and run metadata.
inline RunOutput cmd_run(const ExperimentConfig& cfg, Executor* exec = nullptr) {
  cfg.validate();
  auto problem = resolve(cfg);
  std::optional<Executor> own;
  if (!exec) exec = &own.emplace(cfg.backend);
  RunOutput out;
  out.report = run(problem.objective, problem.domain, cfg.engine, *exec);
  out.json = to_json(out.report, problem.domain);
  out.json["schema_version"] = kReportSchemaVersion;
  out.json["function"] = cfg.function;
  out.json["domain"] = {{"lower", problem.domain.lower()}, {"upper", problem.domain.upper()}};
  out.json["backend"] = to_string(cfg.backend.kind);
  out.json["algorithm"] = algorithm_name(cfg.backend.kind);
  out.json["workers"] = cfg.backend.workers;
  out.json["config"] = {{"strategy", to_string(cfg.engine.strategy)},
                        {"max_generations", cfg.engine.max_generations},
                        {"h_tolerance", cfg.engine.h_tolerance},
                        {"multimodal", cfg.engine.multimodal},
                        {"sense", cfg.engine.sense == Sense::Max ? "max" : "min"}};
  return out;
}

// ---------------------------------------------------------------------------
// Comparison table

struct ComparisonRow {
  std::string algorithm;
  std::size_t iterations = 0;
  std::vector<double> found;
  std::optional<std::vector<double>> known;
  std::optional<std::vector<double>> error;  // |found - known| per coordinate
};

inline ComparisonRow make_comparison_row(std::string algorithm, std::size_t iterations, std::vector<double> found,
                                         const std::vector<std::vector<double>>& minimizers) {
  ComparisonRow row{std::move(algorithm), iterations, std::move(found), std::nullopt, std::nullopt};
  if (minimizers.empty()) return row;
  // Nearest known minimizer (max-norm), for multimodal suites.
  const std::vector<double>* nearest = nullptr;
  double nearest_dist = 0.0;
  for (const auto& m : minimizers) {
    double dist = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) dist = std::max(dist, std::abs(row.found[i] - m[i]));
    if (!nearest || dist < nearest_dist) {
      nearest = &m;
      nearest_dist = dist;
    }
  }
  row.known = *nearest;
  std::vector<double> err(row.found.size());
  for (std::size_t i = 0; i < err.size(); ++i) err[i] = std::abs(row.found[i] - (*nearest)[i]);
  row.error = std::move(err);
  return row;
}

/// The optimizer against the three sampling baselines, one row each.
inline std::vector<ComparisonRow> cmd_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  auto problem = resolve(cfg);
  const auto& mins = problem.bench.minimizers;
  std::vector<ComparisonRow> rows;

  const auto report = run(problem.objective, problem.domain, cfg.engine, cfg.backend);
  rows.push_back(make_comparison_row("SLM", report.generations.back().generation, report.best.x, mins));

  const auto rs = random_search(problem.objective, problem.domain, cfg.rs_budget, cfg.seed);
  rows.push_back(make_comparison_row("RS", cfg.rs_budget, rs.x, mins));

  const auto start = cfg.rsw_start.value_or(problem.domain.upper());
  const auto walk = rsw(problem.objective, problem.domain, cfg.rsw_budget, cfg.seed, start, cfg.rsw_step);
  rows.push_back(make_comparison_row("RSW(x_initial=" + format_point(start) + ")", cfg.rsw_budget, walk.x, mins));

  const auto sa = simulated_annealing(problem.objective, problem.domain, cfg.sa_budget, cfg.seed, cfg.sa);
  rows.push_back(make_comparison_row("SA", cfg.sa_budget, sa.x, mins));
  return rows;
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << kComparisonHeader << '\n';
  for (const auto& r : rows) {
    os << csv_quote(r.algorithm) << ',' << r.iterations << ',' << csv_quote(format_point(r.found)) << ','
       << (r.known ? csv_quote(format_point(*r.known)) : "") << ',' << (r.error ? csv_quote(format_point(*r.error)) : "")
       << '\n';
  }
}

inline nlohmann::json comparison_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"algorithm", r.algorithm}, {"iterations", r.iterations}, {"optimal_point", r.found}};
    j["best_point"] = r.known ? nlohmann::json(*r.known) : nlohmann::json(nullptr);
    j["absolute_error"] = r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr);
    arr.push_back(std::move(j));
  }
  return {{"schema_version", kReportSchemaVersion}, {"rows", arr}};
}

// ---------------------------------------------------------------------------
// Speedup table

struct SpeedupRow {
  std::string algorithm;
  std::size_t np = 1;
  double time = 0.0;  // mean wall seconds
  double lb_time = 0.0;
  double speedup = 1.0;
  double efficiency = 1.0;
  std::size_t evaluations = 0;
};

/// LB = T1 / NP, speedup = T1 / T_NP, efficiency = speedup / NP.
inline SpeedupRow derive_speedup(std::string algorithm, std::size_t np, double t1, double tp) {
  if (np < 1) throw ConfigError("NP must be at least 1");
  if (!(t1 > 0) || !(tp > 0)) throw ConfigError("timings must be positive");
  SpeedupRow row{std::move(algorithm), np, tp, t1 / static_cast<double>(np), t1 / tp, 0.0, 0};
  row.efficiency = row.speedup / static_cast<double>(np);
  return row;
}

inline void write_speedup_csv(std::ostream& os, const std::vector<SpeedupRow>& rows) {
  os << kSpeedupHeader << '\n';
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.np << ',' << format_truncated(r.time) << ',' << format_truncated(r.lb_time) << ','
       << format_truncated(r.speedup) << ',' << format_truncated(r.efficiency) << '\n';
  }
}

inline nlohmann::json speedup_json(const std::vector<SpeedupRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    std::string legacy = r.algorithm;
    for (BackendKind k : {BackendKind::Serial, BackendKind::Parallel, BackendKind::Clustered})
      if (to_string(k) == r.algorithm) legacy = algorithm_name(k);
    arr.push_back({{"algorithm", r.algorithm},
                   {"algorithm_alias", legacy},
                   {"np", r.np},
                   {"time", r.time},
                   {"lb_time", r.lb_time},
                   {"speedup", r.speedup},
                   {"efficiency", r.efficiency},
                   {"evaluations", r.evaluations}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"rows", arr}};
}

/// Mean wall time of `trials` runs plus the (deterministic) evaluation count.
inline std::pair<double, std::size_t> time_backend(const ResolvedProblem& problem, const ExperimentConfig& cfg,
                                                   ExecutionBackend backend) {
  double total = 0.0;
  std::size_t evals = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const auto r = run(problem.objective, problem.domain, cfg.engine, backend);
    total += r.wall_seconds;
    evals = r.evaluations;
  }
  return {total / static_cast<double>(cfg.trials), evals};
}

/// Speedup sweep. SERIAL is timed once (NP = 1); PARALLEL and CLUSTERED are
/// timed at NP = 1 for their T1 and at every sweep value. NP above the
/// hardware cap is reported on `warnings` and still measured.
inline std::vector<SpeedupRow> cmd_bench(const ExperimentConfig& cfg, std::ostream& warnings = std::cerr) {
  cfg.validate();
  auto problem = resolve(cfg);
  std::vector<SpeedupRow> rows;

  {
    auto [t, evals] = time_backend(problem, cfg, ExecutionBackend::serial());
    auto row = derive_speedup(to_string(BackendKind::Serial), 1, t, t);
    row.evaluations = evals;
    rows.push_back(row);
  }
  for (std::size_t p : cfg.sweep)
    if (p > cfg.hardware_cap)
      warnings << "warning: NP=" << p << " exceeds the hardware cap of " << cfg.hardware_cap << "\n";
  for (BackendKind kind : {BackendKind::Parallel, BackendKind::Clustered}) {
    auto [t1, evals1] = time_backend(problem, cfg, {kind, 1});
    for (std::size_t p : cfg.sweep) {
      auto [tp, evals] = p == 1 ? std::pair{t1, evals1} : time_backend(problem, cfg, {kind, p});
      auto row = derive_speedup(to_string(kind), p, t1, tp);
      row.evaluations = evals;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace slm
