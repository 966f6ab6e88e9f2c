#pragma once

// The subdivision-labeling generation loop.
//
// Generation g labels every vertex of the level-g cells through the execution
// backend, then subdivides the completely labeled cells into the level-(g+1)
// active set. The loop ends when the step size reaches the tolerance or g
// reaches max_generations. In genetic-algorithm terms best-neighbor search is
// the mutation step and the complete-label filter is selection.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slm/config.hpp"
#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/labeling.hpp"
#include "slm/objective.hpp"
#include "slm/parallel.hpp"
#include "slm/registry.hpp"

namespace slm {

struct GenerationTrace {
  int generation = 0;
  std::vector<double> step;             // per-axis h of the active cells
  std::vector<VertexRecord> vertices;   // spatial order
  std::vector<Cell> active;
  std::vector<Cell> survivors;
  bool fallback = false;                // no complete cell; the best vertex's cell was kept
  std::size_t evaluations = 0;
  std::size_t vertex_labelings = 0;
  std::optional<Incumbent> best_so_far;

  friend bool operator==(const GenerationTrace&, const GenerationTrace&) = default;
};

/// Best vertex of one surviving cell.
struct FinalPoint {
  Cell cell;
  DyadicPoint point;
  std::vector<double> x;
  double value = 0.0;
  Label label;

  friend bool operator==(const FinalPoint&, const FinalPoint&) = default;
};

/// Best grid point evaluated during the run: a vertex or one of its mutated offspring.
struct BestPoint {
  DyadicPoint point;
  std::vector<double> x;
  double value = 0.0;

  friend bool operator==(const BestPoint&, const BestPoint&) = default;
};

struct RunReport {
  std::vector<GenerationTrace> generations;
  std::vector<FinalPoint> final_points;  // one per surviving cell, best first
  BestPoint best;
  /// Last generation whose survivors were genuinely complete (not the fallback); -1 if none.
  int last_complete_generation = -1;
  std::size_t evaluations = 0;           // objective calls (unique calls for memoizing backends)
  std::size_t vertex_labelings = 0;
  std::size_t registry_evaluations = 0;  // unique evaluations held by the run's registry
  double wall_seconds = 0.0;
};

/// Everything except timing and the evaluation counters, which legitimately
/// differ between backend kinds.
inline bool same_result(const RunReport& a, const RunReport& b) {
  if (a.generations.size() != b.generations.size() || a.final_points != b.final_points || a.best != b.best ||
      a.last_complete_generation != b.last_complete_generation)
    return false;
  for (std::size_t g = 0; g < a.generations.size(); ++g) {
    GenerationTrace x = a.generations[g];
    GenerationTrace y = b.generations[g];
    x.evaluations = y.evaluations = 0;
    x.vertex_labelings = y.vertex_labelings = 0;
    if (!(x == y)) return false;
  }
  return true;
}

/// Everything except wall time.
inline bool identical_except_timing(const RunReport& a, const RunReport& b) {
  return a.generations == b.generations && a.final_points == b.final_points && a.best == b.best &&
         a.last_complete_generation == b.last_complete_generation && a.evaluations == b.evaluations &&
         a.vertex_labelings == b.vertex_labelings && a.registry_evaluations == b.registry_evaluations;
}

struct Selection {
  std::vector<Cell> survivors;
  bool fallback = false;
};

namespace detail {

using RecordIndex = std::unordered_map<DyadicPoint, const VertexRecord*, DyadicPointHash>;

inline RecordIndex index_records(const std::vector<VertexRecord>& records) {
  RecordIndex idx;
  for (const auto& r : records) idx.emplace(r.point, &r);
  return idx;
}

inline const VertexRecord& record_of(const RecordIndex& idx, const DyadicPoint& p) {
  auto it = idx.find(p.canonical());
  if (it == idx.end()) throw EngineError("vertex " + p.str() + " was not labeled");
  return *it->second;
}

inline double oriented(double value, Sense s) { return s == Sense::Max ? -value : value; }

/// Lowest-cost vertex of `c`; ties go to the spatially smaller vertex.
inline const VertexRecord& best_vertex(const Cell& c, const RecordIndex& idx, Sense s) {
  const VertexRecord* best = nullptr;
  for (const auto& v : cell_vertices(c)) {
    const VertexRecord& r = record_of(idx, v);
    if (!best) {
      best = &r;
      continue;
    }
    const double a = oriented(r.value, s);
    const double b = oriented(best->value, s);
    if (a < b || (a == b && spatially_less(r.point, best->point))) best = &r;
  }
  return *best;
}

}  // namespace detail

/// Completely labeled cells of `cells` (in the given order).
///
/// With `multimodal` every complete cell survives; otherwise the one whose
/// best vertex has the lowest cost (earlier cell on ties). If no cell is
/// complete, the first cell containing the overall best vertex survives and
/// the fallback flag is set.
inline Selection select_cells(const std::vector<Cell>& cells, const std::vector<VertexRecord>& records,
                              const EngineConfig& cfg) {
  if (cells.empty()) throw EngineError("no active cells to select from");
  const auto idx = detail::index_records(records);

  std::vector<Cell> complete;
  for (const auto& c : cells) {
    std::vector<Label> labels;
    for (const auto& v : cell_vertices(c)) labels.push_back(detail::record_of(idx, v).label);
    if (is_complete(labels, c.dimension())) complete.push_back(c);
  }

  Selection sel;
  if (!complete.empty()) {
    if (cfg.multimodal) {
      sel.survivors = std::move(complete);
    } else {
      const Cell* keep = &complete.front();
      double keep_cost = detail::oriented(detail::best_vertex(*keep, idx, cfg.sense).value, cfg.sense);
      for (const auto& c : complete) {
        const double cost = detail::oriented(detail::best_vertex(c, idx, cfg.sense).value, cfg.sense);
        if (cost < keep_cost) {
          keep = &c;
          keep_cost = cost;
        }
      }
      sel.survivors.push_back(*keep);
    }
    return sel;
  }

  sel.fallback = true;
  const VertexRecord* best = nullptr;
  for (const auto& c : cells) {
    const auto& r = detail::best_vertex(c, idx, cfg.sense);
    if (!best || detail::oriented(r.value, cfg.sense) < detail::oriented(best->value, cfg.sense) ||
        (r.value == best->value && spatially_less(r.point, best->point)))
      best = &r;
  }
  for (const auto& c : cells) {
    if (c.has_vertex(best->point)) {
      sel.survivors.push_back(c);
      break;
    }
  }
  return sel;
}

/// Per-run execution state: the registry and, for pooled backends, the workers.
class Executor {
 public:
  explicit Executor(ExecutionBackend backend) : backend_(backend) {
    backend_.validate();
    if (backend_.kind != BackendKind::Serial) pool_ = std::make_unique<WorkerPool>(backend_.workers);
  }

  const ExecutionBackend& backend() const noexcept { return backend_; }
  EvalRegistry& registry() noexcept { return registry_; }
  const EvalRegistry& registry() const noexcept { return registry_; }

  RoundResult round(const std::vector<Cell>& active, const Objective& obj, const SearchDomain& d,
                    const EngineConfig& cfg, const std::optional<Incumbent>& incumbent) {
    return master_round(active, obj, d, cfg, backend_, registry_, pool_.get(), incumbent);
  }

 private:
  ExecutionBackend backend_;
  EvalRegistry registry_;
  std::unique_ptr<WorkerPool> pool_;
};

struct GenerationResult {
  GenerationTrace trace;
  std::vector<Cell> next;  // subdivided survivors (empty when not requested)
};

/// One label-select-subdivide pass over `active`.
inline GenerationResult generation_step(std::vector<Cell> active, const Objective& obj, const SearchDomain& d,
                                        const EngineConfig& cfg, Executor& exec, int generation,
                                        const std::optional<Incumbent>& incumbent, bool subdivide_survivors = true) {
  if (active.empty()) throw EngineError("generation " + std::to_string(generation) + " has no active cells");
  std::sort(active.begin(), active.end());
  const Objective oriented_obj = obj.with_sense(cfg.sense);

  auto round = exec.round(active, oriented_obj, d, cfg, incumbent);
  auto sel = select_cells(active, round.records, cfg);

  GenerationResult out;
  GenerationTrace& t = out.trace;
  t.generation = generation;
  t.step = step_size(d, active.front().level());
  t.vertices = std::move(round.records);
  t.active = std::move(active);
  t.survivors = std::move(sel.survivors);
  t.fallback = sel.fallback;
  t.evaluations = round.evaluations;
  t.vertex_labelings = round.labelings;
  t.best_so_far = incumbent;
  if (round.best) improve(t.best_so_far, *round.best);

  if (subdivide_survivors) {
    for (const auto& c : t.survivors) {
      auto kids = subdivide(c, cfg.max_level);
      out.next.insert(out.next.end(), kids.begin(), kids.end());
    }
    std::sort(out.next.begin(), out.next.end());
  }
  return out;
}

/// Runs the generation loop from the domain's corner cell. `exec` keeps the
/// run's registry, so callers can inspect the cluster tables afterwards.
inline RunReport run(const Objective& obj, const SearchDomain& d, const EngineConfig& cfg, Executor& exec) {
  cfg.validate();
  if (!obj.evaluate) throw ConfigError("objective has no evaluate function");
  if (cfg.strategy == LabelingStrategy::GradientFixedPoint && !obj.has_gradient() && !cfg.finite_difference_fallback)
    throw ConfigError("gradient labeling needs an analytic gradient or the finite-difference fallback");

  const auto start = std::chrono::steady_clock::now();
  RunReport report;

  std::vector<Cell> active{initial_cell(d)};
  std::optional<Incumbent> incumbent;
  for (int g = 0;; ++g) {
    const bool last = g >= cfg.max_generations || max_step(d, g) <= cfg.h_tolerance;
    auto step = generation_step(std::move(active), obj, d, cfg, exec, g, incumbent, !last);
    incumbent = step.trace.best_so_far;
    report.evaluations += step.trace.evaluations;
    report.vertex_labelings += step.trace.vertex_labelings;
    if (!step.trace.fallback) report.last_complete_generation = g;
    report.generations.push_back(std::move(step.trace));
    if (last) break;
    active = std::move(step.next);
  }

  const auto& final_gen = report.generations.back();
  const auto idx = detail::index_records(final_gen.vertices);
  for (const auto& c : final_gen.survivors) {
    const auto& r = detail::best_vertex(c, idx, cfg.sense);
    report.final_points.push_back({c, r.point, r.x, r.value, r.label});
  }
  std::stable_sort(report.final_points.begin(), report.final_points.end(),
                   [&](const FinalPoint& a, const FinalPoint& b) {
                     return detail::oriented(a.value, cfg.sense) < detail::oriented(b.value, cfg.sense);
                   });

  const Incumbent& inc = *final_gen.best_so_far;
  report.best = {inc.point, inc.x, cfg.sense == Sense::Max ? -inc.cost : inc.cost};

  report.registry_evaluations = exec.registry().unique_evaluations();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline RunReport run(const Objective& obj, const SearchDomain& d, const EngineConfig& cfg,
                     const ExecutionBackend& backend) {
  Executor exec(backend);
  return run(obj, d, cfg, exec);
}

}  // namespace slm
