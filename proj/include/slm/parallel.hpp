#pragma once

// Master-worker labeling rounds.
//
// The master orders the active cells, deals them round-robin to p workers,
// and gathers one LabelBatch per worker. Workers never talk to each other;
// the only shared mutable state is the EvalRegistry in clustered mode.

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "slm/config.hpp"
#include "slm/grid.hpp"
#include "slm/labeling.hpp"
#include "slm/objective.hpp"
#include "slm/registry.hpp"

namespace slm {

/// Fixed-size thread pool; tasks run in submission order per free thread.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads) {
    if (threads < 1) throw ConfigError("worker pool needs at least one thread");
    threads_.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) threads_.emplace_back([this](std::stop_token st) { loop(st); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    for (auto& t : threads_) t.request_stop();
    cv_.notify_all();
  }

  std::size_t size() const noexcept { return threads_.size(); }

  template <class Fn>
  auto submit(Fn&& fn) -> std::future<std::invoke_result_t<Fn>> {
    using R = std::invoke_result_t<Fn>;
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<Fn>(fn));
    auto fut = task->get_future();
    {
      std::lock_guard lock(mutex_);
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

 private:
  void loop(std::stop_token st) {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, st, [this] { return !queue_.empty(); });
        if (queue_.empty()) return;  // stop requested
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      job();
    }
  }

  std::mutex mutex_;
  std::condition_variable_any cv_;
  std::deque<std::function<void()>> queue_;
  std::vector<std::jthread> threads_;  // last member: joined before the queue is destroyed
};

/// worker id -> indices into the ordered active-cell list.
struct WorkAssignment {
  std::vector<std::vector<std::size_t>> cells_of_worker;

  std::size_t workers() const noexcept { return cells_of_worker.size(); }

  std::size_t worker_of(std::size_t cell_index) const { return cell_index % cells_of_worker.size(); }
};

/// Round-robin: cell i goes to worker i mod p.
inline WorkAssignment assign(std::size_t cell_count, std::size_t workers) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  WorkAssignment a;
  a.cells_of_worker.resize(workers);
  for (std::size_t i = 0; i < cell_count; ++i) a.cells_of_worker[i % workers].push_back(i);
  return a;
}

/// A labeled vertex.
struct VertexRecord {
  DyadicPoint point;             // canonical
  std::vector<double> x;
  double value = 0.0;            // f(x), as returned by the objective
  Label label;
  DyadicPoint mutated;           // best neighbor (the vertex itself for gradient labels)
  std::vector<double> mutated_x;
  double mutated_value = 0.0;

  friend bool operator==(const VertexRecord&, const VertexRecord&) = default;
};

/// Best point seen so far, minimization-oriented.
struct Incumbent {
  DyadicPoint point;
  std::vector<double> x;
  double cost = 0.0;

  friend bool operator==(const Incumbent&, const Incumbent&) = default;
};

/// Lower cost wins; equal costs go to the spatially smaller point.
inline bool better(const Incumbent& a, const Incumbent& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  return spatially_less(a.point, b.point);
}

inline void improve(std::optional<Incumbent>& best, const Incumbent& candidate) {
  if (!best || better(candidate, *best)) best = candidate;
}

struct LabelBatch {
  std::size_t worker = 0;
  std::vector<VertexRecord> records;
  std::size_t evaluations = 0;  // objective calls made by this worker (raw mode only)
  std::size_t labelings = 0;
  std::optional<Incumbent> best;
};

namespace detail {

/// Labels one vertex; `value_of(point)` supplies raw f values.
template <class ValueFn>
VertexRecord label_with(const DyadicPoint& vertex, const Objective& obj, const SearchDomain& d,
                        const EngineConfig& cfg, const std::optional<Incumbent>& incumbent, ValueFn&& value_of) {
  const double sign = obj.sense == Sense::Max ? -1.0 : 1.0;
  VertexRecord rec;
  rec.point = vertex.canonical();
  rec.x = to_coords(vertex, d);

  if (cfg.strategy == LabelingStrategy::GradientFixedPoint) {
    rec.value = value_of(vertex);
    LabelOptions opts;
    opts.finite_difference_fallback = cfg.finite_difference_fallback;
    opts.fd_relative_step = cfg.fd_relative_step;
    rec.label = label_of_displacement(oriented_gradient(obj, rec.x, d, opts));
    rec.mutated = rec.point;
    rec.mutated_x = rec.x;
    rec.mutated_value = rec.value;
    return rec;
  }

  std::optional<std::vector<double>> target;
  if (incumbent) target = incumbent->x;
  const auto choice = best_neighbor_by(
      vertex, d, [&](const DyadicPoint& p, const std::vector<double>&) { return sign * value_of(p); }, target);
  rec.value = sign * choice.vertex_cost;
  rec.mutated = choice.point.canonical();
  rec.mutated_x = to_coords(choice.point, d);
  rec.mutated_value = sign * choice.cost;
  std::vector<double> disp(rec.x.size());
  for (std::size_t i = 0; i < disp.size(); ++i) disp[i] = rec.mutated_x[i] - rec.x[i];
  rec.label = label_of_displacement(disp);
  return rec;
}

inline Incumbent incumbent_of(const VertexRecord& r, Sense sense) {
  const double sign = sense == Sense::Max ? -1.0 : 1.0;
  return {r.mutated, r.mutated_x, sign * r.mutated_value};
}

/// Raw evaluation with a per-batch call counter (no memo, no sharing).
struct CountingEvaluator {
  const Objective& obj;
  const SearchDomain& d;
  std::size_t calls = 0;

  double operator()(const DyadicPoint& p) {
    ++calls;
    return obj.value(to_coords(p, d));
  }
};

}  // namespace detail

/// Output of one master round.
struct RoundResult {
  std::vector<VertexRecord> records;  // spatial order, one per distinct vertex
  std::size_t evaluations = 0;        // objective calls charged to this round
  std::size_t labelings = 0;          // vertex label computations
  std::optional<Incumbent> best;
};

/// Labels one vertex slot per worker in raw mode (PARALLEL).
inline LabelBatch label_cells_raw(std::size_t worker, const std::vector<Cell>& cells,
                                  const std::vector<std::size_t>& mine, const Objective& obj, const SearchDomain& d,
                                  const EngineConfig& cfg, const std::optional<Incumbent>& incumbent) {
  LabelBatch batch;
  batch.worker = worker;
  detail::CountingEvaluator eval{obj, d};
  for (std::size_t ci : mine) {
    for (const auto& v : cell_vertices(cells[ci])) {
      batch.records.push_back(detail::label_with(v, obj, d, cfg, incumbent, eval));
      ++batch.labelings;
      improve(batch.best, detail::incumbent_of(batch.records.back(), obj.sense));
    }
  }
  batch.evaluations = eval.calls;
  return batch;
}

/// Labels the vertices this worker owns through the shared registry (SERIAL, CLUSTERED).
inline LabelBatch label_vertices_memo(std::size_t worker, const std::vector<DyadicPoint>& owned, const Objective& obj,
                                      const SearchDomain& d, const EngineConfig& cfg,
                                      const std::optional<Incumbent>& incumbent, EvalRegistry& registry) {
  LabelBatch batch;
  batch.worker = worker;
  auto memo = [&](const DyadicPoint& p) { return registry.evaluate_memo(obj, p, d); };
  for (const auto& v : owned) {
    auto rec = detail::label_with(v, obj, d, cfg, incumbent, memo);
    registry.cache_label(v, rec.label);
    ++batch.labelings;
    improve(batch.best, detail::incumbent_of(rec, obj.sense));
    batch.records.push_back(std::move(rec));
  }
  return batch;
}

/// Distinct vertices of `cells`, each owned by the first cell (in order) that
/// contains it, grouped per worker according to `assignment`.
inline std::vector<std::vector<DyadicPoint>> owned_vertices(const std::vector<Cell>& cells,
                                                            const WorkAssignment& assignment) {
  std::vector<std::size_t> owner_worker(cells.size());
  for (std::size_t w = 0; w < assignment.workers(); ++w)
    for (std::size_t ci : assignment.cells_of_worker[w]) owner_worker[ci] = w;

  std::vector<std::vector<DyadicPoint>> out(assignment.workers());
  std::unordered_set<DyadicPoint, DyadicPointHash> claimed;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    for (const auto& v : cell_vertices(cells[ci])) {
      auto key = v.canonical();
      if (claimed.insert(key).second) out[owner_worker[ci]].push_back(v);
    }
  }
  return out;
}

/// Runs labeling jobs on the pool (or inline without one), then merges.
/// If any worker fails, every worker is still joined and the first failure
/// (by worker id) is rethrown; no partial result is returned.
inline RoundResult master_round(const std::vector<Cell>& active, const Objective& obj, const SearchDomain& d,
                                const EngineConfig& cfg, const ExecutionBackend& backend, EvalRegistry& registry,
                                WorkerPool* pool, const std::optional<Incumbent>& incumbent) {
  if (active.empty()) throw EngineError("master round needs at least one active cell");
  backend.validate();

  for (const auto& c : active) registry.register_cell(c);
  registry.clear_labels();
  const std::size_t evaluated_before = registry.unique_evaluations();

  std::vector<LabelBatch> batches;
  if (backend.kind == BackendKind::Serial || pool == nullptr) {
    if (backend.kind == BackendKind::Parallel) {
      std::vector<std::size_t> all(active.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      batches.push_back(label_cells_raw(0, active, all, obj, d, cfg, incumbent));
    } else {
      const auto owned = owned_vertices(active, assign(active.size(), 1));
      batches.push_back(label_vertices_memo(0, owned[0], obj, d, cfg, incumbent, registry));
    }
  } else {
    const auto assignment = assign(active.size(), backend.workers);
    std::vector<std::future<LabelBatch>> futures;
    if (backend.kind == BackendKind::Parallel) {
      for (std::size_t w = 0; w < assignment.workers(); ++w) {
        futures.push_back(pool->submit([&, w] {
          return label_cells_raw(w, active, assignment.cells_of_worker[w], obj, d, cfg, incumbent);
        }));
      }
    } else {
      const auto owned = owned_vertices(active, assignment);
      for (std::size_t w = 0; w < assignment.workers(); ++w) {
        futures.push_back(pool->submit(
            [&, w, mine = owned[w]] { return label_vertices_memo(w, mine, obj, d, cfg, incumbent, registry); }));
      }
    }
    std::exception_ptr failure;
    for (auto& f : futures) {
      try {
        batches.push_back(f.get());
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  RoundResult out;
  std::unordered_map<DyadicPoint, std::size_t, DyadicPointHash> index;
  for (auto& b : batches) {
    out.evaluations += b.evaluations;
    out.labelings += b.labelings;
    if (b.best) improve(out.best, *b.best);
    for (auto& r : b.records) {
      if (auto it = index.find(r.point); it != index.end()) {
        if (!(out.records[it->second] == r))
          throw EngineError("workers disagree on the label record of " + r.point.str());
        continue;
      }
      index.emplace(r.point, out.records.size());
      out.records.push_back(std::move(r));
    }
  }
  if (backend.kind != BackendKind::Parallel) out.evaluations = registry.unique_evaluations() - evaluated_before;
  std::sort(out.records.begin(), out.records.end(),
            [](const VertexRecord& a, const VertexRecord& b) { return spatially_less(a.point, b.point); });
  return out;
}

}  // namespace slm
