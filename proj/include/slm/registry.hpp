#pragma once

// Point <-> cell bookkeeping and the memoized evaluation store.
//
// Cells that come out of one subdivision share boundary vertices. The cluster
// tables record which cells own each vertex, and the store evaluates every
// distinct point at most once per run, no matter how many cells or workers
// ask for it.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <exception>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_map>
#include <vector>

#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/labeling.hpp"
#include "slm/objective.hpp"

namespace slm {

using CellId = std::size_t;

namespace detail {

inline void write_coords(std::ostream& os, const DyadicPoint& p, const SearchDomain& d) {
  const auto x = to_coords(p, d);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ')';
}

}  // namespace detail

/// Bidirectional point -> cells and cell -> points tables. Ids start at 1.
///
/// Not synchronized: the master registers cells between rounds and workers
/// only read.
class ClusterTables {
 public:
  /// Registers `c` and its 2^n vertices; re-registering returns the existing id.
  CellId register_cell(const Cell& c) {
    if (auto it = ids_.find(c); it != ids_.end()) return it->second;
    const CellId id = cells_.size() + 1;
    ids_.emplace(c, id);
    cells_.push_back(c);
    std::vector<DyadicPoint> pts;
    for (const auto& v : cell_vertices(c)) {
      auto key = v.canonical();
      point_to_cells_[key].insert(id);
      pts.push_back(std::move(key));
    }
    cell_to_points_.push_back(std::move(pts));
    return id;
  }

  std::optional<CellId> find(const Cell& c) const {
    if (auto it = ids_.find(c); it != ids_.end()) return it->second;
    return std::nullopt;
  }

  const Cell& cell(CellId id) const { return cells_.at(index_of(id)); }

  std::set<CellId> point_to_cells(const DyadicPoint& p) const {
    if (auto it = point_to_cells_.find(p.canonical()); it != point_to_cells_.end()) return it->second;
    return {};
  }

  /// Canonical vertices of cell `id`, in vertex order.
  const std::vector<DyadicPoint>& cell_to_points(CellId id) const { return cell_to_points_.at(index_of(id)); }

  /// Vertices common to both cells.
  std::vector<DyadicPoint> shared_points(CellId a, CellId b) const {
    const auto& pa = cell_to_points(a);
    const auto& pb = cell_to_points(b);
    std::vector<DyadicPoint> out;
    for (const auto& p : pa)
      if (std::find(pb.begin(), pb.end(), p) != pb.end()) out.push_back(p);
    return out;
  }

  std::size_t cell_count() const noexcept { return cells_.size(); }
  std::size_t point_count() const noexcept { return point_to_cells_.size(); }

  /// p in cell_to_points(c) <=> c in point_to_cells(p).
  bool consistent() const {
    std::size_t forward = 0;
    for (CellId id = 1; id <= cells_.size(); ++id) {
      for (const auto& p : cell_to_points_[id - 1]) {
        auto it = point_to_cells_.find(p);
        if (it == point_to_cells_.end() || !it->second.contains(id)) return false;
        ++forward;
      }
    }
    std::size_t backward = 0;
    for (const auto& [p, ids] : point_to_cells_) {
      for (CellId id : ids) {
        if (id == 0 || id > cells_.size()) return false;
        const auto& pts = cell_to_points_[id - 1];
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) return false;
        ++backward;
      }
    }
    return forward == backward;
  }

  /// CSV with columns `point,cluster ids`, points in spatial order.
  void write_point_table(std::ostream& os, const SearchDomain& d) const {
    std::vector<DyadicPoint> pts;
    for (const auto& [p, ids] : point_to_cells_) pts.push_back(p);
    std::sort(pts.begin(), pts.end(), spatially_less);
    os << "point,cluster ids\n";
    for (const auto& p : pts) {
      os << '"';
      detail::write_coords(os, p, d);
      os << "\",\"";
      bool first = true;
      for (CellId id : point_to_cells_.at(p)) {
        os << (first ? "" : ",") << id;
        first = false;
      }
      os << "\"\n";
    }
  }

  /// CSV with columns `cluster id,points`.
  void write_cluster_table(std::ostream& os, const SearchDomain& d) const {
    os << "cluster id,points\n";
    for (CellId id = 1; id <= cells_.size(); ++id) {
      os << id << ",\"";
      const auto& pts = cell_to_points_[id - 1];
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) os << ',';
        detail::write_coords(os, pts[i], d);
      }
      os << "\"\n";
    }
  }

 private:
  std::size_t index_of(CellId id) const {
    if (id == 0 || id > cells_.size()) throw LookupError("unknown cell id " + std::to_string(id));
    return id - 1;
  }

  std::map<Cell, CellId> ids_;
  std::vector<Cell> cells_;
  std::vector<std::vector<DyadicPoint>> cell_to_points_;
  std::unordered_map<DyadicPoint, std::set<CellId>, DyadicPointHash> point_to_cells_;
};

/// Memoized f values keyed on canonical grid points, with exactly-once
/// evaluation under concurrent lookup-or-insert.
///
/// Concurrent misses on one key block on the first caller's result. A failed
/// evaluation is propagated to every waiter and leaves no entry behind.
class EvalStore {
 public:
  template <class Compute>
  double get_or_compute(const DyadicPoint& p, Compute&& compute) {
    const DyadicPoint key = p.canonical();
    Shard& shard = shard_for(key);
    std::promise<double> promise;
    std::shared_future<double> pending;
    {
      std::lock_guard lock(shard.mutex);
      if (auto it = shard.entries.find(key); it != shard.entries.end()) {
        pending = it->second;
      } else {
        shard.entries.emplace(key, promise.get_future().share());
      }
    }
    if (pending.valid()) return pending.get();

    try {
      const double v = compute();
      promise.set_value(v);
      evaluations_.fetch_add(1, std::memory_order_relaxed);
      return v;
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(shard.mutex);
      shard.entries.erase(key);
      throw;
    }
  }

  /// Stored value, if the point has been evaluated (blocks on an in-flight evaluation).
  std::optional<double> find(const DyadicPoint& p) const {
    const DyadicPoint key = p.canonical();
    const Shard& shard = shard_for(key);
    std::shared_future<double> f;
    {
      std::lock_guard lock(shard.mutex);
      auto it = shard.entries.find(key);
      if (it == shard.entries.end()) return std::nullopt;
      f = it->second;
    }
    return f.get();
  }

  /// Number of successful evaluations; equals size() once no evaluation is in flight.
  std::size_t unique_evaluations() const noexcept { return evaluations_.load(std::memory_order_relaxed); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& s : shards_) {
      std::lock_guard lock(s.mutex);
      n += s.entries.size();
    }
    return n;
  }

 private:
  static constexpr std::size_t kShards = 16;

  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<DyadicPoint, std::shared_future<double>, DyadicPointHash> entries;
  };

  Shard& shard_for(const DyadicPoint& key) { return shards_[DyadicPointHash{}(key) % kShards]; }
  const Shard& shard_for(const DyadicPoint& key) const { return shards_[DyadicPointHash{}(key) % kShards]; }

  std::array<Shard, kShards> shards_;
  std::atomic<std::size_t> evaluations_{0};
};

/// Per-run state shared by all workers. Values live for the whole run, labels for one generation.
class EvalRegistry {
 public:
  ClusterTables& tables() noexcept { return tables_; }
  const ClusterTables& tables() const noexcept { return tables_; }
  EvalStore& store() noexcept { return store_; }
  const EvalStore& store() const noexcept { return store_; }

  CellId register_cell(const Cell& c) { return tables_.register_cell(c); }

  /// f(p), evaluated at most once per run.
  double evaluate_memo(const Objective& obj, const DyadicPoint& p, const SearchDomain& d) {
    check_in_domain(p, d);
    return store_.get_or_compute(p, [&] { return obj.value(to_coords(p, d)); });
  }

  std::size_t unique_evaluations() const noexcept { return store_.unique_evaluations(); }

  std::optional<Label> cached_label(const DyadicPoint& p) const {
    std::lock_guard lock(label_mutex_);
    if (auto it = labels_.find(p.canonical()); it != labels_.end()) return it->second;
    return std::nullopt;
  }

  void cache_label(const DyadicPoint& p, Label l) {
    std::lock_guard lock(label_mutex_);
    labels_.insert_or_assign(p.canonical(), l);
  }

  /// Labels depend on the half-step, so they are dropped when the level changes.
  void clear_labels() {
    std::lock_guard lock(label_mutex_);
    labels_.clear();
  }

 private:
  ClusterTables tables_;
  EvalStore store_;
  mutable std::mutex label_mutex_;
  std::unordered_map<DyadicPoint, Label, DyadicPointHash> labels_;
};

}  // namespace slm
