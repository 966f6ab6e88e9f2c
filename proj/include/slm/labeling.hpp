#pragma once

// Integer labeling of grid vertices.
//
// A vertex at level L is compared against every neighbor reachable with
// per-axis offsets {-1, 0, +1} at level L+1 (half the current step). The
// displacement from the vertex to its best neighbor, or the gradient in the
// fixed-point strategy, is turned into a label in [0, n]:
//
//   0  if every component is >= 0
//   k  if component k (1-based) is the last negative one
//
// A cell whose vertex labels cover {0, ..., n} is completely labeled.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/objective.hpp"

namespace slm {

struct Label {
  std::size_t value = 0;

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;
};

enum class LabelingStrategy { BestNeighbor, GradientFixedPoint };

inline std::string to_string(LabelingStrategy s) {
  return s == LabelingStrategy::BestNeighbor ? "best-neighbor" : "gradient";
}

/// c - x for the chosen neighbor c of vertex x.
struct Displacement {
  std::vector<double> d;
};

/// One neighbor probe: the level-(L+1) point and its offset in half-steps.
struct NeighborProbe {
  DyadicPoint point;
  std::vector<int> offset;
};

/// Neighborhood of `p` at half its step, clipped to the domain, in
/// lexicographic offset order (-1 < 0 < +1, axis 0 most significant).
/// Always contains `p` itself (offset 0).
inline std::vector<NeighborProbe> neighborhood(const DyadicPoint& p, const SearchDomain& d) {
  check_in_domain(p, d);
  const std::size_t n = p.dimension();
  const DyadicPoint fine = p.at_level(p.level() + 1);
  const Index top = Index{1} << fine.level();

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;

  std::vector<NeighborProbe> out;
  out.reserve(total);
  std::vector<int> offset(n);
  std::vector<Index> k(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    bool inside = true;
    for (std::size_t i = n; i-- > 0;) {
      offset[i] = static_cast<int>(rest % 3) - 1;
      rest /= 3;
      k[i] = fine.indices()[i] + offset[i];
      if (k[i] < 0 || k[i] > top) inside = false;
    }
    if (inside) out.push_back({DyadicPoint(fine.level(), k), offset});
  }
  return out;
}

inline std::vector<DyadicPoint> neighbor_candidates(const DyadicPoint& p, const SearchDomain& d) {
  std::vector<DyadicPoint> out;
  for (auto& probe : neighborhood(p, d)) out.push_back(std::move(probe.point));
  return out;
}

/// Result of the neighbor search around one vertex.
struct NeighborChoice {
  DyadicPoint point;          // best neighbor c (level L+1)
  std::vector<int> offset;    // c - p in half-steps
  double cost = 0.0;          // minimization-oriented value at c
  double vertex_cost = 0.0;   // minimization-oriented value at p
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Argmin of `cost_of(point, coords)` over the neighborhood of `p`.
///
/// Equal costs are resolved by the smaller distance to `incumbent` (when
/// given), then by the lexicographically smallest offset. `cost_of` must
/// return minimization-oriented, finite values.
template <class CostFn>
NeighborChoice best_neighbor_by(const DyadicPoint& p, const SearchDomain& d, CostFn&& cost_of,
                                const std::optional<std::vector<double>>& incumbent = std::nullopt) {
  const auto probes = neighborhood(p, d);
  NeighborChoice best;
  double best_dist = 0.0;
  bool have = false;
  for (const auto& probe : probes) {
    const auto x = to_coords(probe.point, d);
    const double c = cost_of(probe.point, x);
    const bool is_self = std::all_of(probe.offset.begin(), probe.offset.end(), [](int o) { return o == 0; });
    if (is_self) best.vertex_cost = c;
    const double dist = incumbent ? squared_distance(x, *incumbent) : 0.0;
    if (!have || c < best.cost || (c == best.cost && incumbent && dist < best_dist)) {
      best.point = probe.point;
      best.offset = probe.offset;
      best.cost = c;
      best_dist = dist;
      have = true;
    }
  }
  return best;
}

/// Best neighbor of `p` under `obj` (argmax for Sense::Max).
inline NeighborChoice best_neighbor(const DyadicPoint& p, const Objective& obj, const SearchDomain& d,
                                    const std::optional<std::vector<double>>& incumbent = std::nullopt) {
  return best_neighbor_by(
      p, d, [&](const DyadicPoint&, const std::vector<double>& x) { return obj.cost(x); }, incumbent);
}

inline Label label_of_displacement(std::span<const double> disp) {
  for (std::size_t i = disp.size(); i-- > 0;) {
    if (disp[i] < 0) return Label{i + 1};
  }
  return Label{0};
}

inline Label label_of_displacement(const Displacement& disp) { return label_of_displacement(disp.d); }

inline Displacement displacement(const DyadicPoint& from, const DyadicPoint& to, const SearchDomain& d) {
  const auto x = to_coords(from, d);
  const auto c = to_coords(to, d);
  Displacement out{std::vector<double>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) out.d[i] = c[i] - x[i];
  return out;
}

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
inline std::vector<double> finite_difference_gradient(const Objective& obj, std::span<const double> x, double step) {
  if (!(step > 0)) throw ConfigError("finite-difference step must be positive");
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = obj.value(probe);
    probe[i] = x[i] - step;
    const double down = obj.value(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

/// Domain-aware variant: step_i = relative_step * span_i, one-sided where x +/- step leaves the box.
inline std::vector<double> finite_difference_gradient(const Objective& obj, std::span<const double> x,
                                                      const SearchDomain& d, double relative_step) {
  if (!(relative_step > 0)) throw ConfigError("finite-difference step must be positive");
  std::vector<double> g(x.size());
  std::vector<double> probe(x.begin(), x.end());
  const double centre = obj.value(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = relative_step * d.span(i);
    const bool can_up = x[i] + h <= d.upper()[i];
    const bool can_down = x[i] - h >= d.lower()[i];
    double up = centre;
    double down = centre;
    if (can_up) {
      probe[i] = x[i] + h;
      up = obj.value(probe);
    }
    if (can_down) {
      probe[i] = x[i] - h;
      down = obj.value(probe);
    }
    probe[i] = x[i];
    const double width = (can_up ? h : 0.0) + (can_down ? h : 0.0);
    g[i] = (up - down) / width;
  }
  return g;
}

struct LabelOptions {
  /// Tie-break target for the neighbor search (best point seen so far).
  std::optional<std::vector<double>> incumbent;
  /// Allow finite differences when the objective has no analytic gradient.
  bool finite_difference_fallback = true;
  /// Finite-difference step as a fraction of each axis span.
  double fd_relative_step = 1e-4;
};

/// Gradient of the minimization-oriented cost at x, i.e. g(x) - x with g(x) = x + grad f(x).
inline std::vector<double> oriented_gradient(const Objective& obj, std::span<const double> x, const SearchDomain& d,
                                             const LabelOptions& opts) {
  std::vector<double> g;
  if (obj.has_gradient()) {
    g = obj.gradient(x);
    if (g.size() != x.size()) throw ConfigError("gradient has wrong dimension");
    for (double v : g)
      if (!std::isfinite(v))
        throw EvaluationError("gradient returned a non-finite value", std::vector<double>(x.begin(), x.end()));
  } else if (opts.finite_difference_fallback) {
    g = finite_difference_gradient(obj, x, d, opts.fd_relative_step);
  } else {
    throw ConfigError("gradient labeling needs an analytic gradient or the finite-difference fallback");
  }
  if (obj.sense == Sense::Max)
    for (double& v : g) v = -v;
  return g;
}

inline Label label_vertex(const DyadicPoint& p, const Objective& obj, const SearchDomain& d, LabelingStrategy s,
                          const LabelOptions& opts = {}) {
  if (s == LabelingStrategy::GradientFixedPoint) {
    const auto x = to_coords(p, d);
    return label_of_displacement(oriented_gradient(obj, x, d, opts));
  }
  const auto choice = best_neighbor(p, obj, d, opts.incumbent);
  return label_of_displacement(displacement(p, choice.point, d));
}

/// True iff {0, 1, ..., n} is a subset of `labels`.
inline bool is_complete(std::span<const Label> labels, std::size_t n) {
  std::vector<bool> seen(n + 1, false);
  std::size_t count = 0;
  for (Label l : labels) {
    if (l.value <= n && !seen[l.value]) {
      seen[l.value] = true;
      ++count;
    }
  }
  return count == n + 1;
}

}  // namespace slm
