#pragma once

// Exact dyadic grid over an axis-aligned box.
//
// A grid point is stored as (level L, integer indices k) and maps to
// x_i = lerp(a_i, b_i, k_i / 2^L). Points at different levels that denote the
// same location compare equal after canonicalization, which lets cells at any
// refinement level share vertex records bit-exactly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "slm/error.hpp"

namespace slm {

using Index = std::int64_t;

/// Deepest level at which k / 2^L is still exact in a double.
inline constexpr int kDefaultMaxLevel = 52;
/// Hard ceiling imposed by the 64-bit index type.
inline constexpr int kIndexLevelCeiling = 62;

class SearchDomain {
 public:
  SearchDomain(std::vector<double> lower, std::vector<double> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw ConfigError("search domain needs at least one axis");
    if (lower_.size() != upper_.size())
      throw ConfigError("search domain bounds have different lengths");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
      if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
        std::ostringstream os;
        os << "search domain axis " << i << " is not a finite interval with lower < upper";
        throw ConfigError(os.str());
      }
    }
  }

  /// The box [lo, hi]^n.
  static SearchDomain cube(std::size_t n, double lo, double hi) {
    return SearchDomain(std::vector<double>(n, lo), std::vector<double>(n, hi));
  }

  std::size_t dimension() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double span(std::size_t axis) const { return upper_.at(axis) - lower_.at(axis); }

  bool contains(std::span<const double> x) const noexcept {
    if (x.size() != dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    return true;
  }

  friend bool operator==(const SearchDomain&, const SearchDomain&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

class DyadicPoint {
 public:
  DyadicPoint() = default;
  DyadicPoint(int level, std::vector<Index> indices) : level_(level), indices_(std::move(indices)) {
    if (level_ < 0 || level_ > kIndexLevelCeiling) throw DomainError("dyadic level out of range");
  }

  int level() const noexcept { return level_; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t dimension() const noexcept { return indices_.size(); }

  /// Same point with the common power of two divided out of level and indices.
  DyadicPoint canonical() const {
    int shift = level_;
    for (Index k : indices_) {
      if (k != 0) shift = std::min(shift, std::countr_zero(static_cast<std::uint64_t>(k)));
    }
    if (shift == 0) return *this;
    std::vector<Index> reduced(indices_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) reduced[i] = indices_[i] >> shift;
    return DyadicPoint(level_ - shift, std::move(reduced));
  }

  /// Re-express at a finer level. Throws if `target` is coarser.
  DyadicPoint at_level(int target) const {
    if (target < level_) throw DomainError("cannot coarsen a dyadic point");
    if (target > kIndexLevelCeiling) throw DomainError("dyadic level out of range");
    std::vector<Index> out(indices_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) out[i] = indices_[i] << (target - level_);
    return DyadicPoint(target, std::move(out));
  }

  /// Fraction k_i / 2^L along each axis, exact in binary floating point.
  double fraction(std::size_t axis) const { return std::ldexp(static_cast<double>(indices_.at(axis)), -level_); }

  bool valid() const noexcept {
    const Index top = Index{1} << level_;
    return std::all_of(indices_.begin(), indices_.end(), [&](Index k) { return k >= 0 && k <= top; });
  }

  /// Representation equality (level and indices); use `same_point` for spatial equality.
  friend bool operator==(const DyadicPoint&, const DyadicPoint&) = default;
  friend auto operator<=>(const DyadicPoint&, const DyadicPoint&) = default;

  std::string str() const {
    std::ostringstream os;
    os << "L" << level_ << "(";
    for (std::size_t i = 0; i < indices_.size(); ++i) os << (i ? "," : "") << indices_[i];
    os << ")";
    return os.str();
  }

 private:
  int level_ = 0;
  std::vector<Index> indices_;
};

inline bool same_point(const DyadicPoint& a, const DyadicPoint& b) { return a.canonical() == b.canonical(); }

/// Lexicographic order on spatial position (axis 0 first). Exact: fractions are dyadic doubles.
inline bool spatially_less(const DyadicPoint& a, const DyadicPoint& b) {
  for (std::size_t i = 0; i < std::min(a.dimension(), b.dimension()); ++i) {
    const double fa = a.fraction(i);
    const double fb = b.fraction(i);
    if (fa != fb) return fa < fb;
  }
  return a.dimension() < b.dimension();
}

struct DyadicPointHash {
  /// Hashes the representation; callers key maps on canonical points.
  std::size_t operator()(const DyadicPoint& p) const noexcept {
    std::size_t h = std::hash<int>{}(p.level());
    for (Index k : p.indices()) h ^= std::hash<Index>{}(k) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

inline void check_in_domain(const DyadicPoint& p, const SearchDomain& d) {
  if (p.dimension() != d.dimension()) throw DomainError("point dimension " + std::to_string(p.dimension()) +
                                                        " does not match domain dimension " +
                                                        std::to_string(d.dimension()));
  if (!p.valid()) throw DomainError("grid index outside [0, 2^L] for point " + p.str());
}

/// Physical coordinates of a grid point. Bit-identical for every encoding of the same point.
inline std::vector<double> to_coords(const DyadicPoint& p, const SearchDomain& d) {
  check_in_domain(p, d);
  std::vector<double> x(p.dimension());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::lerp(d.lower()[i], d.upper()[i], p.fraction(i));
  return x;
}

/// Per-axis grid step (b_i - a_i) / 2^L.
inline std::vector<double> step_size(const SearchDomain& d, int level) {
  std::vector<double> h(d.dimension());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::ldexp(d.span(i), -level);
  return h;
}

inline double max_step(const SearchDomain& d, int level) {
  const auto h = step_size(d, level);
  return *std::max_element(h.begin(), h.end());
}

/// Level-L hypercube with vertex set anchor + {0,1}^n.
class Cell {
 public:
  Cell() = default;
  Cell(int level, std::vector<Index> anchor) : level_(level), anchor_(std::move(anchor)) {
    if (level_ < 0 || level_ > kIndexLevelCeiling) throw DomainError("cell level out of range");
    const Index top = Index{1} << level_;
    for (Index a : anchor_)
      if (a < 0 || a + 1 > top) throw DomainError("cell anchor outside the level-" + std::to_string(level_) + " grid");
  }

  int level() const noexcept { return level_; }
  const std::vector<Index>& anchor() const noexcept { return anchor_; }
  std::size_t dimension() const noexcept { return anchor_.size(); }
  std::size_t vertex_count() const noexcept { return std::size_t{1} << anchor_.size(); }

  /// True if `p` is one of this cell's vertices.
  bool has_vertex(const DyadicPoint& p) const {
    if (p.dimension() != dimension()) return false;
    const DyadicPoint c = p.canonical();
    if (c.level() > level_) return false;
    const DyadicPoint q = c.at_level(level_);
    for (std::size_t i = 0; i < anchor_.size(); ++i) {
      const Index off = q.indices()[i] - anchor_[i];
      if (off != 0 && off != 1) return false;
    }
    return true;
  }

  friend bool operator==(const Cell&, const Cell&) = default;
  /// Level first, then lexicographic anchor.
  friend auto operator<=>(const Cell&, const Cell&) = default;

  std::string str() const {
    std::ostringstream os;
    os << "cell L" << level_ << "[";
    for (std::size_t i = 0; i < anchor_.size(); ++i) os << (i ? "," : "") << anchor_[i];
    os << "]";
    return os.str();
  }

 private:
  int level_ = 0;
  std::vector<Index> anchor_;
};

/// The level-0 cell whose vertices are the 2^n domain corners.
inline Cell initial_cell(const SearchDomain& d) { return Cell(0, std::vector<Index>(d.dimension(), 0)); }

/// The 2^n vertices in lexicographic order of the binary offset (last axis varies fastest).
inline std::vector<DyadicPoint> cell_vertices(const Cell& c) {
  const std::size_t n = c.dimension();
  std::vector<DyadicPoint> out;
  out.reserve(c.vertex_count());
  for (std::size_t mask = 0; mask < c.vertex_count(); ++mask) {
    std::vector<Index> k(c.anchor());
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> (n - 1 - i) & 1U) ++k[i];
    out.emplace_back(c.level(), std::move(k));
  }
  return out;
}

/// Halve every side: 2^n children at level L+1, anchors 2*anchor + {0,1}^n, lexicographic order.
inline std::vector<Cell> subdivide(const Cell& c, int max_level = kDefaultMaxLevel) {
  if (c.level() + 1 > std::min(max_level, kIndexLevelCeiling))
    throw RefinementLimitError("subdividing " + c.str() + " would exceed refinement level " +
                               std::to_string(max_level));
  const std::size_t n = c.dimension();
  std::vector<Cell> out;
  out.reserve(c.vertex_count());
  for (std::size_t mask = 0; mask < c.vertex_count(); ++mask) {
    std::vector<Index> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = 2 * c.anchor()[i] + static_cast<Index>(mask >> (n - 1 - i) & 1U);
    out.emplace_back(c.level() + 1, std::move(a));
  }
  return out;
}

}  // namespace slm
