#pragma once

// Test objectives and the sampling baselines they are compared against.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/objective.hpp"

namespace slm {

// ---------------------------------------------------------------------------
// Objectives

/// x1^2 + (x2 - 0.4)^2
inline double f1(std::span<const double> x) { return x[0] * x[0] + (x[1] - 0.4) * (x[1] - 0.4); }

inline std::vector<double> f1_gradient(std::span<const double> x) { return {2 * x[0], 2 * (x[1] - 0.4)}; }

/// -cos(x1) cos(x2) exp(-((x1 - pi)^2 + (x2 - pi)^2))
inline double easom(std::span<const double> x) {
  using std::numbers::pi;
  return -std::cos(x[0]) * std::cos(x[1]) * std::exp(-((x[0] - pi) * (x[0] - pi) + (x[1] - pi) * (x[1] - pi)));
}

inline std::vector<double> easom_gradient(std::span<const double> x) {
  using std::numbers::pi;
  const double e = std::exp(-((x[0] - pi) * (x[0] - pi) + (x[1] - pi) * (x[1] - pi)));
  const double c0 = std::cos(x[0]);
  const double c1 = std::cos(x[1]);
  return {e * c1 * (std::sin(x[0]) + 2 * (x[0] - pi) * c0), e * c0 * (std::sin(x[1]) + 2 * (x[1] - pi) * c1)};
}

/// Rosenbrock: 100 (x0^2 - x1)^2 + (1 - x0)^2
inline double dejong_f2(std::span<const double> x) {
  const double a = x[0] * x[0] - x[1];
  return 100 * a * a + (1 - x[0]) * (1 - x[0]);
}

inline std::vector<double> dejong_f2_gradient(std::span<const double> x) {
  const double a = x[0] * x[0] - x[1];
  return {400 * x[0] * a - 2 * (1 - x[0]), -200 * a};
}

/// The De Jong F2 formula without the square on the first term. Unbounded
/// below; only useful to show why the squared form is the one to run.
inline double dejong_f2_literal(std::span<const double> x) {
  return 100 * (x[0] * x[0] - x[1]) + (1 - x[0]) * (1 - x[0]);
}

inline std::vector<double> dejong_f2_literal_gradient(std::span<const double> x) {
  return {200 * x[0] - 2 * (1 - x[0]), -100.0};
}

/// Foxhole centres: a(i,0) cycles through the grid values, a(i,1) steps every five holes.
inline constexpr std::array<double, 5> kFoxholeGrid{-32, -16, 0, 16, 32};

inline double foxhole_a(std::size_t i, std::size_t j) { return j == 0 ? kFoxholeGrid[i % 5] : kFoxholeGrid[i / 5]; }

/// Shekel's foxholes: 1 / (0.002 + sum_{i=0}^{24} 1 / (i + 1 + sum_j (x_j - a_ij)^6))
inline double dejong_f5(std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 25; ++i) {
    double inner = static_cast<double>(i + 1);
    for (std::size_t j = 0; j < 2; ++j) inner += std::pow(x[j] - foxhole_a(i, j), 6);
    sum += 1.0 / inner;
  }
  return 1.0 / (0.002 + sum);
}

struct BenchFunction {
  std::string name;
  Objective objective;
  SearchDomain domain;
  std::vector<std::vector<double>> minimizers;
  std::optional<double> minimum;
  /// Validation tolerance for minimum; relative unless `absolute_tolerance`.
  double tolerance = 1e-9;
  bool absolute_tolerance = false;

  /// Throws ConfigError if f(minimizer) does not reproduce the stated minimum.
  void validate() const {
    if (!minimum) return;
    for (const auto& m : minimizers) {
      const double v = objective.evaluate(m);
      const double err = std::abs(v - *minimum);
      const double bound = absolute_tolerance ? tolerance : tolerance * std::max(1.0, std::abs(*minimum));
      if (!(err <= bound)) throw ConfigError(name + ": value at the known minimizer does not match the minimum");
    }
  }
};

inline std::vector<std::string> bench_function_names() {
  return {"f1", "easom", "dejong-f2", "dejong-f2-literal", "dejong-f5"};
}

/// Registered objective by CLI name, validated.
inline BenchFunction bench_function(const std::string& name) {
  using std::numbers::pi;
  BenchFunction b{name, {}, SearchDomain::cube(2, -1, 1), {}, std::nullopt};
  if (name == "f1") {
    b.objective = {f1, f1_gradient, Sense::Min};
    b.domain = SearchDomain::cube(2, -2, 2);
    b.minimizers = {{0.0, 0.4}};
    b.minimum = 0.0;
  } else if (name == "easom") {
    b.objective = {easom, easom_gradient, Sense::Min};
    b.domain = SearchDomain::cube(2, -100, 100);
    b.minimizers = {{pi, pi}};
    b.minimum = -1.0;
  } else if (name == "dejong-f2") {
    b.objective = {dejong_f2, dejong_f2_gradient, Sense::Min};
    b.domain = SearchDomain::cube(2, -2.048, 2.048);
    b.minimizers = {{1.0, 1.0}};
    b.minimum = 0.0;
  } else if (name == "dejong-f2-literal") {
    b.objective = {dejong_f2_literal, dejong_f2_literal_gradient, Sense::Min};
    b.domain = SearchDomain::cube(2, -2.048, 2.048);
  } else if (name == "dejong-f5") {
    b.objective = {dejong_f5, {}, Sense::Min};
    b.domain = SearchDomain::cube(2, -65.536, 65.536);
    b.minimizers = {{-32.0, -32.0}};
    b.minimum = 0.998004;
    b.tolerance = 1e-4;
    b.absolute_tolerance = true;
  } else {
    throw ConfigError("unknown function '" + name + "' (expected f1, easom, dejong-f2, dejong-f2-literal, dejong-f5)");
  }
  b.validate();
  return b;
}

/// Same values; every evaluation first sleeps for `delay`.
inline Objective with_delay(Objective obj, std::chrono::nanoseconds delay) {
  if (delay.count() < 0) throw ConfigError("delay must be non-negative");
  if (delay.count() == 0) return obj;
  auto inner = obj.evaluate;
  obj.evaluate = [inner, delay](std::span<const double> x) {
    std::this_thread::sleep_for(delay);
    return inner(x);
  };
  return obj;
}

// ---------------------------------------------------------------------------
// Baselines

enum class BaselineAlgorithm { RandomSearch, RandomWalk, SimulatedAnnealing };

struct AnnealingSchedule {
  /// Initial temperature; estimated from 100 uniform samples (max - min) when unset.
  std::optional<double> t0;
  double cooling = 0.95;
  /// Gaussian proposal sigma as a fraction of each axis span.
  double proposal_scale = 0.1;
};

struct BaselineResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> best_history;  // best-so-far value after each iteration
  std::size_t evaluations = 0;
};

namespace detail {

inline std::vector<double> uniform_point(const SearchDomain& d, std::mt19937_64& rng) {
  std::vector<double> x(d.dimension());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::uniform_real_distribution<double>(d.lower()[i], d.upper()[i])(rng);
  return x;
}

inline std::vector<double> gaussian_step(const std::vector<double>& x, const SearchDomain& d, double scale,
                                         std::mt19937_64& rng) {
  std::vector<double> y(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += std::normal_distribution<double>(0.0, scale * d.span(i))(rng);
  return y;
}

inline void check_budget(std::size_t budget) {
  if (budget < 1) throw ConfigError("baseline budget must be at least 1");
}

}  // namespace detail

/// Best of `budget` uniform samples.
inline BaselineResult random_search(const Objective& obj, const SearchDomain& d, std::size_t budget,
                                    std::uint64_t seed) {
  detail::check_budget(budget);
  std::mt19937_64 rng(seed);
  BaselineResult r;
  double best_cost = 0.0;
  for (std::size_t k = 0; k < budget; ++k) {
    auto x = detail::uniform_point(d, rng);
    const double c = obj.cost(x);
    ++r.evaluations;
    if (k == 0 || c < best_cost) {
      best_cost = c;
      r.x = std::move(x);
    }
    r.best_history.push_back(obj.sense == Sense::Max ? -best_cost : best_cost);
  }
  r.value = r.best_history.back();
  return r;
}

/// Improvement-only Gaussian random walk from `x_init`; proposals leaving the box are rejected.
inline BaselineResult rsw(const Objective& obj, const SearchDomain& d, std::size_t budget, std::uint64_t seed,
                          const std::vector<double>& x_init, double step_scale = 0.1) {
  detail::check_budget(budget);
  if (!d.contains(x_init)) throw ConfigError("random walk start point lies outside the domain");
  if (!(step_scale > 0)) throw ConfigError("random walk step scale must be positive");
  std::mt19937_64 rng(seed);
  BaselineResult r;
  r.x = x_init;
  double cur = obj.cost(r.x);
  r.evaluations = 1;
  r.best_history.push_back(cur);
  for (std::size_t k = 1; k < budget; ++k) {
    auto y = detail::gaussian_step(r.x, d, step_scale, rng);
    if (d.contains(y)) {
      const double c = obj.cost(y);
      ++r.evaluations;
      if (c < cur) {
        cur = c;
        r.x = std::move(y);
      }
    }
    r.best_history.push_back(cur);
  }
  if (obj.sense == Sense::Max)
    for (double& v : r.best_history) v = -v;
  r.value = r.best_history.back();
  return r;
}

/// Metropolis acceptance with geometric cooling, starting from a uniform
/// sample. A zero temperature accepts only non-worsening moves.
inline BaselineResult simulated_annealing(const Objective& obj, const SearchDomain& d, std::size_t budget,
                                          std::uint64_t seed, const AnnealingSchedule& schedule = {}) {
  detail::check_budget(budget);
  if (!(schedule.cooling > 0 && schedule.cooling <= 1)) throw ConfigError("cooling factor must lie in (0, 1]");
  if (!(schedule.proposal_scale > 0)) throw ConfigError("proposal scale must be positive");
  std::mt19937_64 rng(seed);
  BaselineResult r;

  double t = 0.0;
  if (schedule.t0) {
    if (*schedule.t0 < 0) throw ConfigError("initial temperature must be non-negative");
    t = *schedule.t0;
  } else {
    double lo = 0.0;
    double hi = 0.0;
    for (int k = 0; k < 100; ++k) {
      const double c = obj.cost(detail::uniform_point(d, rng));
      ++r.evaluations;
      lo = k == 0 ? c : std::min(lo, c);
      hi = k == 0 ? c : std::max(hi, c);
    }
    t = hi > lo ? hi - lo : 1.0;
  }

  auto x = detail::uniform_point(d, rng);
  double cur = obj.cost(x);
  ++r.evaluations;
  double best = cur;
  r.x = x;
  r.best_history.push_back(best);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 1; k < budget; ++k) {
    auto y = detail::gaussian_step(x, d, schedule.proposal_scale, rng);
    const double u = unit(rng);
    if (d.contains(y)) {
      const double c = obj.cost(y);
      ++r.evaluations;
      const double delta = c - cur;
      if (delta <= 0 || (t > 0 && u < std::exp(-delta / t))) {
        x = std::move(y);
        cur = c;
        if (cur < best) {
          best = cur;
          r.x = x;
        }
      }
    }
    t *= schedule.cooling;
    r.best_history.push_back(best);
  }
  if (obj.sense == Sense::Max)
    for (double& v : r.best_history) v = -v;
  r.value = r.best_history.back();
  return r;
}

}  // namespace slm
