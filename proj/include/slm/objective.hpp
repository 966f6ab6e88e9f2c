#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slm/error.hpp"

namespace slm {

enum class Sense { Min, Max };

/// Real-valued objective on R^n with an optional analytic gradient.
///
/// `evaluate` must be deterministic and safe to call from several threads at
/// once; the parallel backends rely on both.
struct Objective {
  using Value = std::function<double(std::span<const double>)>;
  using Gradient = std::function<std::vector<double>(std::span<const double>)>;

  Value evaluate;
  Gradient gradient;  // empty when no analytic gradient is known
  Sense sense = Sense::Min;

  bool has_gradient() const noexcept { return static_cast<bool>(gradient); }

  /// f(x), throwing EvaluationError on a non-finite result.
  double value(std::span<const double> x) const {
    const double v = evaluate(x);
    if (!std::isfinite(v)) {
      throw EvaluationError("objective returned a non-finite value", std::vector<double>(x.begin(), x.end()));
    }
    return v;
  }

  /// Minimization-oriented value: f for Min, -f for Max.
  double cost(std::span<const double> x) const {
    const double v = value(x);
    return sense == Sense::Max ? -v : v;
  }

  /// Same objective with the opposite sense flag and identical values.
  Objective with_sense(Sense s) const {
    Objective o = *this;
    o.sense = s;
    return o;
  }
};

}  // namespace slm
