#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slm {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A grid index or coordinate falls outside the search domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Subdivision would exceed the configured maximum refinement level.
class RefinementLimitError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (bad domain, missing gradient, zero budget, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The engine ran out of active cells.
class EngineError : public Error {
 public:
  using Error::Error;
};

/// Unknown cell id or point in the cluster tables.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// The objective returned a non-finite value. Carries the offending point.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

}  // namespace slm
