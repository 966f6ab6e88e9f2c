#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>

#include "slm/error.hpp"
#include "slm/grid.hpp"
#include "slm/labeling.hpp"
#include "slm/objective.hpp"

namespace slm {

struct EngineConfig {
  LabelingStrategy strategy = LabelingStrategy::BestNeighbor;
  /// Stop once the largest per-axis step of the active cells is <= this.
  double h_tolerance = 1e-12;
  /// Index of the last generation; generation 0 labels the domain corners.
  int max_generations = 20;
  /// Keep every completely labeled cell instead of only the best one.
  bool multimodal = false;
  Sense sense = Sense::Min;
  int max_level = kDefaultMaxLevel;
  bool finite_difference_fallback = true;
  double fd_relative_step = 1e-4;

  void validate() const {
    if (!(h_tolerance > 0)) throw ConfigError("h_tolerance must be positive");
    if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
    if (max_level < 1 || max_level > kIndexLevelCeiling)
      throw ConfigError("max_level must lie in [1, " + std::to_string(kIndexLevelCeiling) + "]");
    if (!(fd_relative_step > 0)) throw ConfigError("fd_relative_step must be positive");
  }
};

enum class BackendKind { Serial, Parallel, Clustered };

inline std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Serial: return "serial";
    case BackendKind::Parallel: return "parallel";
    case BackendKind::Clustered: return "clustered";
  }
  return "?";
}

/// Conventional algorithm name reported alongside each backend.
inline std::string algorithm_name(BackendKind k) {
  switch (k) {
    case BackendKind::Serial: return "SLM";
    case BackendKind::Parallel: return "SLMPA";
    case BackendKind::Clustered: return "SLMCBPGA";
  }
  return "?";
}

inline BackendKind parse_backend_kind(const std::string& s) {
  if (s == "serial") return BackendKind::Serial;
  if (s == "parallel") return BackendKind::Parallel;
  if (s == "clustered") return BackendKind::Clustered;
  throw ConfigError("unknown backend '" + s + "' (expected serial, parallel or clustered)");
}

/// SERIAL labels in the caller's thread through the memoizing registry.
/// PARALLEL scatters cells to `workers` threads that evaluate every vertex
/// slot independently. CLUSTERED scatters the same way but routes every
/// evaluation through the shared registry, so shared vertices are labeled once.
struct ExecutionBackend {
  BackendKind kind = BackendKind::Serial;
  std::size_t workers = 1;

  static ExecutionBackend serial() { return {BackendKind::Serial, 1}; }
  static ExecutionBackend parallel(std::size_t p) { return {BackendKind::Parallel, p}; }
  static ExecutionBackend clustered(std::size_t p) { return {BackendKind::Clustered, p}; }

  void validate() const {
    if (workers < 1) throw ConfigError("worker count must be at least 1");
  }
};

/// Default pool size: $SLM_WORKERS if set to a positive integer, else 1.
inline std::size_t default_worker_count() {
  if (const char* env = std::getenv("SLM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace slm
