#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "qch/quantum_engine.hpp"

namespace qch {

enum class ThresholdMethod { Analytic, Lp };

std::string to_string(ThresholdMethod method);
/// Accepts "analytic" or "lp".
std::optional<ThresholdMethod> parse_threshold_method(const std::string& text);

/// Noise threshold of the F = 0 experiment built from `settings` (including
/// its relabeling). Analytic scores only the CH inequality, a lower bound on
/// the Lp score, which is the exact local-model threshold.
double threshold_objective(const PhaseSettings& settings, ThresholdMethod method);

/// Analytic threshold maximized over all 1296 outcome relabelings, which
/// makes it independent of detector labeling like the Lp score.
double relabeling_free_analytic_threshold(const PhaseSettings& settings);

struct OptimizerOptions {
  /// Golden-section stopping width per coordinate, radians.
  double coordinate_tolerance = 1e-4;
  /// A sweep improving the objective by less than this ends the descent.
  double sweep_improvement = 1e-7;
  std::size_t max_sweeps = 50;
  /// Restarts run on up to this many threads; 0 means hardware concurrency.
  unsigned threads = 0;
};

struct OptimizationResult {
  PhaseSettings best_settings;
  double best_threshold = 0.0;
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  std::size_t failed_restarts = 0;
  /// Restart that produced the best result.
  std::size_t best_restart = 0;
};

/// The first phase of each triple is pinned to 0: adding a constant to an
/// observable's three phases only changes a global phase. The remaining 8
/// coordinates are the free parameters.
inline constexpr std::size_t kFreePhases = 8;
using FreePhases = std::array<double, kFreePhases>;

PhaseSettings settings_from_free(const FreePhases& free);
/// Shifts each triple so its first phase is 0.
FreePhases free_from_settings(const PhaseSettings& settings);

/// Phases for one restart, drawn uniformly from [0, 2pi) with a stream
/// determined by (seed, restart).
FreePhases restart_start(std::uint64_t seed, std::size_t restart);

/// Coordinate-wise golden-section ascent from `start`. This is the
/// per-restart refinement used by optimize(), exposed so a caller can start
/// from a known point.
OptimizationResult refine_from(const PhaseSettings& start, ThresholdMethod method,
                               const OptimizerOptions& options = {});

/// Random-restart search for the settings with the largest threshold.
/// Deterministic for fixed (restarts, seed, method), independent of the
/// thread count.
OptimizationResult optimize(std::size_t restarts, std::uint64_t seed, ThresholdMethod method,
                            const OptimizerOptions& options = {});

}  // namespace qch
