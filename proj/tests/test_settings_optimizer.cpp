#include <cmath>
#include <cstring>

#include "doctest.h"
#include "qch/lhv_solver.hpp"
#include "qch/settings_optimizer.hpp"
#include "support.hpp"

using namespace qch;
using qch::test::Gen;

namespace {

bool bitwise_equal(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

bool same_result(const OptimizationResult& x, const OptimizationResult& y) {
  if (!bitwise_equal(x.best_threshold, y.best_threshold)) return false;
  if (x.evaluations != y.evaluations || x.best_restart != y.best_restart) return false;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 3; ++i) {
      if (!bitwise_equal(x.best_settings.alice[s][i], y.best_settings.alice[s][i])) return false;
      if (!bitwise_equal(x.best_settings.bob[s][i], y.best_settings.bob[s][i])) return false;
    }
  return true;
}

}  // namespace

TEST_SUITE("settings-optimizer") {

TEST_CASE("method names") {
  CHECK(parse_threshold_method("analytic") == ThresholdMethod::Analytic);
  CHECK(parse_threshold_method("lp") == ThresholdMethod::Lp);
  CHECK_FALSE(parse_threshold_method("simplex").has_value());
  CHECK(to_string(ThresholdMethod::Lp) == "lp");
}

TEST_CASE("threshold objective") {
  SUBCASE("reference phases, lp") {
    CHECK(std::abs(threshold_objective(paper_phases(), ThresholdMethod::Lp) - test::kPaperThreshold) < 1e-6);
  }
  SUBCASE("all-zero phases, lp") {
    CHECK(std::abs(threshold_objective(PhaseSettings{}, ThresholdMethod::Lp)) < 1e-9);
  }
  SUBCASE("analytic depends on labeling, lp does not") {
    const double bare = threshold_objective(paper_phases(), ThresholdMethod::Analytic);
    CHECK(bare >= 0.0);
    CHECK(bare <= test::kPaperThreshold + 1e-12);
    const double labeled = threshold_objective(paper_preset(), ThresholdMethod::Analytic);
    CHECK(std::abs(labeled - threshold_objective(paper_preset(), ThresholdMethod::Lp)) < 1e-6);
  }
  SUBCASE("relabeling-free analytic score recovers the preset value") {
    CHECK(std::abs(relabeling_free_analytic_threshold(paper_phases()) - test::kPaperThreshold) < 1e-12);
  }
}

TEST_CASE("gauge pinning") {
  Gen gen(97);
  for (int i = 0; i < 10; ++i) {
    const PhaseSettings s = gen.settings();
    const PhaseSettings pinned = settings_from_free(free_from_settings(s));
    CHECK(pinned.alice[0][0] == 0.0);
    CHECK(pinned.bob[1][0] == 0.0);
    const ExperimentProbabilities a = experiment_probabilities(s, NoiseParameter(0.0));
    const ExperimentProbabilities b = experiment_probabilities(pinned, NoiseParameter(0.0));
    CHECK(test::max_table_diff(a, b) < 1e-12);
    CHECK(std::abs(relabeling_free_analytic_threshold(s) - relabeling_free_analytic_threshold(pinned)) < 1e-12);
    CHECK(std::abs(threshold_objective(s, ThresholdMethod::Lp) -
                   threshold_objective(pinned, ThresholdMethod::Lp)) < 1e-7);
  }
}

TEST_CASE("restart streams") {
  const FreePhases a = restart_start(7, 0);
  const FreePhases b = restart_start(7, 0);
  const FreePhases c = restart_start(7, 1);
  const FreePhases d = restart_start(8, 0);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != d);
  for (std::size_t r = 0; r < 50; ++r)
    for (double p : restart_start(123, r)) {
      CHECK(p >= 0.0);
      CHECK(p < 2.0 * kPi);
    }
}

TEST_CASE("refinement from the reference phases stays at the reference threshold") {
  const OptimizationResult r = refine_from(paper_phases(), ThresholdMethod::Lp);
  CHECK(std::abs(r.best_threshold - test::kPaperThreshold) < 1e-6);
  CHECK(std::abs(threshold_objective(r.best_settings, ThresholdMethod::Lp) - r.best_threshold) < 1e-9);
}

TEST_CASE("analytic optimize is deterministic and thread-count independent") {
  OptimizerOptions serial;
  serial.threads = 1;
  OptimizerOptions parallel;
  parallel.threads = 4;
  const OptimizationResult a = optimize(4, 7, ThresholdMethod::Analytic, serial);
  const OptimizationResult b = optimize(4, 7, ThresholdMethod::Analytic, serial);
  const OptimizationResult c = optimize(4, 7, ThresholdMethod::Analytic, parallel);
  CHECK(same_result(a, b));
  CHECK(same_result(a, c));
  CHECK(a.seed == 7);
  CHECK(a.restarts == 4);
  CHECK(a.failed_restarts == 0);
  CHECK(a.best_threshold >= 0.0);
  CHECK(a.best_threshold <= 1.0);
  CHECK(std::abs(relabeling_free_analytic_threshold(a.best_settings) - a.best_threshold) < 1e-9);
  // Soundness: the analytic score never exceeds the exact local-model threshold.
  CHECK(a.best_threshold <= threshold_objective(a.best_settings, ThresholdMethod::Lp) + 1e-6);
}

TEST_CASE("lp optimize with a single restart") {
  const OptimizationResult a = optimize(1, 3, ThresholdMethod::Lp);
  const OptimizationResult b = optimize(1, 3, ThresholdMethod::Lp);
  CHECK(same_result(a, b));
  CHECK(std::abs(threshold_objective(a.best_settings, ThresholdMethod::Lp) - a.best_threshold) < 1e-9);
  CHECK(a.best_threshold <= test::kPaperThreshold + 1e-6);
}

TEST_CASE("zero restarts are rejected") {
  CHECK_THROWS_AS(optimize(0, 1, ThresholdMethod::Analytic), std::invalid_argument);
}

}  // TEST_SUITE
