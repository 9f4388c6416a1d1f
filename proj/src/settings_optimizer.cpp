#include "qch/settings_optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "qch/ch_inequality.hpp"
#include "qch/lhv_solver.hpp"

namespace qch {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kInvGolden = 0.61803398874989484820;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double wrap_phase(double x) {
  double w = std::fmod(x, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

class Objective {
 public:
  explicit Objective(ThresholdMethod method) : method_(method) {}

  double operator()(const FreePhases& free) {
    ++evaluations_;
    const PhaseSettings s = settings_from_free(free);
    return method_ == ThresholdMethod::Analytic ? relabeling_free_analytic_threshold(s)
                                                : threshold_objective(s, ThresholdMethod::Lp);
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  ThresholdMethod method_;
  std::size_t evaluations_ = 0;
};

// Golden-section maximization of `f` along coordinate `i` over one period
// centred on the current value.
double golden_section(Objective& f, FreePhases x, std::size_t i, double tol, double& best_value) {
  double lo = x[i] - kPi;
  double hi = x[i] + kPi;
  auto eval = [&](double t) {
    x[i] = t;
    return f(x);
  };
  double c = hi - kInvGolden * (hi - lo);
  double d = lo + kInvGolden * (hi - lo);
  double fc = eval(c);
  double fd = eval(d);
  while (hi - lo > tol) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvGolden * (hi - lo);
      fc = eval(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvGolden * (hi - lo);
      fd = eval(d);
    }
  }
  const double mid = 0.5 * (lo + hi);
  best_value = eval(mid);
  return mid;
}

struct RestartOutcome {
  bool ok = false;
  FreePhases point{};
  double value = 0.0;
  std::size_t evaluations = 0;
};

RestartOutcome ascend(const FreePhases& start, ThresholdMethod method,
                      const OptimizerOptions& options) {
  Objective f(method);
  RestartOutcome out;
  try {
    FreePhases x = start;
    double value = f(x);
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
      const double sweep_start = value;
      for (std::size_t i = 0; i < kFreePhases; ++i) {
        double candidate_value = 0.0;
        const double t = golden_section(f, x, i, options.coordinate_tolerance, candidate_value);
        if (candidate_value > value) {
          x[i] = t;
          value = candidate_value;
        }
      }
      if (value - sweep_start < options.sweep_improvement) break;
    }
    for (double& p : x) p = wrap_phase(p);
    out.point = x;
    out.value = f(x);
    out.ok = true;
  } catch (const NumericalFailure&) {
    out.ok = false;
  }
  out.evaluations = f.evaluations();
  return out;
}

}  // namespace

std::string to_string(ThresholdMethod method) {
  return method == ThresholdMethod::Analytic ? "analytic" : "lp";
}

std::optional<ThresholdMethod> parse_threshold_method(const std::string& text) {
  if (text == "analytic") return ThresholdMethod::Analytic;
  if (text == "lp") return ThresholdMethod::Lp;
  return std::nullopt;
}

double threshold_objective(const PhaseSettings& settings, ThresholdMethod method) {
  const ExperimentProbabilities exp0 = experiment_probabilities(settings, NoiseParameter(0.0));
  if (method == ThresholdMethod::Analytic) return analytic_threshold(exp0).value;
  const LpOutcome outcome = min_noise_lp(exp0);
  if (!outcome.f_min) throw NumericalFailure("threshold LP returned no value");
  return *outcome.f_min;
}

double relabeling_free_analytic_threshold(const PhaseSettings& settings) {
  PhaseSettings plain = settings;
  plain.relabel = Relabeling::identity();
  const ExperimentProbabilities exp0 = experiment_probabilities(plain, NoiseParameter(0.0));
  double best = 0.0;
  for (const Relabeling& r : all_relabelings()) {
    best = std::max(best, analytic_threshold(apply_relabeling(exp0, r)).value);
  }
  return best;
}

PhaseSettings settings_from_free(const FreePhases& free) {
  PhaseSettings s;
  s.alice[0] = {0.0, free[0], free[1]};
  s.alice[1] = {0.0, free[2], free[3]};
  s.bob[0] = {0.0, free[4], free[5]};
  s.bob[1] = {0.0, free[6], free[7]};
  return s;
}

FreePhases free_from_settings(const PhaseSettings& settings) {
  FreePhases out{};
  const std::array<const PhaseVector*, 4> triples{&settings.alice[0], &settings.alice[1],
                                                  &settings.bob[0], &settings.bob[1]};
  for (std::size_t t = 0; t < 4; ++t) {
    const PhaseVector& v = *triples[t];
    out[2 * t] = v[1] - v[0];
    out[2 * t + 1] = v[2] - v[0];
  }
  return out;
}

FreePhases restart_start(std::uint64_t seed, std::size_t restart) {
  std::uint64_t seed_state = seed;
  std::uint64_t index_state = static_cast<std::uint64_t>(restart) ^ 0x632BE59BD9B4E019ULL;
  std::uint64_t state = splitmix64(seed_state) ^ splitmix64(index_state);
  FreePhases out{};
  for (double& p : out) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    p = unit * kTwoPi;
  }
  return out;
}

OptimizationResult refine_from(const PhaseSettings& start, ThresholdMethod method,
                               const OptimizerOptions& options) {
  const RestartOutcome r = ascend(free_from_settings(start), method, options);
  if (!r.ok) throw NumericalFailure("refinement failed");
  OptimizationResult out;
  out.best_settings = settings_from_free(r.point);
  out.best_threshold = r.value;
  out.evaluations = r.evaluations;
  out.restarts = 1;
  return out;
}

OptimizationResult optimize(std::size_t restarts, std::uint64_t seed, ThresholdMethod method,
                            const OptimizerOptions& options) {
  if (restarts == 0) throw std::invalid_argument("restarts must be at least 1");

  std::vector<RestartOutcome> outcomes(restarts);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < restarts; i = next++) {
      outcomes[i] = ascend(restart_start(seed, i), method, options);
    }
  };
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(restarts));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  OptimizationResult result;
  result.seed = seed;
  result.restarts = restarts;
  bool have_best = false;
  for (std::size_t i = 0; i < restarts; ++i) {
    const RestartOutcome& r = outcomes[i];
    result.evaluations += r.evaluations;
    if (!r.ok) {
      ++result.failed_restarts;
      continue;
    }
    if (!have_best || r.value > result.best_threshold) {
      have_best = true;
      result.best_threshold = r.value;
      result.best_settings = settings_from_free(r.point);
      result.best_restart = i;
    }
  }
  if (!have_best) throw NumericalFailure("every restart failed");
  return result;
}

}  // namespace qch
