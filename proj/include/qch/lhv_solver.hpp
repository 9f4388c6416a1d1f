#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qch/ch_inequality.hpp"
#include "qch/quantum_engine.hpp"

namespace qch {

/// Raised when the simplex exceeds its iteration cap or produces a
/// certificate that fails its own residual check. Distinct from an
/// infeasibility verdict.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JointDistribution {
  std::array<double, kAtomCount> weights{};

  static JointDistribution uniform();
  static JointDistribution point_mass(const JointAtom& atom);

  double operator[](const JointAtom& atom) const { return weights[atom.index()]; }
  double& operator[](const JointAtom& atom) { return weights[atom.index()]; }
  double total() const;
};

/// Experiment probabilities reproduced by a local-realistic distribution.
ExperimentProbabilities marginals_of(const JointDistribution& dist);

// ---------------------------------------------------------------------------
// Dense two-phase simplex.

/// minimize objective·x  subject to  A x = rhs,  x >= 0.
struct LpProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> objective;  // cols
  std::vector<double> a;          // rows × cols, row-major
  std::vector<double> rhs;        // rows

  LpProblem() = default;
  LpProblem(std::size_t rows, std::size_t cols);

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  /// Throws std::invalid_argument on inconsistent sizes or non-finite data.
  void validate() const;
  /// max_r |(A x - rhs)_r|
  double residual(const std::vector<double>& x) const;
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  /// Phase-1 optimum above this means the constraints cannot be met.
  double infeasibility_tolerance = 1e-9;
  /// 0 selects the default 10·(rows + cols).
  std::size_t iteration_cap = 0;
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  /// Sum of artificial variables at the end of phase 1.
  double phase1_objective = 0.0;
  std::size_t iterations = 0;
};

/// Two-phase tableau simplex with Bland's rule. Redundant equality rows are
/// tolerated. Throws NumericalFailure when the iteration cap is hit.
LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options = {});

// ---------------------------------------------------------------------------
// Local hidden variable oracle.

struct LhvOptions {
  /// Phase-1 residual above which the experiment is declared non-local.
  double tolerance = 1e-9;
  /// Also constrain the single-party marginals. They are implied by the
  /// joint tables, so this must not change any verdict.
  bool include_singles = false;
  /// Tolerance on the certificate's reproduction of the target tables.
  double certificate_tolerance = 1e-7;
};

struct LpOutcome {
  enum class Status { Feasible, Infeasible, ThresholdFound };
  enum class Method { Feasibility, DirectLp, Bisection };
  Status status = Status::Infeasible;
  Method method = Method::Feasibility;
  std::optional<double> f_min;
  std::optional<JointDistribution> certificate;
  std::size_t iterations = 0;
};

std::string to_string(LpOutcome::Status status);
std::string to_string(LpOutcome::Method method);

/// Does a local-realistic joint distribution reproduce `exp`?
LpOutcome lhv_feasible(const ExperimentProbabilities& exp, const LhvOptions& options = {});

/// Smallest white-noise fraction F at which (1-F)·exp0 + F/9 admits a local
/// model, via the direct LP over (weights, F). Falls back to bisection over
/// lhv_feasible when the direct LP hits its iteration cap.
LpOutcome min_noise_lp(const ExperimentProbabilities& exp0, const LhvOptions& options = {});

/// Bisection variant of min_noise_lp, exposed for cross-checking.
LpOutcome min_noise_bisection(const ExperimentProbabilities& exp0, const LhvOptions& options = {},
                              int iterations = 40);

}  // namespace qch
