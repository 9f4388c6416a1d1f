#include <algorithm>
#include <cmath>
#include <limits>

#include "qch/lhv_solver.hpp"

namespace qch {

namespace {

constexpr double kFeasibilitySlack = 1e-9;

// Tableau layout: `rows` constraint rows followed by one reduced-cost row;
// columns are the structural variables, one artificial per row, then RHS.
// The reduced-cost row stores d_j and, in the RHS slot, minus the objective.
class Tableau {
 public:
  Tableau(const LpProblem& problem, const SimplexOptions& options)
      : m_(problem.rows),
        n_(problem.cols),
        width_(problem.cols + problem.rows + 1),
        tol_(options.pivot_tolerance),
        cells_((m_ + 1) * width_, 0.0),
        basis_(m_),
        active_(m_, true) {
    for (std::size_t r = 0; r < m_; ++r) {
      const double flip = problem.rhs[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t c = 0; c < n_; ++c) at(r, c) = flip * problem.at(r, c);
      at(r, n_ + r) = 1.0;
      rhs(r) = flip * problem.rhs[r];
      basis_[r] = n_ + r;
    }
  }

  std::size_t iterations() const { return iterations_; }

  /// Phase 1: minimize the sum of artificials. Returns that minimum.
  double run_phase1(std::size_t cap) {
    for (std::size_t c = 0; c < width_; ++c) cost(c) = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t c = 0; c < n_; ++c) cost(c) -= at(r, c);
      cost(width_ - 1) -= rhs(r);
    }
    iterate(n_ + m_, cap);
    return -cost(width_ - 1);
  }

  /// Pivots remaining basic artificials out where possible; rows where no
  /// structural column has a usable entry are linearly dependent and are
  /// retired.
  void evict_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t best = n_;
      double best_mag = tol_;
      for (std::size_t c = 0; c < n_; ++c) {
        if (std::abs(at(r, c)) > best_mag) {
          best_mag = std::abs(at(r, c));
          best = c;
        }
      }
      if (best < n_) {
        pivot(r, best);
      } else {
        active_[r] = false;
      }
    }
  }

  /// Phase 2 over structural columns only. Returns false when unbounded.
  bool run_phase2(const std::vector<double>& objective, std::size_t cap) {
    for (std::size_t c = 0; c < width_; ++c) cost(c) = 0.0;
    for (std::size_t c = 0; c < n_; ++c) cost(c) = objective[c];
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r] || basis_[r] >= n_) continue;
      const double cb = objective[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) cost(c) -= cb * at(r, c);
    }
    return iterate(n_, cap);
  }

  std::vector<double> solution() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r] && basis_[r] < n_) x[basis_[r]] = rhs(r);
    return x;
  }

  double objective_value() const { return -cost(width_ - 1); }

 private:
  double& at(std::size_t r, std::size_t c) { return cells_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * width_ + c]; }
  double& rhs(std::size_t r) { return at(r, width_ - 1); }
  double rhs(std::size_t r) const { return at(r, width_ - 1); }
  double& cost(std::size_t c) { return at(m_, c); }
  double cost(std::size_t c) const { return at(m_, c); }

  // Bland's rule picks the entering column: the lowest-index improving one.
  bool iterate(std::size_t eligible_cols, std::size_t cap) {
    while (true) {
      std::size_t enter = eligible_cols;
      for (std::size_t c = 0; c < eligible_cols; ++c) {
        if (cost(c) < -tol_) {
          enter = c;
          break;
        }
      }
      if (enter == eligible_cols) return true;

      // Two-pass ratio test: find the largest step that keeps every basic
      // variable above -kFeasibilitySlack, then among rows blocking within
      // that step take the largest pivot so noise-sized entries never pivot.
      double max_step = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (!active_[r] || at(r, enter) <= tol_) continue;
        max_step = std::min(max_step, (std::max(rhs(r), 0.0) + kFeasibilitySlack) / at(r, enter));
      }
      std::size_t leave = m_;
      for (std::size_t r = 0; r < m_; ++r) {
        if (!active_[r] || at(r, enter) <= tol_) continue;
        if (std::max(rhs(r), 0.0) / at(r, enter) > max_step) continue;
        if (leave == m_ || at(r, enter) > at(leave, enter) ||
            (at(r, enter) == at(leave, enter) && basis_[r] < basis_[leave])) {
          leave = r;
        }
      }
      if (leave == m_) return false;

      if (iterations_ >= cap) {
        throw NumericalFailure("simplex iteration cap (" + std::to_string(cap) + ") exceeded");
      }
      pivot(leave, enter);
      // The step may leave basic values a hair below zero; snap them back.
      for (std::size_t r = 0; r < m_; ++r)
        if (rhs(r) < 0.0 && rhs(r) > -kFeasibilitySlack) rhs(r) = 0.0;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    ++iterations_;
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c < width_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double factor = at(r, pc);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) at(r, c) -= factor * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  double tol_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpProblem::LpProblem(std::size_t rows_, std::size_t cols_)
    : rows(rows_), cols(cols_), objective(cols_, 0.0), a(rows_ * cols_, 0.0), rhs(rows_, 0.0) {}

void LpProblem::validate() const {
  if (objective.size() != cols || rhs.size() != rows || a.size() != rows * cols) {
    throw std::invalid_argument("LP dimensions are inconsistent");
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(objective.begin(), objective.end(), finite) ||
      !std::all_of(a.begin(), a.end(), finite) || !std::all_of(rhs.begin(), rhs.end(), finite)) {
    throw std::invalid_argument("LP data must be finite");
  }
}

double LpProblem::residual(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double s = -rhs[r];
    for (std::size_t c = 0; c < cols; ++c) s += at(r, c) * x[c];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

LpSolution simplex_solve(const LpProblem& problem, const SimplexOptions& options) {
  problem.validate();
  const std::size_t cap =
      options.iteration_cap != 0 ? options.iteration_cap : 10 * (problem.rows + problem.cols);

  Tableau tableau(problem, options);
  LpSolution out;
  out.phase1_objective = tableau.run_phase1(cap);
  if (out.phase1_objective > options.infeasibility_tolerance) {
    out.status = LpSolution::Status::Infeasible;
    out.iterations = tableau.iterations();
    return out;
  }
  tableau.evict_artificials();
  const bool bounded = tableau.run_phase2(problem.objective, cap);
  out.iterations = tableau.iterations();
  if (!bounded) {
    out.status = LpSolution::Status::Unbounded;
    return out;
  }
  out.status = LpSolution::Status::Optimal;
  out.x = tableau.solution();
  out.objective = 0.0;
  for (std::size_t c = 0; c < problem.cols; ++c) out.objective += problem.objective[c] * out.x[c];
  return out;
}

}  // namespace qch
