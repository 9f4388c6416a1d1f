#include "qch/lhv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qch {

namespace {

constexpr std::size_t kJointRows = 36;
constexpr std::size_t kSinglesRows = 12;
constexpr double kNegativeWeightSlack = 1e-9;

// Writes the local-model marginal equations into rows starting at `row`:
// 36 joint rows (k, l, a, b), the normalization row, then optionally the
// 12 singles rows. Returns the next free row. Right-hand sides are left to
// the caller.
std::size_t add_marginal_rows(LpProblem& lp, std::size_t row, bool include_singles) {
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l)
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b, ++row)
          for (const JointAtom& atom : all_atoms())
            if (atom.alice(k) == a && atom.bob(l) == b) lp.at(row, atom.index()) = 1.0;
  for (std::size_t c = 0; c < kAtomCount; ++c) lp.at(row, c) = 1.0;
  ++row;
  if (!include_singles) return row;
  for (int s = 1; s <= 2; ++s)
    for (int x = 1; x <= 3; ++x) {
      for (const JointAtom& atom : all_atoms()) {
        if (atom.alice(s) == x) lp.at(row, atom.index()) = 1.0;
        if (atom.bob(s) == x) lp.at(row + 1, atom.index()) = 1.0;
      }
      row += 2;
    }
  return row;
}

// Right-hand sides in the same order as add_marginal_rows.
std::vector<double> marginal_targets(const ExperimentProbabilities& exp, bool include_singles) {
  std::vector<double> out;
  out.reserve(kJointRows + 1 + kSinglesRows);
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l)
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) out.push_back(exp.table(k, l).at(a, b));
  out.push_back(1.0);
  if (include_singles) {
    for (int s = 1; s <= 2; ++s)
      for (int x = 1; x <= 3; ++x) {
        out.push_back(exp.alice_single(s, x));
        out.push_back(exp.bob_single(s, x));
      }
  }
  return out;
}

std::size_t marginal_row_count(bool include_singles) {
  return kJointRows + 1 + (include_singles ? kSinglesRows : 0);
}

JointDistribution extract_certificate(const std::vector<double>& x) {
  JointDistribution dist;
  for (std::size_t i = 0; i < kAtomCount; ++i) {
    if (x[i] < -kNegativeWeightSlack) {
      throw NumericalFailure("simplex returned a negative weight");
    }
    dist.weights[i] = std::max(x[i], 0.0);
  }
  return dist;
}

void verify_certificate(const JointDistribution& dist, const ExperimentProbabilities& target,
                        double tol) {
  if (std::abs(dist.total() - 1.0) > tol) {
    throw NumericalFailure("certificate weights do not sum to 1");
  }
  const ExperimentProbabilities got = marginals_of(dist);
  for (std::size_t t = 0; t < 4; ++t)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (std::abs(got.tables[t].p[a][b] - target.tables[t].p[a][b]) > tol) {
          throw NumericalFailure("certificate does not reproduce the target tables");
        }
}

}  // namespace

JointDistribution JointDistribution::uniform() {
  JointDistribution d;
  d.weights.fill(1.0 / static_cast<double>(kAtomCount));
  return d;
}

JointDistribution JointDistribution::point_mass(const JointAtom& atom) {
  if (!atom.is_valid()) throw std::invalid_argument("atom outcomes must lie in 1..3");
  JointDistribution d;
  d[atom] = 1.0;
  return d;
}

double JointDistribution::total() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

ExperimentProbabilities marginals_of(const JointDistribution& dist) {
  ExperimentProbabilities exp;
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) {
      exp.table(k, l).alice_setting = k;
      exp.table(k, l).bob_setting = l;
    }
  for (const JointAtom& atom : all_atoms()) {
    const double w = dist[atom];
    for (int k = 1; k <= 2; ++k) {
      for (int l = 1; l <= 2; ++l) exp.table(k, l).p[atom.alice(k) - 1][atom.bob(l) - 1] += w;
      exp.alice_singles[k - 1][atom.alice(k) - 1] += w;
      exp.bob_singles[k - 1][atom.bob(k) - 1] += w;
    }
  }
  return exp;
}

std::string to_string(LpOutcome::Status status) {
  switch (status) {
    case LpOutcome::Status::Feasible: return "feasible";
    case LpOutcome::Status::Infeasible: return "infeasible";
    case LpOutcome::Status::ThresholdFound: return "threshold-found";
  }
  return "unknown";
}

std::string to_string(LpOutcome::Method method) {
  switch (method) {
    case LpOutcome::Method::Feasibility: return "feasibility";
    case LpOutcome::Method::DirectLp: return "direct-lp";
    case LpOutcome::Method::Bisection: return "bisection";
  }
  return "unknown";
}

LpOutcome lhv_feasible(const ExperimentProbabilities& exp, const LhvOptions& options) {
  LpProblem lp(marginal_row_count(options.include_singles), kAtomCount);
  add_marginal_rows(lp, 0, options.include_singles);
  lp.rhs = marginal_targets(exp, options.include_singles);

  SimplexOptions simplex;
  simplex.infeasibility_tolerance = options.tolerance;
  const LpSolution sol = simplex_solve(lp, simplex);

  LpOutcome out;
  out.method = LpOutcome::Method::Feasibility;
  out.iterations = sol.iterations;
  if (sol.status != LpSolution::Status::Optimal) {
    out.status = LpOutcome::Status::Infeasible;
    return out;
  }
  JointDistribution cert = extract_certificate(sol.x);
  verify_certificate(cert, exp, options.certificate_tolerance);
  out.status = LpOutcome::Status::Feasible;
  out.certificate = cert;
  return out;
}

LpOutcome min_noise_lp(const ExperimentProbabilities& exp0, const LhvOptions& options) {
  // Columns: 81 weights, F, slack for F <= 1.
  const std::size_t f_col = kAtomCount;
  const std::size_t slack_col = kAtomCount + 1;
  const std::size_t marginal_rows = marginal_row_count(options.include_singles);
  LpProblem lp(marginal_rows + 1, kAtomCount + 2);
  add_marginal_rows(lp, 0, options.include_singles);
  lp.rhs = marginal_targets(exp0, options.include_singles);
  lp.rhs.push_back(1.0);

  // marginal(w) = (1-F)·p0 + F/9   <=>   marginal(w) + F·(p0 - 1/9) = p0
  for (std::size_t r = 0; r < kJointRows; ++r) lp.at(r, f_col) = lp.rhs[r] - 1.0 / 9.0;
  lp.at(marginal_rows, f_col) = 1.0;
  lp.at(marginal_rows, slack_col) = 1.0;
  lp.objective[f_col] = 1.0;

  SimplexOptions simplex;
  simplex.infeasibility_tolerance = options.tolerance;
  LpSolution sol;
  try {
    sol = simplex_solve(lp, simplex);
  } catch (const NumericalFailure&) {
    return min_noise_bisection(exp0, options);
  }
  if (sol.status != LpSolution::Status::Optimal) {
    // F = 1 with the uniform distribution is always feasible for
    // no-signaling input, so this only happens for inconsistent tables.
    LpOutcome out;
    out.method = LpOutcome::Method::DirectLp;
    out.status = LpOutcome::Status::Infeasible;
    out.iterations = sol.iterations;
    return out;
  }

  const double f_min = std::clamp(sol.x[f_col], 0.0, 1.0);
  JointDistribution cert = extract_certificate(sol.x);
  verify_certificate(cert, with_noise(exp0, NoiseParameter(f_min)), options.certificate_tolerance);

  LpOutcome out;
  out.method = LpOutcome::Method::DirectLp;
  out.status = LpOutcome::Status::ThresholdFound;
  out.f_min = f_min;
  out.certificate = cert;
  out.iterations = sol.iterations;
  return out;
}

LpOutcome min_noise_bisection(const ExperimentProbabilities& exp0, const LhvOptions& options,
                              int iterations) {
  LpOutcome out;
  out.method = LpOutcome::Method::Bisection;

  const auto probe = [&](double f) {
    LpOutcome o = lhv_feasible(with_noise(exp0, NoiseParameter(f)), options);
    out.iterations += o.iterations;
    return o;
  };

  LpOutcome at_zero = probe(0.0);
  if (at_zero.status == LpOutcome::Status::Feasible) {
    out.status = LpOutcome::Status::ThresholdFound;
    out.f_min = 0.0;
    out.certificate = at_zero.certificate;
    return out;
  }
  LpOutcome best = probe(1.0);
  if (best.status != LpOutcome::Status::Feasible) {
    out.status = LpOutcome::Status::Infeasible;
    return out;
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    LpOutcome o = probe(mid);
    if (o.status == LpOutcome::Status::Feasible) {
      hi = mid;
      best = std::move(o);
    } else {
      lo = mid;
    }
  }
  out.status = LpOutcome::Status::ThresholdFound;
  out.f_min = hi;
  out.certificate = best.certificate;
  return out;
}

}  // namespace qch
