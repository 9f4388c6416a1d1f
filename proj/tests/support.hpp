#pragma once

// Shared fixtures, oracles and random generators for the test suites.
// Nothing here calls into the code paths it is used to check.

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "qch/ch_inequality.hpp"
#include "qch/lhv_solver.hpp"
#include "qch/quantum_engine.hpp"

namespace qch::test {

inline const double kSqrt3 = std::sqrt(3.0);
inline const double kPaperThreshold = (11.0 - 6.0 * kSqrt3) / 2.0;
inline const double kPaperLhsPure = (8.0 * kSqrt3 - 6.0) / 27.0;

// The three outcome classes the published tables are constant on.
enum class OutcomeClass { X, Y, Z };

inline OutcomeClass outcome_class(int a, int b) {
  // X = {(1,1),(2,3),(3,2)}, Y = {(1,2),(2,1),(3,3)}, Z = {(2,2),(1,3),(3,1)}
  const int s = (a + b) % 3;
  if (s == 2) return OutcomeClass::X;
  if (s == 0) return OutcomeClass::Y;
  return OutcomeClass::Z;
}

/// The published F = 0 probability tables for the reference settings.
inline ExperimentProbabilities published_tables() {
  const double low = 1.0 / 27.0;
  const double plus = (4.0 + 2.0 * kSqrt3) / 27.0;
  const double minus = (4.0 - 2.0 * kSqrt3) / 27.0;
  // {X, Y, Z} values for tables 11, 12, 21, 22.
  const std::array<std::array<double, 3>, 4> values{{
      {low, plus, minus},
      {minus, plus, low},
      {plus, low, minus},
      {low, plus, minus},
  }};
  ExperimentProbabilities exp;
  for (int t = 0; t < 4; ++t) {
    exp.tables[t].alice_setting = 1 + t / 2;
    exp.tables[t].bob_setting = 1 + t % 2;
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b)
        exp.tables[t].p[a - 1][b - 1] = values[t][static_cast<int>(outcome_class(a, b))];
  }
  for (auto& s : exp.alice_singles) s = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (auto& s : exp.bob_singles) s = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  return exp;
}

/// The inequality evaluated on a deterministic strategy, written out as
/// indicator functions of the four outcomes.
inline int indicator_oracle(int a1, int a2, int b1, int b2) {
  const auto i = [](bool c) { return c ? 1 : 0; };
  return i(a1 == 2 && b1 == 1) + i(a1 == 2 && b2 == 1) - i(a2 == 2 && b1 == 1) + i(a2 == 2 && b2 == 1)
       + i(a1 == 1 && b1 == 2) + i(a1 == 1 && b2 == 2) - i(a2 == 1 && b1 == 2) + i(a2 == 1 && b2 == 2)
       + i(a1 == 2 && b1 == 2) + i(a1 == 1 && b2 == 1) - i(a2 == 2 && b1 == 2) + i(a2 == 2 && b2 == 2)
       - i(a1 == 1) - i(a1 == 2) - i(b2 == 1) - i(b2 == 2);
}

/// Census of the oracle coefficients, computed by running indicator_oracle
/// over all 81 atoms before the expander was written.
struct Census {
  int zero;
  int minus_one;
  int minus_two;
};
inline constexpr Census kFrozenCensus{30, 48, 3};

/// The hand expansion of the functional (negated terms) as commonly listed,
/// including one entry that appears twice.
inline const std::vector<std::pair<std::array<int, 4>, int>>& listed_expansion() {
  static const std::vector<std::pair<std::array<int, 4>, int>> terms = {
      {{1, 1, 1, 1}, 1}, {{1, 1, 1, 3}, 1}, {{1, 1, 2, 1}, 1}, {{1, 1, 2, 3}, 1},
      {{1, 1, 3, 1}, 1}, {{1, 1, 3, 3}, 1}, {{1, 2, 1, 1}, 1}, {{1, 2, 1, 2}, 1},
      {{1, 2, 1, 3}, 2}, {{1, 2, 2, 3}, 1}, {{1, 2, 2, 3}, 1}, {{1, 2, 3, 3}, 1},
      {{1, 3, 1, 1}, 1}, {{1, 3, 1, 2}, 1}, {{1, 3, 1, 3}, 1}, {{1, 3, 3, 1}, 1},
      {{1, 3, 3, 2}, 1}, {{1, 3, 3, 3}, 1}, {{2, 1, 2, 1}, 1}, {{2, 1, 2, 2}, 1},
      {{2, 1, 2, 3}, 1}, {{2, 1, 3, 1}, 1}, {{2, 1, 3, 2}, 1}, {{2, 1, 3, 3}, 1},
      {{2, 2, 1, 2}, 1}, {{2, 2, 1, 3}, 1}, {{2, 2, 2, 2}, 1}, {{2, 2, 2, 3}, 1},
      {{2, 2, 3, 2}, 1}, {{2, 2, 3, 3}, 1}, {{2, 3, 1, 2}, 1}, {{2, 3, 2, 2}, 1},
      {{2, 3, 3, 1}, 1}, {{2, 3, 3, 2}, 2}, {{2, 3, 3, 3}, 1}, {{3, 1, 1, 1}, 1},
      {{3, 1, 2, 1}, 2}, {{3, 1, 2, 2}, 1}, {{3, 1, 2, 3}, 1}, {{3, 1, 3, 1}, 1},
      {{3, 2, 1, 1}, 1}, {{3, 2, 1, 2}, 1}, {{3, 2, 1, 3}, 1}, {{3, 2, 2, 1}, 1},
      {{3, 2, 2, 2}, 1}, {{3, 2, 2, 3}, 1}, {{3, 3, 1, 1}, 1}, {{3, 3, 1, 2}, 1},
      {{3, 3, 2, 1}, 1}, {{3, 3, 2, 2}, 1}, {{3, 3, 3, 1}, 1}, {{3, 3, 3, 2}, 1},
  };
  return terms;
}

/// Explicit local model for the all-zero-phase experiment: outcomes are
/// perfectly anti-correlated within one cyclic class, so a1 = a2 = a and
/// b1 = b2 = the partner of a, each with weight 1/3.
inline JointDistribution zero_phase_certificate() {
  JointDistribution d;
  for (int a = 1; a <= 3; ++a) {
    const int b = 1 + (3 - (a - 1)) % 3;  // (a-1) + (b-1) ≡ 0 (mod 3)
    d[JointAtom{a, a, b, b}] = 1.0 / 3.0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Generators

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  PhaseVector phases() { return {uniform(-7.0, 7.0), uniform(-7.0, 7.0), uniform(-7.0, 7.0)}; }

  Permutation permutation() { return Permutation::all()[static_cast<std::size_t>(integer(0, 5))]; }

  Relabeling relabeling() { return {{permutation(), permutation(), permutation(), permutation()}}; }

  PhaseSettings settings(bool with_relabel = false) {
    PhaseSettings s;
    s.alice = {phases(), phases()};
    s.bob = {phases(), phases()};
    if (with_relabel) s.relabel = relabeling();
    return s;
  }

  /// Random point in the simplex over atoms; `sparsity` in (0,1] keeps
  /// roughly that fraction of atoms in the support.
  JointDistribution distribution(double sparsity = 1.0) {
    JointDistribution d;
    double total = 0.0;
    for (double& w : d.weights) {
      w = uniform(0.0, 1.0) < sparsity ? -std::log(uniform(1e-12, 1.0)) : 0.0;
      total += w;
    }
    if (total == 0.0) {
      d.weights[0] = 1.0;
      return d;
    }
    for (double& w : d.weights) w /= total;
    return d;
  }

  /// Haar-ish random unitary via Gram-Schmidt on a complex Gaussian matrix.
  ComplexMatrix3 unitary() {
    std::normal_distribution<double> n(0.0, 1.0);
    std::array<std::array<Complex, 3>, 3> cols{};
    for (auto& c : cols)
      for (auto& z : c) z = Complex(n(rng_), n(rng_));
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < j; ++i) {
        Complex dot = 0.0;
        for (int r = 0; r < 3; ++r) dot += std::conj(cols[i][r]) * cols[j][r];
        for (int r = 0; r < 3; ++r) cols[j][r] -= dot * cols[i][r];
      }
      double norm = 0.0;
      for (const auto& z : cols[j]) norm += std::norm(z);
      norm = std::sqrt(norm);
      for (auto& z : cols[j]) z /= norm;
    }
    ComplexMatrix3 u;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) u(r, c) = cols[c][r];
    return u;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_table_diff(const ExperimentProbabilities& x, const ExperimentProbabilities& y) {
  double worst = 0.0;
  for (std::size_t t = 0; t < 4; ++t)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        worst = std::max(worst, std::abs(x.tables[t].p[a][b] - y.tables[t].p[a][b]));
  return worst;
}

inline double max_singles_diff(const ExperimentProbabilities& x, const ExperimentProbabilities& y) {
  double worst = 0.0;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(x.alice_singles[s][i] - y.alice_singles[s][i]));
      worst = std::max(worst, std::abs(x.bob_singles[s][i] - y.bob_singles[s][i]));
    }
  return worst;
}

}  // namespace qch::test
