#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qch/quantum_engine.hpp"

namespace qch {

inline constexpr std::size_t kAtomCount = 81;

/// A deterministic assignment of outcomes (1..3) to A1, A2, B1, B2.
struct JointAtom {
  int a1 = 1;
  int a2 = 1;
  int b1 = 1;
  int b2 = 1;

  /// Odometer position, a1 fastest.
  std::size_t index() const {
    return static_cast<std::size_t>((a1 - 1) + 3 * (a2 - 1) + 9 * (b1 - 1) + 27 * (b2 - 1));
  }
  static JointAtom from_index(std::size_t index);
  bool is_valid() const;

  int alice(int k) const { return k == 1 ? a1 : a2; }
  int bob(int l) const { return l == 1 ? b1 : b2; }

  friend bool operator==(const JointAtom&, const JointAtom&) = default;
};

/// All 81 atoms in odometer order.
const std::array<JointAtom, kAtomCount>& all_atoms();

/// A linear functional over joint distributions, one weight per atom.
struct ChCoefficients {
  std::array<double, kAtomCount> c{};

  double& operator[](const JointAtom& atom) { return c[atom.index()]; }
  double operator[](const JointAtom& atom) const { return c[atom.index()]; }

  double sum() const;
  double max() const;
  /// Dot product with a weight vector in atom order.
  double apply(const std::array<double, kAtomCount>& weights) const;

  ChCoefficients operator+(const ChCoefficients& rhs) const;
};

/// One probability appearing in the inequality, with its sign.
struct InequalityTerm {
  enum class Kind { Joint, AliceSingle, BobSingle };
  Kind kind = Kind::Joint;
  double sign = 1.0;
  int alice_setting = 0;  // k, 0 when unused
  int bob_setting = 0;    // l, 0 when unused
  int alice_outcome = 0;  // a, 0 when unused
  int bob_outcome = 0;    // b, 0 when unused

  /// Whether a deterministic atom contributes to this probability.
  bool covers(const JointAtom& atom) const;
};

/// The twelve joint and four single probabilities of the inequality.
const std::vector<InequalityTerm>& inequality_terms();

/// Left-hand side of the qutrit CH inequality; <= 0 for every local model.
double ch_lhs(const ExperimentProbabilities& exp);

/// Expansion of the inequality over the 81 atoms.
ChCoefficients ch_coefficients();

struct AppendixDecomposition {
  ChCoefficients ch1;
  ChCoefficients ch2;
  ChCoefficients g;
};

/// The two embedded CH inequalities (pairs (2;1) and (1;2)) and the
/// remainder G, each built from its own marginal sums.
AppendixDecomposition appendix_decomposition();

struct ThresholdEstimate {
  double value = 0.0;
  /// False when the inequality is not violated at F = 0.
  bool violated = false;
  /// True when L0 <= L1, so no finite crossing exists and value is clamped to 1.
  bool degenerate = false;
  double lhs_pure = 0.0;
  double lhs_noise = 0.0;
};

/// Noise fraction at which the inequality stops being violated, using the
/// linearity of the left-hand side in F.
ThresholdEstimate analytic_threshold(const ExperimentProbabilities& exp0);

/// Value of the inequality on the point-mass distribution at `atom`.
double deterministic_value(const JointAtom& atom);

/// Experiment probabilities induced by a single deterministic strategy.
ExperimentProbabilities deterministic_experiment(const JointAtom& atom);

}  // namespace qch
