#include "qch/ch_inequality.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qch {

namespace {

InequalityTerm joint(double sign, int k, int l, int a, int b) {
  return {InequalityTerm::Kind::Joint, sign, k, l, a, b};
}
InequalityTerm alice_single(double sign, int k, int a) {
  return {InequalityTerm::Kind::AliceSingle, sign, k, 0, a, 0};
}
InequalityTerm bob_single(double sign, int l, int b) {
  return {InequalityTerm::Kind::BobSingle, sign, 0, l, 0, b};
}

// Adds `sign` to every atom matching the pattern; 0 is a wildcard.
void add_pattern(ChCoefficients& out, double sign, int a1, int a2, int b1, int b2) {
  const auto matches = [](int want, int have) { return want == 0 || want == have; };
  for (const JointAtom& atom : all_atoms()) {
    if (matches(a1, atom.a1) && matches(a2, atom.a2) && matches(b1, atom.b1) &&
        matches(b2, atom.b2)) {
      out[atom] += sign;
    }
  }
}

}  // namespace

JointAtom JointAtom::from_index(std::size_t index) {
  if (index >= kAtomCount) throw std::out_of_range("atom index out of range");
  const int i = static_cast<int>(index);
  return {1 + i % 3, 1 + (i / 3) % 3, 1 + (i / 9) % 3, 1 + (i / 27) % 3};
}

bool JointAtom::is_valid() const {
  const auto ok = [](int v) { return v >= 1 && v <= 3; };
  return ok(a1) && ok(a2) && ok(b1) && ok(b2);
}

const std::array<JointAtom, kAtomCount>& all_atoms() {
  static const std::array<JointAtom, kAtomCount> atoms = [] {
    std::array<JointAtom, kAtomCount> out{};
    for (std::size_t i = 0; i < kAtomCount; ++i) out[i] = JointAtom::from_index(i);
    return out;
  }();
  return atoms;
}

double ChCoefficients::sum() const { return std::accumulate(c.begin(), c.end(), 0.0); }

double ChCoefficients::max() const { return *std::max_element(c.begin(), c.end()); }

double ChCoefficients::apply(const std::array<double, kAtomCount>& weights) const {
  return std::inner_product(c.begin(), c.end(), weights.begin(), 0.0);
}

ChCoefficients ChCoefficients::operator+(const ChCoefficients& rhs) const {
  ChCoefficients out;
  for (std::size_t i = 0; i < kAtomCount; ++i) out.c[i] = c[i] + rhs.c[i];
  return out;
}

bool InequalityTerm::covers(const JointAtom& atom) const {
  switch (kind) {
    case Kind::Joint:
      return atom.alice(alice_setting) == alice_outcome && atom.bob(bob_setting) == bob_outcome;
    case Kind::AliceSingle:
      return atom.alice(alice_setting) == alice_outcome;
    case Kind::BobSingle:
      return atom.bob(bob_setting) == bob_outcome;
  }
  return false;
}

const std::vector<InequalityTerm>& inequality_terms() {
  static const std::vector<InequalityTerm> terms = {
      joint(+1, 1, 1, 2, 1), joint(+1, 1, 2, 2, 1), joint(-1, 2, 1, 2, 1), joint(+1, 2, 2, 2, 1),
      joint(+1, 1, 1, 1, 2), joint(+1, 1, 2, 1, 2), joint(-1, 2, 1, 1, 2), joint(+1, 2, 2, 1, 2),
      // The third group pairs P12 with outcome (1;1), unlike its neighbours.
      joint(+1, 1, 1, 2, 2), joint(+1, 1, 2, 1, 1), joint(-1, 2, 1, 2, 2), joint(+1, 2, 2, 2, 2),
      alice_single(-1, 1, 1), alice_single(-1, 1, 2), bob_single(-1, 2, 1), bob_single(-1, 2, 2),
  };
  return terms;
}

double ch_lhs(const ExperimentProbabilities& exp) {
  const ProbabilityTable& p11 = exp.table(1, 1);
  const ProbabilityTable& p12 = exp.table(1, 2);
  const ProbabilityTable& p21 = exp.table(2, 1);
  const ProbabilityTable& p22 = exp.table(2, 2);
  // Extended precision keeps the exactly representable noise-only value
  // from picking up an extra ulp.
  const long double joint = (long double)p11.at(2, 1) + p12.at(2, 1) - p21.at(2, 1) + p22.at(2, 1)
                          + p11.at(1, 2) + p12.at(1, 2) - p21.at(1, 2) + p22.at(1, 2)
                          + p11.at(2, 2) + p12.at(1, 1) - p21.at(2, 2) + p22.at(2, 2);
  const long double singles = (long double)exp.alice_single(1, 1) + exp.alice_single(1, 2)
                            + exp.bob_single(2, 1) + exp.bob_single(2, 2);
  return static_cast<double>(joint - singles);
}

ChCoefficients ch_coefficients() {
  ChCoefficients out;
  for (const InequalityTerm& term : inequality_terms())
    for (const JointAtom& atom : all_atoms())
      if (term.covers(atom)) out[atom] += term.sign;
  return out;
}

AppendixDecomposition appendix_decomposition() {
  AppendixDecomposition d;

  // CH1: P11(2;1) + P12(2;1) - P21(2;1) + P22(2;1) - P1(2) - Q2(1)
  add_pattern(d.ch1, +1, 2, 0, 1, 0);
  add_pattern(d.ch1, +1, 2, 0, 0, 1);
  add_pattern(d.ch1, -1, 0, 2, 1, 0);
  add_pattern(d.ch1, +1, 0, 2, 0, 1);
  add_pattern(d.ch1, -1, 2, 0, 0, 0);
  add_pattern(d.ch1, -1, 0, 0, 0, 1);

  // CH2: P11(1;2) + P12(1;2) - P21(1;2) + P22(1;2) - P1(1) - Q2(2)
  add_pattern(d.ch2, +1, 1, 0, 2, 0);
  add_pattern(d.ch2, +1, 1, 0, 0, 2);
  add_pattern(d.ch2, -1, 0, 1, 2, 0);
  add_pattern(d.ch2, +1, 0, 1, 0, 2);
  add_pattern(d.ch2, -1, 1, 0, 0, 0);
  add_pattern(d.ch2, -1, 0, 0, 0, 2);

  // G: P11(2;2) + P12(1;1) - P21(2;2) + P22(2;2). The last marginal sums
  // over a1 and b1.
  add_pattern(d.g, +1, 2, 0, 2, 0);
  add_pattern(d.g, +1, 1, 0, 0, 1);
  add_pattern(d.g, -1, 0, 2, 2, 0);
  add_pattern(d.g, +1, 0, 2, 0, 2);
  return d;
}

ThresholdEstimate analytic_threshold(const ExperimentProbabilities& exp0) {
  ThresholdEstimate est;
  est.lhs_pure = ch_lhs(exp0);
  est.lhs_noise = ch_lhs(with_noise(exp0, NoiseParameter(1.0)));
  if (est.lhs_pure <= 0.0) return est;
  est.violated = true;
  const double slope = est.lhs_pure - est.lhs_noise;
  if (slope <= 0.0) {
    est.degenerate = true;
    est.value = 1.0;
    return est;
  }
  est.value = std::clamp(est.lhs_pure / slope, 0.0, 1.0);
  return est;
}

double deterministic_value(const JointAtom& atom) {
  if (!atom.is_valid()) throw std::invalid_argument("atom outcomes must lie in 1..3");
  static const ChCoefficients coefficients = ch_coefficients();
  return coefficients[atom];
}

ExperimentProbabilities deterministic_experiment(const JointAtom& atom) {
  if (!atom.is_valid()) throw std::invalid_argument("atom outcomes must lie in 1..3");
  ExperimentProbabilities exp;
  for (int k = 1; k <= 2; ++k) {
    for (int l = 1; l <= 2; ++l) {
      ProbabilityTable& t = exp.table(k, l);
      t.alice_setting = k;
      t.bob_setting = l;
      t.p[atom.alice(k) - 1][atom.bob(l) - 1] = 1.0;
    }
    exp.alice_singles[k - 1][atom.alice(k) - 1] = 1.0;
    exp.bob_singles[k - 1][atom.bob(k) - 1] = 1.0;
  }
  return exp;
}

}  // namespace qch
