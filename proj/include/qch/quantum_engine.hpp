#pragma once

// Tritter-based trichotomic measurements on the noisy maximally entangled
// two-qutrit state (|11> + |22> + |33>)/sqrt(3).
//
// Index conventions: raw arrays (matrix entries, table cells, singles
// triples) are 0-based. Anything typed as an *outcome* (Permutation images,
// ProbabilityTable::at, JointAtom) uses the physical labels 1, 2, 3.

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace qch {

using Complex = std::complex<double>;
using Triple = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitaryTolerance = 1e-9;

/// The cube root of unity exp(i 2pi/3).
Complex alpha();

struct ComplexMatrix3 {
  std::array<std::array<Complex, 3>, 3> entries{};

  static ComplexMatrix3 identity();

  Complex& operator()(int row, int col) { return entries[row][col]; }
  const Complex& operator()(int row, int col) const { return entries[row][col]; }

  ComplexMatrix3 adjoint() const;
  ComplexMatrix3 operator*(const ComplexMatrix3& rhs) const;

  bool is_finite() const;
  /// Max entrywise deviation of M·M† from the identity.
  double unitarity_defect() const;
  bool is_unitary(double tol = kUnitaryTolerance) const { return unitarity_defect() <= tol; }
};

using PhaseVector = std::array<double, 3>;

/// Outcome relabeling stored as the images of (1, 2, 3).
class Permutation {
 public:
  Permutation() = default;

  /// Throws std::invalid_argument unless `images` is a bijection on {1,2,3}.
  static Permutation from_images(std::array<int, 3> images);
  static Permutation identity() { return {}; }
  /// All six permutations in lexicographic order of their images.
  static const std::array<Permutation, 6>& all();

  /// Maps an outcome in {1,2,3} to its new label.
  int operator()(int outcome) const { return images_[outcome - 1]; }
  /// Same as operator() on 0-based indices.
  int map_index(int index) const { return images_[index] - 1; }

  const std::array<int, 3>& images() const { return images_; }
  Permutation inverse() const;
  /// (this ∘ rhs)(x) = this(rhs(x)).
  Permutation compose(const Permutation& rhs) const;
  bool is_identity() const { return *this == Permutation{}; }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::array<int, 3> images_{1, 2, 3};
};

/// One permutation per observable, ordered A1, A2, B1, B2.
struct Relabeling {
  std::array<Permutation, 4> perms{};

  static Relabeling identity() { return {}; }
  const Permutation& alice(int k) const { return perms[k - 1]; }
  const Permutation& bob(int l) const { return perms[2 + l - 1]; }
  Relabeling inverse() const;
  bool is_identity() const;

  friend bool operator==(const Relabeling&, const Relabeling&) = default;
};

struct PhaseSettings {
  std::array<PhaseVector, 2> alice{};
  std::array<PhaseVector, 2> bob{};
  Relabeling relabel{};
};

/// White-noise admixture F in [0, 1].
class NoiseParameter {
 public:
  constexpr NoiseParameter() = default;
  explicit NoiseParameter(double fraction);

  double fraction() const { return fraction_; }

 private:
  double fraction_ = 0.0;
};

struct ProbabilityTable {
  /// p[a][b], 0-based outcome indices.
  std::array<Triple, 3> p{};
  int alice_setting = 1;
  int bob_setting = 1;

  /// 1-based outcome access, matching the usual P(a;b) notation.
  double at(int a, int b) const { return p[a - 1][b - 1]; }
  double total() const;
};

struct ExperimentProbabilities {
  /// Ordered 11, 12, 21, 22.
  std::array<ProbabilityTable, 4> tables{};
  std::array<Triple, 2> alice_singles{};
  std::array<Triple, 2> bob_singles{};

  ProbabilityTable& table(int k, int l) { return tables[2 * (k - 1) + (l - 1)]; }
  const ProbabilityTable& table(int k, int l) const { return tables[2 * (k - 1) + (l - 1)]; }
  /// 1-based outcome accessors.
  double alice_single(int k, int a) const { return alice_singles[k - 1][a - 1]; }
  double bob_single(int l, int b) const { return bob_singles[l - 1][b - 1]; }

  /// Describes the first violated invariant (non-negativity, normalization,
  /// no-signaling consistency), or nullopt when all hold within `tol`.
  std::optional<std::string> check_invariants(double tol = 1e-10) const;
};

/// Tritter transition matrix T[k][l] = alpha^(k l) / sqrt(3) (0-based k, l).
ComplexMatrix3 tritter_matrix();

/// Tritter preceded by phase shifters: column l of T multiplied by exp(i phi_l).
ComplexMatrix3 observable_unitary(const PhaseVector& phases);

/// Joint outcome distribution of the noisy entangled state measured with
/// `ua` on Alice's side and `ub` on Bob's. Throws std::invalid_argument for
/// non-unitary inputs.
ProbabilityTable joint_table(const ComplexMatrix3& ua, const ComplexMatrix3& ub,
                             NoiseParameter noise, int alice_setting = 1, int bob_setting = 1);

/// Single-party outcome distribution, computed from the reduced state.
Triple singles(const ComplexMatrix3& u);

ExperimentProbabilities apply_relabeling(const ExperimentProbabilities& exp,
                                         const Relabeling& relabel);

/// Joint tables with noise F, i.e. (1-F)·p + F/9. Singles are unchanged.
ExperimentProbabilities with_noise(const ExperimentProbabilities& exp, NoiseParameter noise);

ExperimentProbabilities experiment_probabilities(const PhaseSettings& settings,
                                                 NoiseParameter noise);

/// First relabeling (lexicographic over the 6^4 tuples) that maps every
/// table of `computed` onto `target` within `tol`.
std::optional<Relabeling> find_matching_relabeling(const ExperimentProbabilities& computed,
                                                   const ExperimentProbabilities& target,
                                                   double tol = 1e-9);

/// All 1296 relabelings in lexicographic order.
const std::array<Relabeling, 1296>& all_relabelings();

/// Phases phi1 = (0, pi/3, -pi/3), phi2 = 0, theta1 = (0, pi/6, -pi/6),
/// theta2 = (0, -pi/6, pi/6) with identity relabeling.
PhaseSettings paper_phases();

/// paper_phases() plus the outcome relabeling that reproduces the published
/// probability tables. Found once with find_matching_relabeling and frozen.
PhaseSettings paper_preset();

}  // namespace qch
