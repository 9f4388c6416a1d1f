#include "qch/quantum_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qch {

namespace {

constexpr double kClampSlack = 1e-12;

double clamp_probability(double p) {
  if (p < -kClampSlack || p > 1.0 + kClampSlack || !std::isfinite(p)) {
    throw std::logic_error("probability out of range: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

void require_unitary(const ComplexMatrix3& u, const char* what) {
  if (!u.is_finite() || !u.is_unitary()) {
    throw std::invalid_argument(std::string(what) + " is not unitary");
  }
}

std::array<Relabeling, 1296> enumerate_relabelings() {
  std::array<Relabeling, 1296> out{};
  const auto& perms = Permutation::all();
  std::size_t n = 0;
  for (const auto& pa1 : perms)
    for (const auto& pa2 : perms)
      for (const auto& pb1 : perms)
        for (const auto& pb2 : perms) out[n++] = Relabeling{{pa1, pa2, pb1, pb2}};
  return out;
}

}  // namespace

Complex alpha() { return std::polar(1.0, 2.0 * kPi / 3.0); }

ComplexMatrix3 ComplexMatrix3::identity() {
  ComplexMatrix3 m;
  for (int i = 0; i < 3; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix3 ComplexMatrix3::adjoint() const {
  ComplexMatrix3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = std::conj((*this)(j, i));
  return out;
}

ComplexMatrix3 ComplexMatrix3::operator*(const ComplexMatrix3& rhs) const {
  ComplexMatrix3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Complex s = 0.0;
      for (int m = 0; m < 3; ++m) s += (*this)(i, m) * rhs(m, j);
      out(i, j) = s;
    }
  return out;
}

bool ComplexMatrix3::is_finite() const {
  for (const auto& row : entries)
    for (const auto& z : row)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

double ComplexMatrix3::unitarity_defect() const {
  const ComplexMatrix3 prod = (*this) * adjoint();
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Complex expected = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(prod(i, j) - expected));
    }
  return worst;
}

Permutation Permutation::from_images(std::array<int, 3> images) {
  std::array<bool, 3> seen{};
  for (int v : images) {
    if (v < 1 || v > 3 || seen[v - 1]) {
      throw std::invalid_argument("relabeling is not a permutation of 1,2,3");
    }
    seen[v - 1] = true;
  }
  Permutation p;
  p.images_ = images;
  return p;
}

const std::array<Permutation, 6>& Permutation::all() {
  static const std::array<Permutation, 6> perms = [] {
    std::array<Permutation, 6> out{};
    std::array<int, 3> images{1, 2, 3};
    std::size_t n = 0;
    do {
      out[n++] = from_images(images);
    } while (std::next_permutation(images.begin(), images.end()));
    return out;
  }();
  return perms;
}

Permutation Permutation::inverse() const {
  std::array<int, 3> inv{};
  for (int x = 1; x <= 3; ++x) inv[(*this)(x) - 1] = x;
  return from_images(inv);
}

Permutation Permutation::compose(const Permutation& rhs) const {
  std::array<int, 3> out{};
  for (int x = 1; x <= 3; ++x) out[x - 1] = (*this)(rhs(x));
  return from_images(out);
}

Relabeling Relabeling::inverse() const {
  Relabeling out;
  for (std::size_t i = 0; i < perms.size(); ++i) out.perms[i] = perms[i].inverse();
  return out;
}

bool Relabeling::is_identity() const {
  return std::all_of(perms.begin(), perms.end(), [](const Permutation& p) { return p.is_identity(); });
}

NoiseParameter::NoiseParameter(double fraction) : fraction_(fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("noise fraction must lie in [0, 1]");
  }
}

double ProbabilityTable::total() const {
  double s = 0.0;
  for (const auto& row : p) s += std::accumulate(row.begin(), row.end(), 0.0);
  return s;
}

std::optional<std::string> ExperimentProbabilities::check_invariants(double tol) const {
  auto label = [](int k, int l) { return std::to_string(k) + std::to_string(l); };
  for (int k = 1; k <= 2; ++k) {
    for (int l = 1; l <= 2; ++l) {
      const ProbabilityTable& t = table(k, l);
      for (const auto& row : t.p)
        for (double v : row)
          if (!(v >= -tol)) return "table " + label(k, l) + " has a negative entry";
      if (std::abs(t.total() - 1.0) > tol) return "table " + label(k, l) + " does not sum to 1";
      for (int i = 0; i < 3; ++i) {
        const double row = t.p[i][0] + t.p[i][1] + t.p[i][2];
        const double col = t.p[0][i] + t.p[1][i] + t.p[2][i];
        if (std::abs(row - alice_singles[k - 1][i]) > tol)
          return "row sums of table " + label(k, l) + " disagree with alice singles";
        if (std::abs(col - bob_singles[l - 1][i]) > tol)
          return "column sums of table " + label(k, l) + " disagree with bob singles";
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    const auto sum = [](const Triple& t) { return t[0] + t[1] + t[2]; };
    if (std::abs(sum(alice_singles[s]) - 1.0) > tol) return "alice singles do not sum to 1";
    if (std::abs(sum(bob_singles[s]) - 1.0) > tol) return "bob singles do not sum to 1";
  }
  return std::nullopt;
}

ComplexMatrix3 tritter_matrix() {
  const double scale = 1.0 / std::sqrt(3.0);
  ComplexMatrix3 t;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      // alpha^(k l) depends only on k l mod 3; polar() of the reduced angle
      // keeps the entries as exact as double allows.
      t(k, l) = scale * std::polar(1.0, 2.0 * kPi * ((k * l) % 3) / 3.0);
    }
  return t;
}

ComplexMatrix3 observable_unitary(const PhaseVector& phases) {
  ComplexMatrix3 u = tritter_matrix();
  for (int l = 0; l < 3; ++l) {
    if (phases[l] == 0.0) continue;
    const Complex shift = std::polar(1.0, phases[l]);
    for (int k = 0; k < 3; ++k) u(k, l) *= shift;
  }
  return u;
}

ProbabilityTable joint_table(const ComplexMatrix3& ua, const ComplexMatrix3& ub,
                             NoiseParameter noise, int alice_setting, int bob_setting) {
  require_unitary(ua, "alice unitary");
  require_unitary(ub, "bob unitary");
  const double f = noise.fraction();
  const double scale = 1.0 / std::sqrt(3.0);
  ProbabilityTable t;
  t.alice_setting = alice_setting;
  t.bob_setting = bob_setting;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      // <a|<b| (Ua ⊗ Ub) sum_m |m m> / sqrt(3)
      Complex amp = 0.0;
      for (int m = 0; m < 3; ++m) amp += ua(a, m) * ub(b, m);
      amp *= scale;
      t.p[a][b] = clamp_probability((1.0 - f) * std::norm(amp) + f / 9.0);
    }
  return t;
}

Triple singles(const ComplexMatrix3& u) {
  require_unitary(u, "unitary");
  // Tr[(Pi_a ⊗ I)(U ⊗ I)|psi><psi|(U ⊗ I)†] = (U (I/3) U†)_aa
  // Dividing by the Frobenius norm squared (3 for a unitary) instead of 3
  // cancels the rounding in the entries' magnitudes.
  std::array<long double, 3> rows{};
  long double total = 0.0L;
  for (int a = 0; a < 3; ++a) {
    for (int m = 0; m < 3; ++m) rows[a] += std::norm(std::complex<long double>(u(a, m)));
    total += rows[a];
  }
  Triple out{};
  for (int a = 0; a < 3; ++a) out[a] = clamp_probability(static_cast<double>(rows[a] / total));
  return out;
}

ExperimentProbabilities apply_relabeling(const ExperimentProbabilities& exp,
                                         const Relabeling& relabel) {
  ExperimentProbabilities out = exp;
  for (int k = 1; k <= 2; ++k) {
    for (int l = 1; l <= 2; ++l) {
      const Permutation& pa = relabel.alice(k);
      const Permutation& pb = relabel.bob(l);
      const ProbabilityTable& src = exp.table(k, l);
      ProbabilityTable& dst = out.table(k, l);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) dst.p[pa.map_index(a)][pb.map_index(b)] = src.p[a][b];
    }
  }
  for (int s = 1; s <= 2; ++s) {
    for (int x = 0; x < 3; ++x) {
      out.alice_singles[s - 1][relabel.alice(s).map_index(x)] = exp.alice_singles[s - 1][x];
      out.bob_singles[s - 1][relabel.bob(s).map_index(x)] = exp.bob_singles[s - 1][x];
    }
  }
  return out;
}

ExperimentProbabilities with_noise(const ExperimentProbabilities& exp, NoiseParameter noise) {
  const double f = noise.fraction();
  ExperimentProbabilities out = exp;
  for (auto& t : out.tables)
    for (auto& row : t.p)
      for (double& v : row) v = clamp_probability((1.0 - f) * v + f / 9.0);
  return out;
}

ExperimentProbabilities experiment_probabilities(const PhaseSettings& settings,
                                                 NoiseParameter noise) {
  const std::array<ComplexMatrix3, 2> ua{observable_unitary(settings.alice[0]),
                                         observable_unitary(settings.alice[1])};
  const std::array<ComplexMatrix3, 2> ub{observable_unitary(settings.bob[0]),
                                         observable_unitary(settings.bob[1])};
  ExperimentProbabilities exp;
  for (int k = 1; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l) exp.table(k, l) = joint_table(ua[k - 1], ub[l - 1], noise, k, l);
  for (int s = 0; s < 2; ++s) {
    exp.alice_singles[s] = singles(ua[s]);
    exp.bob_singles[s] = singles(ub[s]);
  }
  if (settings.relabel.is_identity()) return exp;
  return apply_relabeling(exp, settings.relabel);
}

const std::array<Relabeling, 1296>& all_relabelings() {
  static const std::array<Relabeling, 1296> table = enumerate_relabelings();
  return table;
}

std::optional<Relabeling> find_matching_relabeling(const ExperimentProbabilities& computed,
                                                   const ExperimentProbabilities& target,
                                                   double tol) {
  for (const Relabeling& r : all_relabelings()) {
    const ExperimentProbabilities candidate = apply_relabeling(computed, r);
    bool match = true;
    for (std::size_t t = 0; t < 4 && match; ++t)
      for (int a = 0; a < 3 && match; ++a)
        for (int b = 0; b < 3 && match; ++b)
          match = std::abs(candidate.tables[t].p[a][b] - target.tables[t].p[a][b]) <= tol;
    if (match) return r;
  }
  return std::nullopt;
}

PhaseSettings paper_phases() {
  PhaseSettings s;
  s.alice = {PhaseVector{0.0, kPi / 3.0, -kPi / 3.0}, PhaseVector{0.0, 0.0, 0.0}};
  s.bob = {PhaseVector{0.0, kPi / 6.0, -kPi / 6.0}, PhaseVector{0.0, -kPi / 6.0, kPi / 6.0}};
  return s;
}

PhaseSettings paper_preset() {
  PhaseSettings s = paper_phases();
  s.relabel = Relabeling{{Permutation::from_images({1, 3, 2}), Permutation::from_images({1, 3, 2}),
                          Permutation::from_images({1, 3, 2}), Permutation::from_images({2, 1, 3})}};
  return s;
}

}  // namespace qch
