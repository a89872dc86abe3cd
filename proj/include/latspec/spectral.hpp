#pragma once

#include "latspec/cyclotomic.hpp"
#include "latspec/systems.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace latspec {

/// A mass that is either an exact rational or a certified enclosure.
struct Weight {
  std::optional<Rational> exact;
  double lower = 0;
  double upper = 0;

  static Weight of(const Rational& q);
  static Weight enclosure(double lower, double upper);
  bool is_exact() const { return exact.has_value(); }
  bool contains(double x) const { return lower <= x && x <= upper; }
  Weight scaled(const Rational& factor) const;
  std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Finite systems

/// One character t of A (t_i mod d_i, pairing sum t_i a_i / d_i) and its
/// weight |hat 1_B(t)|^2 = scale * W_t(zeta_e), W_t = sum_c R(c) x^<t,c>.
struct FiniteAtom {
  std::vector<Int> character;
  std::vector<std::int64_t> poly;  // W_t in Z[x]/(x^e - 1)
  Weight weight;
};

class FiniteSpectralMeasure {
 public:
  FiniteSpectralMeasure(const FiniteSystem& sys, const FiniteSet& set);

  const FiniteSystem& system() const { return sys_; }
  const FiniteSet& set() const { return set_; }
  std::uint64_t exponent() const { return e_; }
  bool is_normalized() const { return normalized_; }
  /// Characters in mixed-radix order, the trivial character first.
  const std::vector<FiniteAtom>& atoms() const { return atoms_; }
  /// |B cap (B + c)| for every c.
  const std::vector<std::uint64_t>& autocorrelation() const { return autocorr_; }

  /// Exact subgroup masses, summed over atoms in the cyclotomic ring.
  Rational trivial_weight() const;
  Rational total_mass() const;
  /// Mass of { t : <t, phi(lambda)> = 0 }; lambda = 0 gives the total.
  Rational annihilator_mass(const LatVec& lambda) const;
  /// All characters of a finite system are rational.
  Rational rational_mass_excluding_trivial() const;
  /// sum_t w_t chi_t(g), exactly; throws HardFailure when it is not rational.
  Rational character_sum(FiniteSystem::Element g) const;

  /// Weights divided by the trivial weight.
  FiniteSpectralMeasure normalized() const;

 private:
  Rational atom_sum(const std::vector<std::int64_t>& poly) const;
  std::uint64_t pairing(std::size_t t, FiniteSystem::Element a) const;

  FiniteSystem sys_;
  FiniteSet set_;
  std::uint64_t e_ = 1;
  std::shared_ptr<const CyclotomicField> field_;
  std::vector<std::uint64_t> autocorr_;
  std::vector<FiniteAtom> atoms_;
  Rational base_ = 1;    // 1 / |A|^2
  Rational factor_ = 1;  // 1, or 1 / trivial weight after normalization
  bool normalized_ = false;
};

FiniteSpectralMeasure spectral_measure(const FiniteSystem& sys, const FiniteSet& set);

/// sum over cosets C of <phi(lambda)> of (|C|/|A|) (|B cap C| / |C|)^2.
Rational coset_annihilator_mass(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda);

struct BochnerVerdict {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<LatVec> violations;
};

/// mu(B cap lambda.B) (times the normalization factor) equals the character
/// sum, exactly, for every lambda given.
BochnerVerdict verify_bochner(const FiniteSpectralMeasure& sigma, std::span<const LatVec> lambdas);

struct ExpansionCheck {
  Rational annihilator_mass;  // normalized mass of L_lambda^perp
  Rational bound;             // 1 / annihilator_mass
  Rational measured;          // mu(S lambda.B)
  bool holds = true;
  bool tight = false;
};

/// mu(S lambda.B) >= 1 / normalized sigma_B(L_lambda^perp); a violation is a
/// HardFailure. S must be ergodic and B non-null.
ExpansionCheck expansion_bound_check(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                     const ErgodicSetSpec& spec = ErgodicSetSpec::integers());

// ---------------------------------------------------------------------------
// Torus rotations

struct TorusAtom {
  std::vector<Int> frequency;  // k in Z^s
  Weight weight;
  bool exact_zero = false;
};

class KroneckerSpectralMeasure {
 public:
  /// Atoms for |k|_inf <= radius, ordered by shell then lexicographically.
  KroneckerSpectralMeasure(const KroneckerSystem& sys, const BoxSet& set, std::size_t radius);

  const KroneckerSystem& system() const { return sys_; }
  const BoxSet& set() const { return set_; }
  std::size_t radius() const { return radius_; }
  const std::vector<TorusAtom>& atoms() const { return atoms_; }
  const Rational& set_measure() const { return mu_; }
  bool is_normalized() const { return normalized_; }
  const Rational& factor() const { return factor_; }

  Weight trivial_weight() const;
  Weight total_mass() const;
  /// Upper bound on the mass outside the enumerated atoms.
  double tail_bound() const;
  Weight annihilator_mass(const LatVec& lambda) const;
  Weight rational_mass_excluding_trivial() const;

  KroneckerSpectralMeasure normalized() const;

 private:
  KroneckerSystem sys_;
  BoxSet set_;
  std::size_t radius_;
  Rational mu_;
  Rational factor_ = 1;
  bool normalized_ = false;
  std::vector<TorusAtom> atoms_;
  double lower_sum_ = 0;           // raw, unnormalized
  std::vector<double> raw_lower_;  // per atom, unnormalized
};

KroneckerSpectralMeasure spectral_measure_kronecker(const KroneckerSystem& sys, const BoxSet& set,
                                                    std::size_t radius = 64);

/// The part of a (normalized) measure carried by irrational characters.
struct IrrationalPart {
  const KroneckerSystem* system = nullptr;  // null: the zero measure
  std::vector<TorusAtom> atoms;
  double tail_upper = 0;
  Rational total_upper = 0;  // bound on the total mass
};

IrrationalPart irrational_part(const KroneckerSpectralMeasure& normalized);

struct AnnihilatorSearch {
  std::size_t index = 0;  // 0-based sample index
  LatVec lambda;
  double mass_upper = 0;
  bool exact_zero = false;
  std::uint64_t required_length = 0;
};

/// First sample element with tau(L_lambda^perp) < delta within the scan length
/// floor(r tau(total) / delta) + 1. A short sample is an Error; no hit within
/// the scan is a HardFailure.
AnnihilatorSearch haystack_annihilator_search(const IrrationalPart& tau, std::span<const LatVec> sample,
                                              const Rational& delta);

struct SmallIntersection {
  enum class Kind { Index, Violation, None };
  Kind kind = Kind::None;
  std::size_t index = 0;              // 1-based, when kind == Index
  std::vector<std::size_t> violation;  // 1-based, when kind == Violation
  Rational measure = 0;               // nu(A_index) or nu(intersection)
};

/// Either the first n with nu(A_n) < p nu(Y) / N, or the least p-subset whose
/// intersection has positive measure.
SmallIntersection small_intersection_bound(std::span<const Rational> weights, std::span<const FiniteSet> sets,
                                           std::size_t p);

struct TheoremCheck {
  enum class Status { Verified, Refused, Failed };
  Status status = Status::Refused;
  std::string reason;
  Weight rational_mass;
  Rational delta = 0;
  std::size_t haystack_index = 0;
  LatVec lambda;
  std::vector<Weight> measured;  // one per ergodic set
  bool estimate = false;
};

TheoremCheck directional_expansion_theorem_check(const FiniteSystem& sys, const FiniteSet& set,
                                                 const Rational& eps_o, const Rational& eps,
                                                 std::span<const LatVec> haystack,
                                                 std::span<const ErgodicSetSpec> sets);

TheoremCheck directional_expansion_theorem_check(const KroneckerSystem& sys, const BoxSet& set,
                                                 const Rational& eps_o, const Rational& eps,
                                                 std::span<const LatVec> haystack,
                                                 std::span<const ErgodicSetSpec> sets,
                                                 std::size_t radius = 64, std::size_t translates = 64);

struct ShrinkResult {
  Int n;                                    // gcd(m!, exponent)
  std::uint64_t m = 0;                      // factorial index reached
  std::vector<ErgodicComponent> components;  // decomposition under Lambda(n)
  std::size_t component_index = 0;
  Rational nu_b;                            // nu(B)
  Rational rational_mass;                   // normalized sigma_{nu,B}(rat \ {1}) = 1/nu(B) - 1
  Rational rho;                             // normalized sigma_{mu,B} of characters nontrivial on Lambda(n)
  Rational c;                               // min weight over components meeting B
  const ErgodicComponent& component() const { return components[component_index]; }
};

ShrinkResult shrink_rational_spectrum(const FiniteSystem& sys, const FiniteSet& set, const Rational& eps_o);

struct ShrinkCheck {
  bool rational_mass_ok = true;   // 1/nu(B) - 1 < eps_o, recomputed from the component
  bool component_ok = true;       // nu(B) >= 1/3 or mu(B) < 3 nu(B)
  bool intersections_ok = true;   // mu(cap_F lambda.B) >= c nu(cap_F lambda.B)
  std::size_t samples = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Recomputes the three conclusions of a shrink result, the component being a
/// coset of n A and c being the least weight of a component meeting B. The
/// intersection inequality is tested on `samples` random F of 1 to 3 elements
/// of n Z^r with coordinates in [-5n, 5n], drawn from mt19937_64(seed).
ShrinkCheck verify_shrink(const FiniteSystem& sys, const FiniteSet& set, const Rational& eps_o,
                          const ShrinkResult& result, std::size_t samples, std::uint64_t seed);

struct IntersectionWitness {
  std::vector<LatVec> probe;  // lambda_2, ..., lambda_p
  std::vector<Int> m;         // m_2, ..., m_p
  FiniteSystem::Element point = 0;
  Rational measure;
};

struct IntersectionResult {
  Int n;
  LatVec lambda;
  std::size_t haystack_index = 0;
  Int m1;
  Rational eps_o, eps;
  ShrinkResult shrink;
  std::vector<IntersectionWitness> witnesses;
};

/// Exact mu(B cap m1 n lambda.B cap (m_k n lambda + n lambda_k).B ...).
Rational intersection_measure(const FiniteSystem& sys, const FiniteSet& set, const Int& n, const LatVec& lambda,
                              const Int& m1, const IntersectionWitness& witness);

IntersectionResult intersection_theorem_search(const FiniteSystem& sys, const FiniteSet& set, std::size_t p,
                                               std::span<const LatVec> haystack, const ErgodicSetSpec& spec,
                                               std::span<const std::vector<LatVec>> probes);

}  // namespace latspec
