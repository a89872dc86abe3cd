#pragma once

#include "latspec/formal_real.hpp"
#include "latspec/lattice.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace latspec {

/// An ergodic set S of integers together with its exhausting sequence S_N.
///   Integers:    S = Z,                S_N enumerates 0, 1, -1, 2, -2, ...
///   Interval:    S = {0, 1, 2, ...},   S_N = [0, N)
///   Progression: S = a + b * {0, 1, ...}, S_N = a + b * [0, N)
struct ErgodicSetSpec {
  enum class Kind { Integers, Interval, Progression };
  Kind kind = Kind::Integers;
  Int offset = 0;  // a
  Int step = 1;    // b

  static ErgodicSetSpec integers() { return {}; }
  static ErgodicSetSpec interval() { return {Kind::Interval, 0, 1}; }
  static ErgodicSetSpec progression(Int a, Int b);

  /// The i-th member of S in enumeration order (i >= 0).
  Int member(std::uint64_t i) const;
  /// Ergodic sets in the averaging sense: Z, N and progressions with |b| = 1.
  bool is_ergodic() const;
  std::string describe() const;
};

/// Finite abelian group A = Z/d_1 x ... x Z/d_k with a surjection phi: Z^r -> A.
/// Elements are mixed-radix indices, first coordinate most significant.
class FiniteSystem {
 public:
  using Element = std::size_t;

  /// Z^r / L with the projection given by the Smith form of L.
  static FiniteSystem from_sublattice(const SubLattice& lattice);
  /// images[j] is phi(e_j) as residues modulo `moduli`; phi must be onto.
  static FiniteSystem from_action(std::vector<Int> moduli, std::vector<std::vector<Int>> images);

  std::size_t rank() const { return images_.size(); }
  /// Cyclic factors of A (factors equal to 1 are dropped).
  const std::vector<Int>& moduli() const { return moduli_; }
  std::size_t size() const { return size_; }
  /// Least common multiple of the moduli.
  const Int& exponent() const { return exponent_; }
  const std::vector<Element>& generator_images() const { return images_; }
  /// Kernel of phi, when the system was built from a sublattice.
  const std::optional<SubLattice>& kernel() const { return kernel_; }

  std::vector<Int> decode(Element a) const;
  Element encode(std::span<const Int> residues) const;

  Element zero() const { return 0; }
  Element add(Element a, Element b) const;
  Element negate(Element a) const;
  Element multiply(const Int& k, Element a) const;
  Element phi(const LatVec& v) const;

  std::uint64_t order(Element a) const;
  /// Sorted elements of the subgroup generated by `generators`.
  std::vector<Element> subgroup(std::span<const Element> generators) const;

  std::string describe() const;

 private:
  std::vector<Int> moduli_;
  std::vector<std::uint64_t> small_moduli_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
  Int exponent_ = 1;
  std::vector<Element> images_;
  std::optional<SubLattice> kernel_;
};

/// Indicator of a subset of A.
using FiniteSet = std::vector<bool>;

FiniteSet make_set(const FiniteSystem& sys, std::span<const FiniteSystem::Element> elements);
FiniteSet full_set(const FiniteSystem& sys);
std::size_t count(const FiniteSet& set);
Rational measure(const FiniteSystem& sys, const FiniteSet& set);
/// g + B.
FiniteSet translate(const FiniteSystem& sys, const FiniteSet& set, FiniteSystem::Element g);
FiniteSet intersect(const FiniteSet& a, const FiniteSet& b);
/// mu(B intersected with (g + B) for every g in `shifts`).
Rational intersection_measure(const FiniteSystem& sys, const FiniteSet& set,
                              std::span<const FiniteSystem::Element> shifts);

struct SaturationResult {
  FiniteSet set;
  Rational measure;
};

/// Union of (m lambda).B over m in S, or over the first `horizon` members of S.
SaturationResult orbit_saturation(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                  const ErgodicSetSpec& spec = ErgodicSetSpec::integers(),
                                  std::optional<std::uint64_t> horizon = std::nullopt);

/// phi(lambda) generates A.
bool is_ergodic_direction(const FiniteSystem& sys, const LatVec& lambda);

struct ExpansionMaximum {
  Rational measure;
  LatVec argmax;
};

/// Largest mu(Z lambda.B) over candidates, ties going to the least lambda.
ExpansionMaximum max_directional_expansion(const FiniteSystem& sys, const FiniteSet& set,
                                           std::span<const LatVec> candidates);

/// Nonzero vectors of [-radius, radius]^rank in lexicographic order.
std::vector<LatVec> candidate_box(std::size_t rank, std::int64_t radius);

struct ErgodicComponent {
  std::vector<FiniteSystem::Element> support;  // one coset of phi(L), sorted
  Rational weight;                             // |support| / |A|
};

/// Cosets of phi(L), ordered by their least element.
std::vector<ErgodicComponent> ergodic_components(const FiniteSystem& sys, const SubLattice& lattice);
/// Same decomposition under the subgroup n * A = phi(n Z^r).
std::vector<ErgodicComponent> ergodic_components_scaled(const FiniteSystem& sys, const Int& n);

/// nu(B) for the normalized counting measure on a component.
Rational component_measure(const ErgodicComponent& component, const FiniteSet& set);

/// (1/n) sum_{k<n} mu(B cap (k lambda).B).
Rational birkhoff_annihilator_average(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                      std::uint64_t horizon);

// ---------------------------------------------------------------------------
// Torus rotations

/// Half-open box prod [lower_i, upper_i) inside [0,1)^s.
struct Box {
  std::vector<Rational> lower;
  std::vector<Rational> upper;

  Rational volume() const;
};

/// Disjoint union of boxes.
struct BoxSet {
  std::size_t dim = 0;
  std::vector<Box> boxes;

  static BoxSet full(std::size_t dim);
  /// Validates bounds and pairwise disjointness.
  static BoxSet from_boxes(std::size_t dim, std::vector<Box> boxes);
  Rational measure() const;
};

/// Basis (as columns) of { k in Z^s : sum_i k_i v_i[c] is an integer for every c }.
/// `columns[c][i]` is the i-th entry of the c-th vector. Empty when only k = 0.
std::vector<LatVec> integral_lattice(std::size_t s, std::span<const std::vector<FormalReal>> columns);

/// x -> x + Theta lambda (mod 1) on the s-torus.
class KroneckerSystem {
 public:
  /// theta is s x r; every symbol used must have a numeric value.
  KroneckerSystem(std::size_t rank, std::vector<std::vector<FormalReal>> theta,
                  std::map<std::string, double> symbol_values);

  std::size_t rank() const { return rank_; }
  std::size_t torus_dim() const { return theta_.size(); }
  const std::vector<std::vector<FormalReal>>& theta() const { return theta_; }
  const std::map<std::string, double>& symbol_values() const { return symbols_; }

  /// Theta lambda.
  std::vector<FormalReal> frequency(const LatVec& lambda) const;
  /// k^T Theta lambda.
  FormalReal pairing(std::span<const Int> k, const LatVec& lambda) const;

  /// No nonzero k has k^T Theta integral. The decision is exact.
  bool is_ergodic() const;
  /// A nonzero k with k^T Theta integral, when one exists.
  std::optional<LatVec> non_ergodicity_witness() const;
  /// { k : k^T Theta lambda in Z }, as basis columns (empty for {0}).
  std::vector<LatVec> annihilating_lattice(const LatVec& lambda) const;
  /// { k : k^T Theta has only rational entries }.
  std::vector<LatVec> rational_lattice() const;
  /// xi_k is trivial on every lambda.
  bool is_trivial_character(std::span<const Int> k) const;
  bool is_rational_character(std::span<const Int> k) const;

  std::string describe() const;

 private:
  std::size_t rank_;
  std::vector<std::vector<FormalReal>> theta_;
  std::map<std::string, double> symbols_;
};

bool is_ergodic_direction(const KroneckerSystem& sys, const LatVec& lambda);

struct SaturationEstimate {
  double measure = 0;        // measure of the union of the translates used
  std::size_t translates = 0;
  bool estimate = true;
};

/// Lower estimate of mu(S lambda.B): measure of the union of the first
/// `translates` sets (m lambda).B, m in S order, stopping early at measure 1.
SaturationEstimate orbit_saturation(const KroneckerSystem& sys, const BoxSet& set, const LatVec& lambda,
                                    const ErgodicSetSpec& spec = ErgodicSetSpec::integers(),
                                    std::size_t translates = 64);

}  // namespace latspec
