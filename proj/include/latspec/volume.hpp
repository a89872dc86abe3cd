#pragma once

#include "latspec/lattice.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace latspec {

/// Portable 64-bit mixer (the SplitMix64 finalizer).
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Deterministic description of a subset of Z^r. Membership is defined on all
/// of Z^r; a PointSet restricts it to a window.
///
/// Random sets are counter-based: a point v belongs iff hash(seed, v) <
/// floor(density * 2^64), where hash folds the coordinates through
/// splitmix64_mix (see README). Membership of a point therefore does not
/// depend on the window it is enumerated in.
struct PointGenerator {
  enum class Kind { Explicit, Congruence, Random, Union, Intersection, Translate };

  Kind kind = Kind::Explicit;
  std::size_t rank = 0;
  std::vector<LatVec> points;  // Explicit, kept sorted
  LatVec offset;               // Congruence offset, Translate shift
  Int modulus = 1;             // Congruence
  Rational density = 0;        // Random
  std::uint64_t seed = 0;      // Random
  std::vector<PointGenerator> children;

  static PointGenerator explicit_points(std::size_t rank, std::vector<LatVec> points);
  /// offset + modulus * Z^r
  static PointGenerator congruence(LatVec offset, Int modulus);
  static PointGenerator full(std::size_t rank);
  static PointGenerator random(std::size_t rank, Rational density, std::uint64_t seed);
  static PointGenerator union_of(std::vector<PointGenerator> children);
  static PointGenerator intersection_of(std::vector<PointGenerator> children);
  static PointGenerator translate(PointGenerator child, LatVec shift);

  bool contains(const LatVec& v) const;
};

/// Finite set E inside the box [-window, window]^r.
class PointSet {
 public:
  PointSet(std::size_t rank, std::vector<LatVec> points, std::optional<Int> window = std::nullopt);
  static PointSet from_generator(const PointGenerator& generator, std::int64_t window);

  std::size_t rank() const { return rank_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<LatVec>& points() const { return points_; }
  const Int& window() const { return window_; }
  const std::optional<PointGenerator>& generator() const { return generator_; }

  bool contains(const LatVec& v) const;

 private:
  std::size_t rank_ = 0;
  std::vector<LatVec> points_;
  Int window_ = 0;
  std::optional<PointGenerator> generator_;
};

struct SimplexRecord {
  std::vector<LatVec> vertices;  // v_0, ..., v_r
  Int det;                       // det(v_1 - v_0, ..., v_r - v_0) = r! * signed volume
};

/// det(v_1 - v_0, ..., v_r - v_0) for r + 1 vertices of rank r.
Int simplex_det(std::span<const LatVec> vertices);
SimplexRecord make_simplex(std::vector<LatVec> vertices);

/// Sorted distinct nonzero |D| over all (r+1)-subsets of E, optionally capped.
std::vector<Int> volume_spectrum(const PointSet& set, std::optional<Int> cap = std::nullopt,
                                 unsigned threads = 1);

/// For each target |D|, the lexicographically first simplex (by sorted point
/// indices) realizing it. Targets that do not occur are absent from the result.
std::vector<std::pair<Int, SimplexRecord>> find_simplices(const PointSet& set,
                                                          std::span<const Int> targets);

struct ApCertificate {
  bool found = false;
  Int n = 0;
  std::uint64_t terms = 0;                 // M
  std::vector<SimplexRecord> witnesses;    // witnesses[m-1] has |det| = n*m
  Int spectrum_gcd = 0;
  // Failure report.
  Int best_candidate = 0;
  std::vector<std::uint64_t> missing;
  std::string failure;
};

/// Smallest n with n*m in the volume spectrum for all m = 1..M.
ApCertificate ap_certificate(const PointSet& set, std::uint64_t terms, unsigned threads = 1);

struct PatternBounds {
  Int max_n = 6;
  /// Candidate directions; when empty the standard basis followed by a
  /// standard haystack sample (multipliers 2, 3, ..., r + 1) is used.
  std::vector<LatVec> lambdas;
  std::size_t haystack_count = 6;
  Int max_m1 = 6;
  Int max_mk = 6;
};

struct PatternWitness {
  Int n;
  LatVec lambda;
  Int m1;
  LatVec lambda_o;
  std::vector<LatVec> probe;  // lambda_2, ..., lambda_p
  std::vector<Int> m;         // m_2, ..., m_p
  bool all_positive = true;   // whether every m_k came out positive

  /// lambda_o, lambda_o + m1 n lambda, lambda_o + m_k n lambda + n lambda_k.
  std::vector<LatVec> points() const;
};

struct PatternSearchResult {
  enum class Status { Found, Exhausted, InvalidProbe };
  Status status = Status::Exhausted;
  std::vector<PatternWitness> witnesses;  // one per probe, sharing (n, lambda, m1)
  std::string message;
};

/// Searches (n, lambda, m1) in that order, then per probe lambda_o and m_k,
/// for the configuration lambda_o, lambda_o + m1 n lambda,
/// lambda_o + m_k n lambda + n lambda_k all in E. (n, lambda, m1) are shared by
/// every probe. Base points lambda_o are tried by sup norm, then lexicographically.
PatternSearchResult pattern_search(const PointSet& set, std::size_t p,
                                   std::span<const std::vector<LatVec>> probes,
                                   const PatternBounds& bounds);

bool verify_pattern_witness(const PointSet& set, const PatternWitness& witness);

/// Probe tuple (m * c_2, c_3, ..., c_r) where (lambda, c_2, ..., c_r) is the
/// determinant-one completion of lambda; det(lambda, probe) = m.
std::vector<LatVec> corollary_probe(const LatVec& lambda, const Int& m);

/// Simplex built from a witness with p = r; its determinant equals
/// m1 * n^r * det(lambda, lambda_2, ..., lambda_r).
SimplexRecord corollary_simplex(const PatternWitness& witness);

struct DensityEstimate {
  std::vector<std::int64_t> windows;
  std::vector<Rational> densities;  // |E cap [-N,N]^r| / (2N+1)^r
  Rational running_max = 0;
};

DensityEstimate upper_density_estimate(const PointGenerator& generator,
                                       std::span<const std::int64_t> windows);

}  // namespace latspec
