#pragma once

#include "latspec/lattice.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace latspec {

/// The family h_n = sum_k m_k^n * beta_k, n = 1, 2, ..., for a basis beta of
/// Z^r and multipliers 1 < m_1 < ... < m_r with gcd 1. Any r distinct members
/// span a finite-index subgroup.
///
/// Elements are produced on demand and memoized; copies share the cache.
class Haystack {
 public:
  Haystack(std::vector<LatVec> basis, std::vector<Int> multipliers);

  /// Haystack over the standard basis e_1, ..., e_r.
  static Haystack standard(std::vector<Int> multipliers);

  std::size_t rank() const { return basis_.size(); }
  const std::vector<LatVec>& basis() const { return basis_; }
  const std::vector<Int>& multipliers() const { return multipliers_; }

  /// h_n for n >= 1.
  LatVec element(std::size_t n) const;
  /// h_1, ..., h_count.
  std::vector<LatVec> take(std::size_t count) const;

  bool pairwise_coprime() const { return pairwise_coprime_; }
  /// Non-fatal construction notes (currently only the pairwise-coprimality one).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Cache;

  std::vector<LatVec> basis_;
  std::vector<Int> multipliers_;
  bool pairwise_coprime_ = true;
  std::vector<std::string> warnings_;
  std::shared_ptr<Cache> cache_;
};

std::vector<LatVec> make_haystack(std::vector<LatVec> basis, std::vector<Int> multipliers,
                                  std::size_t count);

/// n * v for every v.
std::vector<LatVec> scale_vectors(std::span<const LatVec> vectors, const Int& n);

struct HaystackVerdict {
  bool ok = true;
  /// Sample indices of the lexicographically least violation: a single index
  /// for a non-primitive element, r indices for a singular r-subset.
  std::vector<std::size_t> violation;
  std::string reason;
};

/// Largest number of r-subsets verify_haystack_sample will enumerate.
inline constexpr std::uint64_t kMaxHaystackSubsets = 1'000'000;

/// Checks that every vector is primitive and every r-subset has a nonzero
/// determinant. Samples with more than kMaxHaystackSubsets subsets are refused.
HaystackVerdict verify_haystack_sample(std::span<const LatVec> vectors, std::size_t rank,
                                       unsigned threads = 1);

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k);

}  // namespace latspec
