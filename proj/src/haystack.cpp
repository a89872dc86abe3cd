#include "latspec/haystack.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <thread>

namespace latspec {

struct Haystack::Cache {
  std::mutex mutex;
  std::vector<LatVec> elements;  // elements[i] = h_{i+1}
  std::vector<Int> powers;       // m_k^{elements.size()}
};

Haystack::Haystack(std::vector<LatVec> basis, std::vector<Int> multipliers)
    : basis_(std::move(basis)), multipliers_(std::move(multipliers)) {
  const std::size_t r = basis_.size();
  if (r == 0) throw Error("haystack needs a nonempty basis");
  if (multipliers_.size() != r) throw Error("haystack needs exactly one multiplier per basis vector");
  for (const auto& b : basis_)
    if (b.rank() != r) throw Error("haystack basis vectors must have rank " + std::to_string(r));
  const Int d = det_exact(IntMatrix::from_columns(basis_));
  if (d != 1 && d != -1) throw Error("haystack basis is not unimodular (det " + d.get_str() + ")");

  Int g = 0;
  for (std::size_t k = 0; k < r; ++k) {
    if (multipliers_[k] <= 1) throw Error("haystack multipliers must exceed 1");
    if (k > 0 && multipliers_[k] <= multipliers_[k - 1])
      throw Error("haystack multipliers must be strictly increasing");
    g = gcd(g, multipliers_[k]);
  }
  if (g != 1) throw Error("haystack multipliers must have gcd 1 (got " + g.get_str() + ")");

  for (std::size_t a = 0; a < r && pairwise_coprime_; ++a)
    for (std::size_t b = a + 1; b < r; ++b)
      if (gcd(multipliers_[a], multipliers_[b]) != 1) {
        pairwise_coprime_ = false;
        warnings_.push_back("multipliers " + multipliers_[a].get_str() + " and " +
                            multipliers_[b].get_str() +
                            " share a factor; primitivity is checked per element");
        break;
      }

  cache_ = std::make_shared<Cache>();
  cache_->powers.assign(r, Int(1));
}

Haystack Haystack::standard(std::vector<Int> multipliers) {
  std::vector<LatVec> basis;
  for (std::size_t k = 0; k < multipliers.size(); ++k)
    basis.push_back(LatVec::unit(multipliers.size(), k));
  return Haystack(std::move(basis), std::move(multipliers));
}

LatVec Haystack::element(std::size_t n) const {
  if (n == 0) throw Error("haystack elements are indexed from 1");
  std::lock_guard lock(cache_->mutex);
  auto& elements = cache_->elements;
  auto& powers = cache_->powers;
  while (elements.size() < n) {
    LatVec h = LatVec::zero(rank());
    for (std::size_t k = 0; k < rank(); ++k) {
      powers[k] *= multipliers_[k];
      h += powers[k] * basis_[k];
    }
    if (!is_primitive(h))
      throw HardFailure("haystack element " + std::to_string(elements.size() + 1) +
                        " is not primitive: " + h.to_string());
    elements.push_back(std::move(h));
  }
  return elements[n - 1];
}

std::vector<LatVec> Haystack::take(std::size_t count) const {
  std::vector<LatVec> out;
  out.reserve(count);
  if (count > 0) element(count);
  std::lock_guard lock(cache_->mutex);
  out.assign(cache_->elements.begin(), cache_->elements.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

std::vector<LatVec> make_haystack(std::vector<LatVec> basis, std::vector<Int> multipliers,
                                  std::size_t count) {
  return Haystack(std::move(basis), std::move(multipliers)).take(count);
}

std::vector<LatVec> scale_vectors(std::span<const LatVec> vectors, const Int& n) {
  std::vector<LatVec> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(n * v);
  return out;
}

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

namespace {

// Advance `idx` (strictly increasing, values < n) to the next combination
// keeping idx[0] fixed. Returns false when exhausted.
bool next_tail_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos-- > 1;) {
    if (idx[pos] < n - (k - pos)) {
      ++idx[pos];
      for (std::size_t q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

// Lexicographically first singular r-subset whose smallest index is `first`.
std::vector<std::size_t> first_singular_with_head(std::span<const LatVec> vectors, std::size_t rank,
                                                  std::size_t first) {
  const std::size_t n = vectors.size();
  if (first + rank > n) return {};
  std::vector<std::size_t> idx(rank);
  for (std::size_t q = 0; q < rank; ++q) idx[q] = first + q;
  IntMatrix m(rank, rank);
  do {
    for (std::size_t j = 0; j < rank; ++j)
      for (std::size_t i = 0; i < rank; ++i) m(i, j) = vectors[idx[j]][i];
    if (det_exact(m) == 0) return idx;
  } while (next_tail_combination(idx, n));
  return {};
}

}  // namespace

HaystackVerdict verify_haystack_sample(std::span<const LatVec> vectors, std::size_t rank,
                                       unsigned threads) {
  if (rank == 0) throw Error("rank must be >= 1");
  for (const auto& v : vectors)
    if (v.rank() != rank) throw Error("sample vector " + v.to_string() + " has the wrong rank");
  if (binomial_saturating(vectors.size(), rank) > kMaxHaystackSubsets)
    throw Error("sample too large: C(" + std::to_string(vectors.size()) + "," + std::to_string(rank) +
                ") exceeds " + std::to_string(kMaxHaystackSubsets) + " subsets; verify a subsample");

  HaystackVerdict verdict;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    if (!is_primitive(vectors[i])) {
      verdict.ok = false;
      verdict.violation = {i};
      verdict.reason = "not primitive";
      return verdict;
    }
  if (vectors.size() < rank) return verdict;

  const std::size_t heads = vectors.size() - rank + 1;
  std::vector<std::vector<std::size_t>> found(heads);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(heads)));
  auto shard = [&](unsigned w) {
    for (std::size_t head = w; head < heads; head += workers) {
      found[head] = first_singular_with_head(vectors, rank, head);
      if (!found[head].empty()) return;
    }
  };
  if (workers == 1) {
    shard(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(shard, w);
  }
  for (auto& f : found)
    if (!f.empty()) {
      verdict.ok = false;
      verdict.violation = std::move(f);
      verdict.reason = "singular subset";
      break;
    }
  return verdict;
}

}  // namespace latspec
