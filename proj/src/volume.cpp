#include "latspec/volume.hpp"

#include "latspec/haystack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace latspec {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// PointGenerator

PointGenerator PointGenerator::explicit_points(std::size_t rank, std::vector<LatVec> points) {
  for (const auto& p : points)
    if (p.rank() != rank) throw Error("point " + p.to_string() + " has the wrong rank");
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  PointGenerator g;
  g.kind = Kind::Explicit;
  g.rank = rank;
  g.points = std::move(points);
  return g;
}

PointGenerator PointGenerator::congruence(LatVec offset, Int modulus) {
  if (modulus <= 0) throw Error("congruence modulus must be positive");
  PointGenerator g;
  g.kind = Kind::Congruence;
  g.rank = offset.rank();
  g.offset = std::move(offset);
  g.modulus = std::move(modulus);
  return g;
}

PointGenerator PointGenerator::full(std::size_t rank) { return congruence(LatVec::zero(rank), Int(1)); }

PointGenerator PointGenerator::random(std::size_t rank, Rational density, std::uint64_t seed) {
  if (rank == 0) throw Error("rank must be >= 1");
  if (density < 0 || density > 1) throw Error("density must lie in [0, 1]");
  PointGenerator g;
  g.kind = Kind::Random;
  g.rank = rank;
  g.density = std::move(density);
  g.seed = seed;
  return g;
}

PointGenerator PointGenerator::union_of(std::vector<PointGenerator> children) {
  if (children.empty()) throw Error("union needs at least one member");
  PointGenerator g;
  g.kind = Kind::Union;
  g.rank = children.front().rank;
  for (const auto& c : children)
    if (c.rank != g.rank) throw Error("union members differ in rank");
  g.children = std::move(children);
  return g;
}

PointGenerator PointGenerator::intersection_of(std::vector<PointGenerator> children) {
  if (children.empty()) throw Error("intersection needs at least one member");
  PointGenerator g;
  g.kind = Kind::Intersection;
  g.rank = children.front().rank;
  for (const auto& c : children)
    if (c.rank != g.rank) throw Error("intersection members differ in rank");
  g.children = std::move(children);
  return g;
}

PointGenerator PointGenerator::translate(PointGenerator child, LatVec shift) {
  if (child.rank != shift.rank()) throw Error("translation vector has the wrong rank");
  PointGenerator g;
  g.kind = Kind::Translate;
  g.rank = child.rank;
  g.offset = std::move(shift);
  g.children.push_back(std::move(child));
  return g;
}

namespace {

std::uint64_t point_hash(std::uint64_t seed, const LatVec& v) {
  std::uint64_t state = seed;
  for (const auto& c : v.coords()) {
    const auto word = static_cast<std::uint64_t>(to_int64(c));
    state = splitmix64_mix(state + 0x9e3779b97f4a7c15ULL + word);
  }
  return state;
}

bool random_member(const Rational& density, std::uint64_t seed, const LatVec& v) {
  if (density == 0) return false;
  if (density == 1) return true;
  // u < density * 2^64  <=>  u * den < num * 2^64
  Int u;
  const std::uint64_t h = point_hash(seed, v);
  mpz_import(u.get_mpz_t(), 1, 1, sizeof(h), 0, 0, &h);
  Int rhs = density.get_num();
  rhs <<= 64;
  return u * density.get_den() < rhs;
}

}  // namespace

bool PointGenerator::contains(const LatVec& v) const {
  if (v.rank() != rank) return false;
  switch (kind) {
    case Kind::Explicit:
      return std::binary_search(points.begin(), points.end(), v);
    case Kind::Congruence:
      for (std::size_t i = 0; i < rank; ++i)
        if (!divides(modulus, v[i] - offset[i])) return false;
      return true;
    case Kind::Random:
      return random_member(density, seed, v);
    case Kind::Union:
      return std::any_of(children.begin(), children.end(), [&](const auto& c) { return c.contains(v); });
    case Kind::Intersection:
      return std::all_of(children.begin(), children.end(), [&](const auto& c) { return c.contains(v); });
    case Kind::Translate:
      return children.front().contains(v - offset);
  }
  return false;
}

// ---------------------------------------------------------------------------
// PointSet

PointSet::PointSet(std::size_t rank, std::vector<LatVec> points, std::optional<Int> window)
    : rank_(rank), points_(std::move(points)) {
  if (rank_ == 0) throw Error("rank must be >= 1");
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  Int extent = 0;
  for (const auto& p : points_) {
    if (p.rank() != rank_) throw Error("point " + p.to_string() + " has the wrong rank");
    for (const auto& c : p.coords()) extent = std::max(extent, Int(abs(c)));
  }
  if (window) {
    if (*window < 0) throw Error("window must be nonnegative");
    if (extent > *window) throw Error("point outside the window [-N, N]^r");
    window_ = *window;
  } else {
    window_ = extent;
  }
}

PointSet PointSet::from_generator(const PointGenerator& generator, std::int64_t window) {
  if (window < 0) throw Error("window must be nonnegative");
  const std::size_t r = generator.rank;
  std::vector<LatVec> pts;
  std::vector<std::int64_t> cur(r, -window);
  const double cells = std::pow(2.0 * static_cast<double>(window) + 1.0, static_cast<double>(r));
  if (cells > 5e7) throw Error("window too large to enumerate");
  for (;;) {
    std::vector<Int> coords;
    coords.reserve(r);
    for (auto c : cur) coords.push_back(from_int64(c));
    LatVec v(std::move(coords));
    if (generator.contains(v)) pts.push_back(std::move(v));
    std::size_t k = r;
    while (k > 0) {
      --k;
      if (cur[k] < window) {
        ++cur[k];
        break;
      }
      cur[k] = -window;
      if (k == 0) {
        PointSet out(r, std::move(pts), from_int64(window));
        out.generator_ = generator;
        return out;
      }
    }
  }
}

bool PointSet::contains(const LatVec& v) const {
  return std::binary_search(points_.begin(), points_.end(), v);
}

// ---------------------------------------------------------------------------
// Simplices

Int simplex_det(std::span<const LatVec> vertices) {
  if (vertices.empty()) throw Error("simplex needs r + 1 vertices");
  const std::size_t r = vertices.front().rank();
  if (vertices.size() != r + 1)
    throw Error("simplex in rank " + std::to_string(r) + " needs " + std::to_string(r + 1) +
                " vertices, got " + std::to_string(vertices.size()));
  IntMatrix m(r, r);
  for (std::size_t j = 0; j < r; ++j) {
    if (vertices[j + 1].rank() != r) throw Error("simplex vertices differ in rank");
    for (std::size_t i = 0; i < r; ++i) m(i, j) = vertices[j + 1][i] - vertices[0][i];
  }
  return det_exact(m);
}

SimplexRecord make_simplex(std::vector<LatVec> vertices) {
  Int d = simplex_det(vertices);
  return {std::move(vertices), std::move(d)};
}

namespace {

using i128 = __int128;

i128 abs128(i128 x) { return x < 0 ? -x : x; }

// Points packed as int64 for the enumeration kernel. Coordinates are bounded
// by 2^30 so that all rank <= 3 determinants fit in 128 bits.
struct PackedPoints {
  std::size_t rank = 0;
  std::size_t count = 0;
  std::vector<std::int64_t> flat;

  const std::int64_t* at(std::size_t i) const { return flat.data() + i * rank; }
};

std::optional<PackedPoints> pack(const PointSet& set) {
  if (set.rank() > 3) return std::nullopt;
  PackedPoints p;
  p.rank = set.rank();
  p.count = set.size();
  p.flat.reserve(p.rank * p.count);
  const Int limit = Int(1) << 30;
  for (const auto& v : set.points())
    for (const auto& c : v.coords()) {
      if (abs(c) > limit) return std::nullopt;
      p.flat.push_back(c.get_si());
    }
  return p;
}

// Visits every (r+1)-subset i_0 < ... < i_r with i_0 in {first, first+stride, ...}
// in lexicographic order; the visitor returns false to stop.
template <class Visitor>
void for_each_simplex_packed(const PackedPoints& pts, std::size_t first, std::size_t stride,
                             Visitor&& visit) {
  const std::size_t n = pts.count;
  const std::size_t r = pts.rank;
  std::array<std::size_t, 4> idx{};
  for (std::size_t i0 = first; i0 + r < n; i0 += stride) {
    const std::int64_t* o = pts.at(i0);
    idx[0] = i0;
    if (r == 1) {
      for (std::size_t i1 = i0 + 1; i1 < n; ++i1) {
        idx[1] = i1;
        if (!visit(idx, static_cast<i128>(pts.at(i1)[0] - o[0]))) return;
      }
    } else if (r == 2) {
      for (std::size_t i1 = i0 + 1; i1 < n; ++i1) {
        const std::int64_t a0 = pts.at(i1)[0] - o[0], a1 = pts.at(i1)[1] - o[1];
        idx[1] = i1;
        for (std::size_t i2 = i1 + 1; i2 < n; ++i2) {
          const std::int64_t b0 = pts.at(i2)[0] - o[0], b1 = pts.at(i2)[1] - o[1];
          idx[2] = i2;
          const i128 d = static_cast<i128>(a0) * b1 - static_cast<i128>(a1) * b0;
          if (!visit(idx, d)) return;
        }
      }
    } else {
      for (std::size_t i1 = i0 + 1; i1 < n; ++i1) {
        const std::int64_t* p1 = pts.at(i1);
        const i128 a0 = p1[0] - o[0], a1 = p1[1] - o[1], a2 = p1[2] - o[2];
        idx[1] = i1;
        for (std::size_t i2 = i1 + 1; i2 < n; ++i2) {
          const std::int64_t* p2 = pts.at(i2);
          const i128 b0 = p2[0] - o[0], b1 = p2[1] - o[1], b2 = p2[2] - o[2];
          // Cofactors of the first two columns; reused for every third column.
          const i128 c0 = a1 * b2 - a2 * b1;
          const i128 c1 = a2 * b0 - a0 * b2;
          const i128 c2 = a0 * b1 - a1 * b0;
          idx[2] = i2;
          for (std::size_t i3 = i2 + 1; i3 < n; ++i3) {
            const std::int64_t* p3 = pts.at(i3);
            idx[3] = i3;
            const i128 d = c0 * (p3[0] - o[0]) + c1 * (p3[1] - o[1]) + c2 * (p3[2] - o[2]);
            if (!visit(idx, d)) return;
          }
        }
      }
    }
  }
}

// Generic exact enumeration for rank > 3 or huge coordinates.
template <class Visitor>
void for_each_simplex_exact(const PointSet& set, std::size_t first, std::size_t stride,
                            Visitor&& visit) {
  const std::size_t n = set.size();
  const std::size_t r = set.rank();
  const auto& pts = set.points();
  std::vector<std::size_t> idx(r + 1);
  IntMatrix m(r, r);
  for (std::size_t i0 = first; i0 + r < n; i0 += stride) {
    idx[0] = i0;
    for (std::size_t q = 1; q <= r; ++q) idx[q] = i0 + q;
    for (;;) {
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < r; ++i) m(i, j) = pts[idx[j + 1]][i] - pts[i0][i];
      if (!visit(idx, det_exact(m))) return;
      std::size_t pos = r;
      while (pos >= 1 && idx[pos] == n - (r + 1 - pos)) --pos;
      if (pos == 0) break;
      ++idx[pos];
      for (std::size_t q = pos + 1; q <= r; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
}

std::uint64_t factorial_u64(std::size_t r) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= r; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<Int> volume_spectrum(const PointSet& set, std::optional<Int> cap, unsigned threads) {
  const std::size_t r = set.rank();
  if (set.size() < r + 1 || (cap && *cap < 1)) return {};
  const unsigned workers = std::max(1u, threads);

  if (auto packed = pack(set)) {
    // |D| <= r! * (2W)^r bounds the value range; small ranges use a bitmap.
    const double w = 2.0 * set.window().get_d();
    double bound = static_cast<double>(factorial_u64(r)) * std::pow(w, static_cast<double>(r));
    if (cap) bound = std::min(bound, cap->get_d());
    constexpr double kBitmapLimit = 1 << 26;
    const bool bitmap = bound < kBitmapLimit;
    const std::uint64_t cap_u = cap ? (fits_int64(*cap) ? cap->get_ui() : UINT64_MAX) : UINT64_MAX;

    std::vector<std::vector<bool>> bits(workers);
    std::vector<std::unordered_set<std::uint64_t>> hashed(workers);
    std::vector<std::set<Int>> huge(workers);
    auto shard = [&](unsigned wk) {
      if (bitmap) bits[wk].assign(static_cast<std::size_t>(bound) + 1, false);
      for_each_simplex_packed(*packed, wk, workers, [&](const auto&, i128 d) {
        if (d == 0) return true;
        const i128 a = abs128(d);
        if (a <= static_cast<i128>(UINT64_MAX >> 1)) {
          const auto v = static_cast<std::uint64_t>(a);
          if (v > cap_u) return true;
          if (bitmap) bits[wk][v] = true;
          else hashed[wk].insert(v);
        } else if (!cap) {
          Int big;
          const auto hi = static_cast<std::uint64_t>(a >> 64), lo = static_cast<std::uint64_t>(a);
          big = Int(std::to_string(hi)) * (Int(1) << 64) + Int(std::to_string(lo));
          huge[wk].insert(big);
        }
        return true;
      });
    };
    if (workers == 1) {
      shard(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned wk = 0; wk < workers; ++wk) pool.emplace_back(shard, wk);
    }
    std::set<std::uint64_t> merged;
    for (unsigned wk = 0; wk < workers; ++wk) {
      if (bitmap)
        for (std::size_t v = 1; v < bits[wk].size(); ++v)
          if (bits[wk][v]) merged.insert(v);
      merged.insert(hashed[wk].begin(), hashed[wk].end());
    }
    std::vector<Int> out;
    out.reserve(merged.size());
    for (auto v : merged) out.push_back(Int(std::to_string(v)));
    std::set<Int> big;
    for (auto& h : huge) big.insert(h.begin(), h.end());
    out.insert(out.end(), big.begin(), big.end());
    return out;
  }

  std::vector<std::set<Int>> found(workers);
  auto shard = [&](unsigned wk) {
    for_each_simplex_exact(set, wk, workers, [&](const auto&, const Int& d) {
      if (d == 0) return true;
      Int a = abs(d);
      if (cap && a > *cap) return true;
      found[wk].insert(std::move(a));
      return true;
    });
  };
  if (workers == 1) {
    shard(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned wk = 0; wk < workers; ++wk) pool.emplace_back(shard, wk);
  }
  std::set<Int> merged;
  for (auto& f : found) merged.insert(f.begin(), f.end());
  return {merged.begin(), merged.end()};
}

std::vector<std::pair<Int, SimplexRecord>> find_simplices(const PointSet& set,
                                                          std::span<const Int> targets) {
  std::map<Int, SimplexRecord> hits;
  std::set<Int> wanted(targets.begin(), targets.end());
  const std::size_t r = set.rank();
  if (wanted.empty() || set.size() < r + 1) return {};

  auto record = [&](const auto& idx, const Int& a) {
    std::vector<LatVec> verts;
    for (std::size_t q = 0; q <= r; ++q) verts.push_back(set.points()[idx[q]]);
    hits.emplace(a, make_simplex(std::move(verts)));
    wanted.erase(a);
  };

  if (auto packed = pack(set)) {
    std::unordered_set<std::uint64_t> small;
    for (const auto& t : wanted)
      if (t > 0 && fits_int64(t)) small.insert(t.get_ui());
    if (!small.empty()) {
      for_each_simplex_packed(*packed, 0, 1, [&](const auto& idx, i128 d) {
        const i128 a = abs128(d);
        if (a == 0 || a > static_cast<i128>(UINT64_MAX >> 1)) return true;
        const auto v = static_cast<std::uint64_t>(a);
        if (small.erase(v)) record(idx, Int(std::to_string(v)));
        return !small.empty();
      });
    }
  } else {
    for_each_simplex_exact(set, 0, 1, [&](const auto& idx, const Int& d) {
      const Int a = abs(d);
      if (wanted.count(a)) record(idx, a);
      return !wanted.empty();
    });
  }
  return {hits.begin(), hits.end()};
}

ApCertificate ap_certificate(const PointSet& set, std::uint64_t terms, unsigned threads) {
  ApCertificate cert;
  cert.terms = terms;
  if (terms == 0) throw Error("certificate needs M >= 1");
  if (set.size() < set.rank() + 1) {
    cert.failure = "fewer than r + 1 points";
    for (std::uint64_t m = 1; m <= terms; ++m) cert.missing.push_back(m);
    return cert;
  }
  const std::vector<Int> spectrum = volume_spectrum(set, std::nullopt, threads);
  if (spectrum.empty()) {
    cert.failure = "no nondegenerate simplex";
    for (std::uint64_t m = 1; m <= terms; ++m) cert.missing.push_back(m);
    return cert;
  }
  for (const auto& v : spectrum) cert.spectrum_gcd = gcd(cert.spectrum_gcd, v);
  auto present = [&](const Int& v) { return std::binary_search(spectrum.begin(), spectrum.end(), v); };

  // n must itself be a spectrum value, hence a multiple of the spectrum gcd.
  std::size_t best_hits = 0;
  for (const auto& n : spectrum) {
    std::vector<std::uint64_t> missing;
    for (std::uint64_t m = 1; m <= terms; ++m)
      if (!present(n * Int(std::to_string(m)))) missing.push_back(m);
    const std::size_t hits = terms - missing.size();
    if (missing.empty()) {
      cert.found = true;
      cert.n = n;
      cert.missing.clear();
      break;
    }
    if (hits > best_hits || cert.best_candidate == 0) {
      best_hits = hits;
      cert.best_candidate = n;
      cert.missing = std::move(missing);
    }
  }
  if (!cert.found) {
    cert.failure = "no n realizes all of n, 2n, ..., Mn";
    return cert;
  }
  std::vector<Int> targets;
  for (std::uint64_t m = 1; m <= terms; ++m) targets.push_back(cert.n * Int(std::to_string(m)));
  auto hits = find_simplices(set, targets);
  if (hits.size() != targets.size()) throw HardFailure("spectrum value without a witness simplex");
  for (auto& [value, simplex] : hits) cert.witnesses.push_back(std::move(simplex));
  return cert;
}

// ---------------------------------------------------------------------------
// Pattern search

std::vector<LatVec> PatternWitness::points() const {
  std::vector<LatVec> out;
  out.push_back(lambda_o);
  out.push_back(lambda_o + Int(m1 * n) * lambda);
  for (std::size_t k = 0; k < probe.size(); ++k)
    out.push_back(lambda_o + Int(m[k] * n) * lambda + n * probe[k]);
  return out;
}

bool verify_pattern_witness(const PointSet& set, const PatternWitness& witness) {
  if (witness.n <= 0 || witness.m1 == 0 || !is_primitive(witness.lambda)) return false;
  if (witness.m.size() != witness.probe.size()) return false;
  for (const auto& mk : witness.m)
    if (mk == 0) return false;
  for (const auto& pt : witness.points())
    if (!set.contains(pt)) return false;
  return true;
}

namespace {

// Membership index over int64 coordinates.
struct PointIndex {
  std::size_t rank;
  std::unordered_set<std::string> keys;

  static std::string key(std::span<const std::int64_t> c) {
    return {reinterpret_cast<const char*>(c.data()), c.size() * sizeof(std::int64_t)};
  }
};

// 1, -1, 2, -2, ... up to +-bound, or 1, 2, ... when negatives are not allowed.
std::vector<Int> multiplier_scan(const Int& bound, bool allow_negative) {
  std::vector<Int> out;
  for (Int m = 1; m <= bound; ++m) {
    out.push_back(m);
    if (allow_negative) out.push_back(-m);
  }
  return out;
}

std::vector<std::int64_t> to_i64(const LatVec& v) {
  std::vector<std::int64_t> out;
  for (const auto& c : v.coords()) out.push_back(to_int64(c));
  return out;
}

}  // namespace

PatternSearchResult pattern_search(const PointSet& set, std::size_t p,
                                   std::span<const std::vector<LatVec>> probes,
                                   const PatternBounds& bounds) {
  PatternSearchResult result;
  const std::size_t r = set.rank();
  if (p < 2) {
    result.status = PatternSearchResult::Status::InvalidProbe;
    result.message = "p must be at least 2";
    return result;
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (probes[i].size() != p - 1) {
      result.status = PatternSearchResult::Status::InvalidProbe;
      result.message = "probe " + std::to_string(i) + " needs p - 1 = " + std::to_string(p - 1) + " vectors";
      return result;
    }
    for (const auto& v : probes[i])
      if (v.rank() != r) {
        result.status = PatternSearchResult::Status::InvalidProbe;
        result.message = "probe " + std::to_string(i) + " has a vector of the wrong rank";
        return result;
      }
  }
  std::vector<LatVec> lambdas = bounds.lambdas;
  if (lambdas.empty()) {
    for (std::size_t k = 0; k < r; ++k) lambdas.push_back(LatVec::unit(r, k));
    if (r > 1) {
      std::vector<Int> mult;
      for (std::size_t k = 0; k < r; ++k) mult.push_back(Int(static_cast<long>(k + 2)));
      for (auto& h : Haystack::standard(std::move(mult)).take(bounds.haystack_count))
        lambdas.push_back(std::move(h));
    }
  }
  for (const auto& l : lambdas)
    if (l.rank() != r || !is_primitive(l)) {
      result.status = PatternSearchResult::Status::InvalidProbe;
      result.message = "direction " + l.to_string() + " is not a primitive vector of rank " + std::to_string(r);
      return result;
    }
  if (set.empty()) {
    result.message = "empty set";
    return result;
  }

  // Everything lives in int64 from here on; the window bounds the search.
  PointIndex index{r, {}};
  // Base points are tried nearest the origin first (sup norm, then lexicographic).
  std::vector<std::vector<std::int64_t>> pts;
  std::vector<std::size_t> source;
  for (const auto& v : set.points()) {
    pts.push_back(to_i64(v));
    index.keys.insert(PointIndex::key(pts.back()));
  }
  source.resize(pts.size());
  std::iota(source.begin(), source.end(), std::size_t{0});
  auto sup = [](const std::vector<std::int64_t>& c) {
    std::int64_t m = 0;
    for (auto x : c) m = std::max(m, x < 0 ? -x : x);
    return m;
  };
  std::stable_sort(source.begin(), source.end(),
                   [&](std::size_t a, std::size_t b) { return sup(pts[a]) < sup(pts[b]); });
  const auto m1_scan = multiplier_scan(bounds.max_m1, false);
  const auto mk_scan = multiplier_scan(bounds.max_mk, true);
  std::vector<std::int64_t> buf(r);
  auto member_shift = [&](const std::vector<std::int64_t>& base, const std::vector<std::int64_t>& shift) {
    for (std::size_t i = 0; i < r; ++i) buf[i] = base[i] + shift[i];
    return index.keys.count(PointIndex::key(buf)) > 0;
  };

  std::vector<std::vector<std::vector<std::int64_t>>> probe_i64;
  for (const auto& pr : probes) {
    std::vector<std::vector<std::int64_t>> t;
    for (const auto& v : pr) t.push_back(to_i64(v));
    probe_i64.push_back(std::move(t));
  }

  for (Int n = 1; n <= bounds.max_n; ++n) {
    const std::int64_t nn = to_int64(n);
    for (const auto& lambda : lambdas) {
      const auto lam = to_i64(lambda);
      for (const auto& m1 : m1_scan) {
        const std::int64_t mm1 = to_int64(m1);
        std::vector<std::int64_t> first_shift(r);
        for (std::size_t i = 0; i < r; ++i) first_shift[i] = mm1 * nn * lam[i];
        std::vector<PatternWitness> witnesses;
        bool all_probes = true;
        for (std::size_t pi = 0; pi < probes.size() && all_probes; ++pi) {
          bool found = false;
          for (std::size_t si = 0; si < pts.size() && !found; ++si) {
            const std::size_t oi = source[si];
            const auto& base = pts[oi];
            if (!member_shift(base, first_shift)) continue;
            std::vector<Int> ms;
            for (std::size_t k = 0; k < p - 1; ++k) {
              bool hit = false;
              for (const auto& mk : mk_scan) {
                const std::int64_t mmk = to_int64(mk);
                std::vector<std::int64_t> shift(r);
                for (std::size_t i = 0; i < r; ++i) shift[i] = mmk * nn * lam[i] + nn * probe_i64[pi][k][i];
                if (member_shift(base, shift)) {
                  ms.push_back(mk);
                  hit = true;
                  break;
                }
              }
              if (!hit) break;
            }
            if (ms.size() != p - 1) continue;
            PatternWitness w{n, lambda, m1, set.points()[oi], probes[pi], ms, true};
            w.all_positive = std::all_of(ms.begin(), ms.end(), [](const Int& x) { return x > 0; });
            witnesses.push_back(std::move(w));
            found = true;
          }
          all_probes = found;
        }
        if (all_probes) {
          for (const auto& w : witnesses)
            if (!verify_pattern_witness(set, w)) throw HardFailure("pattern witness failed re-verification");
          result.status = PatternSearchResult::Status::Found;
          result.witnesses = std::move(witnesses);
          return result;
        }
      }
    }
  }
  result.status = PatternSearchResult::Status::Exhausted;
  result.message = "no configuration within bounds";
  return result;
}

std::vector<LatVec> corollary_probe(const LatVec& lambda, const Int& m) {
  const IntMatrix basis = complete_to_basis(lambda);
  std::vector<LatVec> probe;
  for (std::size_t j = 1; j < basis.cols(); ++j) probe.push_back(basis.column(j));
  if (!probe.empty()) probe.front() *= m;
  return probe;
}

SimplexRecord corollary_simplex(const PatternWitness& witness) {
  if (witness.probe.size() + 1 != witness.lambda.rank())
    throw Error("corollary simplex needs p = r");
  return make_simplex(witness.points());
}

// ---------------------------------------------------------------------------
// Density

DensityEstimate upper_density_estimate(const PointGenerator& generator,
                                       std::span<const std::int64_t> windows) {
  DensityEstimate est;
  std::int64_t previous = -1;
  for (auto n : windows) {
    if (n <= previous) throw Error("density windows must be strictly increasing");
    previous = n;
    const PointSet window_set = PointSet::from_generator(generator, n);
    Int cells = 1;
    for (std::size_t i = 0; i < generator.rank; ++i) cells *= from_int64(2 * n + 1);
    Rational d(Int(static_cast<unsigned long>(window_set.size())), cells);
    d.canonicalize();
    if (est.densities.empty() || d > est.running_max) est.running_max = d;
    est.windows.push_back(n);
    est.densities.push_back(std::move(d));
  }
  return est;
}

}  // namespace latspec
