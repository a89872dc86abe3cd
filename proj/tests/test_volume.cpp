#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latspec/volume.hpp"
#include "oracles.hpp"

#include <random>

using namespace latspec;

namespace {

PointSet lattice_window(std::size_t r, long step, long window) {
  return PointSet::from_generator(PointGenerator::congruence(LatVec::zero(r), step), window);
}

std::vector<Int> as_vector(const std::set<Int>& s) { return {s.begin(), s.end()}; }

PointSet random_points(std::mt19937_64& rng, std::size_t r, std::size_t count, long box) {
  std::uniform_int_distribution<long> dist(-box, box);
  std::vector<LatVec> pts;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Int> c;
    for (std::size_t k = 0; k < r; ++k) c.push_back(Int(dist(rng)));
    pts.emplace_back(std::move(c));
  }
  return PointSet(r, std::move(pts));
}

}  // namespace

TEST_CASE("simplex determinants") {
  CHECK(simplex_det(std::vector<LatVec>{{0, 0}, {1, 0}, {0, 1}}) == 1);
  CHECK(simplex_det(std::vector<LatVec>{{0, 0}, {1, 1}, {2, 2}}) == 0);
  for (long m = -5; m <= 5; ++m) CHECK(simplex_det(std::vector<LatVec>{{0, 0}, {2, 0}, {0, 2 * m}}) == 4 * m);
  CHECK_THROWS_AS(simplex_det(std::vector<LatVec>{{0, 0}, {1, 0}}), Error);
}

TEST_CASE("simplex determinant symmetries") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<long> dist(-9, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + trial % 3;
    std::vector<LatVec> v;
    for (std::size_t i = 0; i <= r; ++i) {
      std::vector<Int> c;
      for (std::size_t k = 0; k < r; ++k) c.push_back(Int(dist(rng)));
      v.emplace_back(std::move(c));
    }
    const Int d = simplex_det(v);
    CHECK(d == oracle::simplex_det(v));
    if (r >= 2) {
      auto w = v;
      std::swap(w[1], w[2]);
      CHECK(simplex_det(w) == -d);
    }
    auto p = v;
    std::shuffle(p.begin(), p.end(), rng);
    CHECK(abs(simplex_det(p)) == abs(d));
    std::vector<Int> tc;
    for (std::size_t k = 0; k < r; ++k) tc.push_back(Int(dist(rng)));
    const LatVec t(tc);
    auto shifted = v;
    for (auto& x : shifted) x += t;
    CHECK(simplex_det(shifted) == d);
    const Int n = 1 + trial % 4;
    auto dilated = v;
    for (auto& x : dilated) x *= n;
    Int nr = 1;
    for (std::size_t k = 0; k < r; ++k) nr *= n;
    CHECK(simplex_det(dilated) == nr * d);
  }
}

TEST_CASE("volume spectrum examples") {
  const PointSet square(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  CHECK(oracle::volume_spectrum(square.points()) == std::set<Int>{1});
  CHECK(volume_spectrum(square) == std::vector<Int>{1});

  const PointSet line(2, {{0, 0}, {1, 1}, {2, 2}, {5, 5}});
  CHECK(volume_spectrum(line).empty());

  const PointSet even = lattice_window(2, 2, 6);
  const auto spec = volume_spectrum(even);
  CHECK(!spec.empty());
  for (const auto& v : spec) CHECK(divides(4, v));
  CHECK(spec == as_vector(oracle::volume_spectrum(even.points())));
}

TEST_CASE("volume spectrum matches exhaustive enumeration") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 1 + trial % 3;
    const PointSet e = random_points(rng, r, r == 3 ? 9 : 14, r == 1 ? 30 : 6);
    const auto expect = as_vector(oracle::volume_spectrum(e.points()));
    CHECK(volume_spectrum(e) == expect);
    CHECK(volume_spectrum(e, std::nullopt, 3) == expect);

    const Int cap = 10;
    std::vector<Int> capped;
    for (const auto& v : expect)
      if (v <= cap) capped.push_back(v);
    CHECK(volume_spectrum(e, cap) == capped);

    // n * E has spectrum n^r * spectrum(E).
    const Int n = 3;
    std::vector<LatVec> scaled;
    for (const auto& v : e.points()) scaled.push_back(n * v);
    Int nr = 1;
    for (std::size_t k = 0; k < r; ++k) nr *= n;
    std::vector<Int> expect_scaled;
    for (const auto& v : expect) expect_scaled.push_back(nr * v);
    CHECK(volume_spectrum(PointSet(r, scaled)) == expect_scaled);
  }
}

TEST_CASE("large coordinates use the exact path") {
  const Int big = Int(1) << 40;
  const PointSet e(2, {LatVec(std::vector<Int>{0, 0}), LatVec(std::vector<Int>{big, 0}),
                       LatVec(std::vector<Int>{0, big}), LatVec(std::vector<Int>{1, 1})});
  CHECK(volume_spectrum(e) == as_vector(oracle::volume_spectrum(e.points())));
}

TEST_CASE("find simplices returns witnesses") {
  const PointSet e = lattice_window(2, 1, 3);
  const std::vector<Int> targets{1, 5, 7, 1000};
  const auto found = find_simplices(e, targets);
  CHECK(found.size() == 3);
  for (const auto& [t, s] : found) {
    CHECK(abs(s.det) == t);
    CHECK(oracle::simplex_det(s.vertices) == s.det);
    for (const auto& v : s.vertices) CHECK(e.contains(v));
  }
}

TEST_CASE("arithmetic progression certificates") {
  const auto full = ap_certificate(lattice_window(2, 1, 10), 10);
  REQUIRE(full.found);
  CHECK(full.n == 1);
  REQUIRE(full.witnesses.size() == 10);
  for (std::size_t m = 1; m <= 10; ++m) CHECK(abs(full.witnesses[m - 1].det) == Int(static_cast<long>(m)));

  const auto even = ap_certificate(lattice_window(2, 2, 10), 5);
  REQUIRE(even.found);
  CHECK(even.n == 4);
  for (std::size_t m = 1; m <= 5; ++m) {
    const auto& w = even.witnesses[m - 1];
    CHECK(abs(w.det) == 4 * Int(static_cast<long>(m)));
    CHECK(oracle::simplex_det(w.vertices) == w.det);
  }

  const auto tiny = ap_certificate(PointSet(2, {{0, 0}, {1, 0}}), 3);
  CHECK_FALSE(tiny.found);
  CHECK_FALSE(tiny.failure.empty());
}

TEST_CASE("certificates on scaled lattices are multiples of n^r") {
  for (long step = 1; step <= 3; ++step) {
    for (std::size_t r = 1; r <= 2; ++r) {
      const auto cert = ap_certificate(lattice_window(r, step, r == 1 ? 30 : 8), 4);
      REQUIRE(cert.found);
      Int nr = 1;
      for (std::size_t k = 0; k < r; ++k) nr *= step;
      CHECK(divides(nr, cert.n));
      for (std::size_t m = 1; m <= 4; ++m) CHECK(abs(cert.witnesses[m - 1].det) == cert.n * Int(static_cast<long>(m)));
    }
  }
}

TEST_CASE("pattern search on the full lattice") {
  const PointSet e = lattice_window(2, 1, 5);
  const std::vector<std::vector<LatVec>> probes{{{0, 1}}, {{3, -2}}};
  const auto res = pattern_search(e, 2, probes, {});
  REQUIRE(res.status == PatternSearchResult::Status::Found);
  const auto& w = res.witnesses.front();
  CHECK(w.n == 1);
  CHECK(w.lambda == LatVec{1, 0});
  CHECK(w.m1 == 1);
  CHECK(w.lambda_o == LatVec{0, 0});
  CHECK(w.m == std::vector<Int>{1});
  for (const auto& x : res.witnesses) CHECK(verify_pattern_witness(e, x));
}

TEST_CASE("pattern search on 3Z^2 forces 3 | n") {
  const PointSet e = lattice_window(2, 3, 12);
  const std::vector<std::vector<LatVec>> probes{{{1, 0}}, {{1, 2}}, {{0, 1}}};
  const auto res = pattern_search(e, 2, probes, {});
  REQUIRE(res.status == PatternSearchResult::Status::Found);
  for (const auto& w : res.witnesses) {
    CHECK(divides(3, w.n));
    CHECK(verify_pattern_witness(e, w));
    for (const auto& v : w.points()) CHECK(divides(3, v[0]));
  }

  // Oracle: with probes spanning Z^2 / 3Z^2, no n prime to 3 admits a shared
  // (lambda, m1) over a wider search box.
  const auto three = PointGenerator::congruence({0, 0}, 3);
  for (long n = 1; n <= 2; ++n)
    for (long dx = -6; dx <= 6; ++dx)
      for (long dy = -6; dy <= 6; ++dy) {
        const LatVec lam{dx, dy};
        if (!is_primitive(lam)) continue;
        for (long m1 = 1; m1 <= 6; ++m1) {
          if (!three.contains(Int(m1 * n) * lam)) continue;
          bool every = true;
          for (const auto& pr : probes) {
            bool some = false;
            for (long mk = -6; mk <= 6 && !some; ++mk)
              some = mk != 0 && three.contains(Int(mk * n) * lam + Int(n) * pr[0]);
            every = every && some;
          }
          CHECK_FALSE(every);
        }
      }
}

TEST_CASE("pattern search failures") {
  const PointSet empty(2, {}, Int(3));
  const std::vector<std::vector<LatVec>> probes{{{0, 1}}};
  CHECK(pattern_search(empty, 2, probes, {}).status == PatternSearchResult::Status::Exhausted);
  const std::vector<std::vector<LatVec>> bad{{{0, 1}, {1, 1}}};
  CHECK(pattern_search(lattice_window(2, 1, 3), 2, bad, {}).status == PatternSearchResult::Status::InvalidProbe);
}

TEST_CASE("pattern witnesses and the corollary simplex") {
  std::mt19937_64 rng(33);
  const auto gen = PointGenerator::random(2, Rational(1, 2), 99);
  const PointSet e = PointSet::from_generator(gen, 12);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<long> dist(-4, 4);
    LatVec lam{dist(rng), dist(rng)};
    if (!is_primitive(lam)) continue;
    const Int m = 1 + static_cast<long>(rng() % 3);
    const auto probe = corollary_probe(lam, m);
    CHECK(probe.size() == 1);
    IntMatrix d(2, 2);
    d.set_column(0, lam);
    d.set_column(1, probe[0]);
    CHECK(det_exact(d) == m);

    PatternBounds b;
    b.lambdas = {lam};
    b.max_n = 3;
    const std::vector<std::vector<LatVec>> probes{probe};
    const auto res = pattern_search(e, 2, probes, b);
    if (res.status != PatternSearchResult::Status::Found) continue;
    const auto& w = res.witnesses.front();
    CHECK(verify_pattern_witness(e, w));
    const auto s = corollary_simplex(w);
    CHECK(oracle::simplex_det(s.vertices) == s.det);
    CHECK(s.det == w.m1 * w.n * w.n * m);
    for (const auto& v : s.vertices) CHECK(e.contains(v));
  }
}

TEST_CASE("point generators") {
  const auto g = PointGenerator::congruence({1, 0}, 3);
  CHECK(g.contains({4, 3}));
  CHECK_FALSE(g.contains({4, 4}));
  const auto u = PointGenerator::union_of({g, PointGenerator::explicit_points(2, {{0, 0}})});
  CHECK(u.contains({0, 0}));
  const auto t = PointGenerator::translate(g, {1, 1});
  CHECK(t.contains({2, 1}));
  const auto i = PointGenerator::intersection_of({g, PointGenerator::congruence({0, 0}, 2)});
  CHECK(i.contains({4, 0}));
  CHECK_FALSE(i.contains({1, 0}));

  // Random membership is independent of the window and reproducible.
  const auto r1 = PointSet::from_generator(PointGenerator::random(2, Rational(1, 3), 7), 6);
  const auto r2 = PointSet::from_generator(PointGenerator::random(2, Rational(1, 3), 7), 9);
  for (const auto& v : r1.points()) CHECK(r2.contains(v));
  for (const auto& v : r2.points())
    if (abs(v[0]) <= 6 && abs(v[1]) <= 6) CHECK(r1.contains(v));
  const auto other = PointSet::from_generator(PointGenerator::random(2, Rational(1, 3), 8), 6);
  CHECK(other.points() != r1.points());
  CHECK(splitmix64_mix(0) == 0);
  CHECK(splitmix64_mix(1) != splitmix64_mix(2));
}

TEST_CASE("random density is close to the target") {
  const auto e = PointSet::from_generator(PointGenerator::random(2, Rational(1, 4), 5), 100);
  const double frac = static_cast<double>(e.size()) / (201.0 * 201.0);
  CHECK(frac == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("upper density estimates") {
  const std::vector<std::int64_t> windows{1, 5, 10};
  const auto two = upper_density_estimate(PointGenerator::congruence({0, 0}, 2), windows);
  CHECK(two.densities.back() == Rational(121, 441));
  CHECK(two.densities.front() == Rational(1, 9));
  CHECK(two.densities[1] == Rational(25, 121));
  CHECK(two.running_max == Rational(121, 441));

  for (std::size_t r = 1; r <= 3; ++r) {
    const auto full = upper_density_estimate(PointGenerator::full(r), windows);
    for (const auto& d : full.densities) CHECK(d == 1);
  }
  const auto none = upper_density_estimate(PointGenerator::explicit_points(2, {}), windows);
  for (const auto& d : none.densities) CHECK(d == 0);

  const std::vector<std::int64_t> bad{5, 5};
  CHECK_THROWS_AS(upper_density_estimate(PointGenerator::full(2), bad), Error);
}
