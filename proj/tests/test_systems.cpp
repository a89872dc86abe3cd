#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latspec/systems.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace latspec;

namespace {

FiniteSystem klein() { return FiniteSystem::from_sublattice(scale_lattice(2, 2)); }
FiniteSystem cyclic4() { return FiniteSystem::from_sublattice(SubLattice(IntMatrix{{4, 0}, {0, 1}})); }

FiniteSet singleton_zero(const FiniteSystem& sys) {
  const std::vector<FiniteSystem::Element> z{sys.zero()};
  return make_set(sys, z);
}

// Union of translates by phi(m lambda) for |m| <= |A|, by direct element arithmetic.
FiniteSet saturate_brute(const FiniteSystem& sys, const FiniteSet& b, const LatVec& lambda) {
  FiniteSet out(sys.size(), false);
  const long a = static_cast<long>(sys.size());
  for (long m = -a; m <= a; ++m) {
    const auto g = sys.phi(Int(m) * lambda);
    for (std::size_t x = 0; x < sys.size(); ++x)
      if (b[x]) out[sys.add(x, g)] = true;
  }
  return out;
}

Rational frac(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

FormalReal alpha() { return FormalReal::symbol("alpha"); }

}  // namespace

TEST_CASE("finite systems from sublattices") {
  const auto k = klein();
  CHECK(k.size() == 4);
  CHECK(k.moduli() == std::vector<Int>{2, 2});
  const auto c = cyclic4();
  CHECK(c.size() == 4);
  CHECK(c.moduli() == std::vector<Int>{4});
  const auto t = FiniteSystem::from_sublattice(SubLattice::full(2));
  CHECK(t.size() == 1);
  CHECK(t.moduli().empty());
}

TEST_CASE("phi is a surjective homomorphism with kernel L") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t r = 1 + trial % 3;
    const IntMatrix m = oracle::random_nonsingular(rng, r, 4);
    const SubLattice l(m);
    const auto sys = FiniteSystem::from_sublattice(l);
    CHECK(Int(static_cast<long>(sys.size())) == l.index());
    std::vector<bool> hit(sys.size(), false);
    oracle::for_each_in_box(r, -3, 3, [&](const LatVec& v) {
      const auto a = sys.phi(v);
      hit[a] = true;
      CHECK((a == sys.zero()) == oracle::in_lattice(m, v));
      const LatVec w = LatVec::unit(r, 0);
      CHECK(sys.phi(v + w) == sys.add(a, sys.phi(w)));
      CHECK(sys.phi(-v) == sys.negate(a));
      CHECK(sys.phi(Int(3) * v) == sys.multiply(3, a));
      CHECK(sys.encode(sys.decode(a)) == a);
    });
    if (r <= 2) CHECK(std::all_of(hit.begin(), hit.end(), [](bool x) { return x; }));
  }
}

TEST_CASE("systems from an explicit action") {
  const auto z5 = FiniteSystem::from_action({5}, {{1}, {2}});
  CHECK(z5.size() == 5);
  CHECK(z5.phi({1, 1}) == 3);
  CHECK_THROWS_AS(FiniteSystem::from_action({4}, {{2}, {0}}), Error);
}

TEST_CASE("ergodic set enumeration") {
  const auto z = ErgodicSetSpec::integers();
  CHECK(z.member(0) == 0);
  CHECK(z.member(1) == 1);
  CHECK(z.member(2) == -1);
  CHECK(z.member(3) == 2);
  CHECK(ErgodicSetSpec::interval().member(5) == 5);
  const auto p = ErgodicSetSpec::progression(3, 1);
  CHECK(p.member(0) == 3);
  CHECK(p.member(4) == 7);
  CHECK(p.is_ergodic());
  CHECK_FALSE(ErgodicSetSpec::progression(0, 2).is_ergodic());
}

TEST_CASE("orbit saturation examples") {
  const auto k = klein();
  const auto kb = singleton_zero(k);
  CHECK(orbit_saturation(k, kb, {1, 0}).measure == frac(1, 2));
  const auto c = cyclic4();
  CHECK(orbit_saturation(c, singleton_zero(c), {1, 0}).measure == 1);
  CHECK(orbit_saturation(k, full_set(k), {1, 1}).measure == 1);
  CHECK_THROWS_AS(orbit_saturation(k, kb, {1, 0, 0}), Error);
}

TEST_CASE("orbit saturation properties") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 150; ++trial) {
    const auto sys = oracle::random_system(rng, 48);
    const auto b = oracle::random_set(rng, sys);
    const std::size_t r = sys.rank();
    std::uniform_int_distribution<long> dist(-3, 3);
    std::vector<Int> c;
    for (std::size_t i = 0; i < r; ++i) c.push_back(Int(dist(rng)));
    const LatVec lam(c);
    const auto sat = orbit_saturation(sys, b, lam);
    CHECK(sat.set == saturate_brute(sys, b, lam));
    CHECK(sat.measure == measure(sys, sat.set));
    CHECK(orbit_saturation(sys, sat.set, lam).set == sat.set);
    CHECK(orbit_saturation(sys, b, lam, ErgodicSetSpec::interval()).set == sat.set);
    CHECK(orbit_saturation(sys, b, lam, ErgodicSetSpec::progression(5, -1)).set == sat.set);

    Rational prev = 0;
    for (std::uint64_t n = 1; n <= sys.size() + 2; ++n) {
      const auto part = orbit_saturation(sys, b, lam, ErgodicSetSpec::interval(), n);
      CHECK(part.measure >= prev);
      prev = part.measure;
    }
    CHECK(prev == sat.measure);
    if (!lam.is_zero() && is_ergodic_direction(sys, lam)) CHECK(sat.measure == 1);
  }
}

TEST_CASE("ergodic directions") {
  const auto k = klein();
  for (const auto& l : candidate_box(2, 3)) CHECK_FALSE(is_ergodic_direction(k, l));
  CHECK(is_ergodic_direction(cyclic4(), {1, 0}));
  CHECK_FALSE(is_ergodic_direction(cyclic4(), {2, 0}));
  CHECK_THROWS_AS(is_ergodic_direction(k, {0, 0}), Error);

  std::vector<std::vector<FormalReal>> theta{{alpha(), FormalReal(Rational(0))}};
  const KroneckerSystem kr(2, theta, {{"alpha", std::sqrt(2.0)}});
  CHECK(is_ergodic_direction(kr, {1, 0}));
  CHECK_FALSE(is_ergodic_direction(kr, {0, 1}));
  CHECK(kr.is_ergodic());
}

TEST_CASE("maximal directional expansion") {
  const auto cands = candidate_box(2, 3);
  CHECK(cands.size() == 48);
  CHECK(cands.front() == LatVec{-3, -3});
  const auto k = klein();
  const auto mk = max_directional_expansion(k, singleton_zero(k), cands);
  CHECK(mk.measure == frac(1, 2));
  CHECK(mk.argmax == LatVec{-3, -3});
  const auto c = cyclic4();
  CHECK(max_directional_expansion(c, singleton_zero(c), cands).measure == 1);
  CHECK(max_directional_expansion(k, full_set(k), cands).measure == 1);

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sys = oracle::random_system(rng, 32);
    const auto b = oracle::random_set(rng, sys);
    const auto box = candidate_box(sys.rank(), 2);
    const auto best = max_directional_expansion(sys, b, box);
    Rational expect = -1;
    LatVec arg;
    for (const auto& l : box) {
      const auto m = measure(sys, saturate_brute(sys, b, l));
      if (m > expect) {
        expect = m;
        arg = l;
      }
    }
    CHECK(best.measure == expect);
    CHECK(best.argmax == arg);
  }
}

TEST_CASE("ergodic components examples") {
  const auto k = klein();
  const auto trivial = ergodic_components(k, scale_lattice(2, 2));
  CHECK(trivial.size() == 4);
  for (const auto& comp : trivial) CHECK(comp.weight == frac(1, 4));
  const auto whole = ergodic_components(k, SubLattice::full(2));
  CHECK(whole.size() == 1);
  CHECK(whole.front().weight == 1);

  const auto c = cyclic4();
  const auto halves = ergodic_components(c, SubLattice(IntMatrix{{2, 0}, {0, 1}}));
  REQUIRE(halves.size() == 2);
  const auto two = c.phi({2, 0});
  const auto one = c.phi({1, 0});
  std::vector<FiniteSystem::Element> even{0, two}, odd{one, c.add(one, two)};
  std::sort(even.begin(), even.end());
  std::sort(odd.begin(), odd.end());
  CHECK(halves[0].support == even);
  CHECK(halves[1].support == odd);
  CHECK(halves[0].weight == frac(1, 2));
  CHECK(halves[1].weight == frac(1, 2));
}

TEST_CASE("ergodic components partition and reconstruct the measure") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sys = oracle::random_system(rng, 64);
    const std::size_t r = sys.rank();
    const SubLattice l(oracle::random_nonsingular(rng, r, 3));
    const auto comps = ergodic_components(sys, l);
    Rational total = 0;
    std::vector<int> seen(sys.size(), 0);
    for (const auto& comp : comps) {
      total += comp.weight;
      CHECK(comp.weight == frac(static_cast<long>(comp.support.size()), static_cast<long>(sys.size())));
      for (auto x : comp.support) ++seen[x];
      for (std::size_t j = 0; j < r; ++j) {
        const auto g = sys.phi(l.basis().column(j));
        for (auto x : comp.support)
          CHECK(std::binary_search(comp.support.begin(), comp.support.end(), sys.add(x, g)));
      }
    }
    CHECK(total == 1);
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    // Atomwise: sum alpha * nu({x}) = 1/|A|.
    for (std::size_t x = 0; x < sys.size(); ++x) {
      Rational atom = 0;
      for (const auto& comp : comps)
        if (std::binary_search(comp.support.begin(), comp.support.end(), x))
          atom += comp.weight / Rational(Int(static_cast<long>(comp.support.size())));
      CHECK(atom == Rational(1, static_cast<unsigned long>(sys.size())));
    }
    const auto b = oracle::random_set(rng, sys);
    Rational mix = 0;
    for (const auto& comp : comps) mix += comp.weight * component_measure(comp, b);
    CHECK(mix == measure(sys, b));

    const Int n = 1 + static_cast<long>(rng() % 4);
    CHECK(ergodic_components_scaled(sys, n).size() == ergodic_components(sys, scale_lattice(r, n)).size());
  }
}

TEST_CASE("birkhoff annihilator averages") {
  const auto c = cyclic4();
  CHECK(birkhoff_annihilator_average(c, singleton_zero(c), {1, 0}, 4) == frac(1, 16));
  const auto k = klein();
  CHECK(birkhoff_annihilator_average(k, singleton_zero(k), {1, 0}, 2) == frac(1, 8));

  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 60; ++trial) {
    const auto sys = oracle::random_system(rng, 32);
    const auto b = oracle::random_set(rng, sys);
    CHECK(birkhoff_annihilator_average(sys, b, LatVec::zero(sys.rank()), 1 + trial % 5) == measure(sys, b));
    std::vector<Int> cc;
    for (std::size_t i = 0; i < sys.rank(); ++i) cc.push_back(Int(static_cast<long>(rng() % 5) - 2));
    const LatVec lam(cc);
    const std::uint64_t n = 1 + rng() % 12;
    Rational sum = 0;
    for (std::uint64_t j = 0; j < n; ++j) sum += oracle::overlap(sys, b, sys.phi(Int(static_cast<long>(j)) * lam));
    CHECK(birkhoff_annihilator_average(sys, b, lam, n) == sum / Rational(static_cast<unsigned long>(n)));
  }
}

TEST_CASE("intersection measures") {
  const auto c = cyclic4();
  const auto one = c.phi({1, 0});
  const std::vector<FiniteSystem::Element> pts{0, one};
  const auto b = make_set(c, pts);
  const std::vector<FiniteSystem::Element> shifts{one};
  CHECK(intersection_measure(c, b, shifts) == frac(1, 4));
  CHECK(translate(c, b, one)[c.add(one, one)]);
  CHECK(count(intersect(b, translate(c, b, one))) == 1);
}

TEST_CASE("formal reals") {
  const auto x = FormalReal::parse("1/2 + 3*alpha - beta");
  CHECK(x.rational_part() == frac(1, 2));
  CHECK(x.coefficient("alpha") == 3);
  CHECK(x.coefficient("beta") == -1);
  CHECK_FALSE(x.is_rational());
  CHECK(FormalReal::parse("-4").is_integer());
  CHECK(FormalReal::parse("2/3").is_rational());
  CHECK_FALSE(FormalReal::parse("2/3").is_integer());
  const auto y = x - FormalReal::parse("3 alpha");
  CHECK(y == FormalReal::parse("1/2 - beta"));
  CHECK((Rational(2) * FormalReal::parse("alpha - alpha")).is_zero());
  CHECK(x.evaluate({{"alpha", 1.0}, {"beta", 0.5}}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(x.evaluate({{"alpha", 1.0}}), Error);
  CHECK(FormalReal::parse(x.to_string()) == x);
  CHECK_THROWS_AS(FormalReal::parse("1/2 +"), Error);
}

TEST_CASE("box sets") {
  const auto full = BoxSet::full(2);
  CHECK(full.measure() == 1);
  Box half{{Rational(0)}, {frac(1, 2)}};
  Box other{{frac(1, 2)}, {frac(3, 4)}};
  CHECK(BoxSet::from_boxes(1, {half, other}).measure() == frac(3, 4));
  Box overlapping{{frac(1, 4)}, {frac(3, 4)}};
  CHECK_THROWS_AS(BoxSet::from_boxes(1, {half, overlapping}), Error);
  Box backwards{{frac(1, 2)}, {frac(1, 4)}};
  CHECK_THROWS_AS(BoxSet::from_boxes(1, {backwards}), Error);
}

TEST_CASE("integral lattices and kronecker structure") {
  // k * (1/4) integral iff 4 | k.
  const std::vector<std::vector<FormalReal>> quarter{{FormalReal(frac(1, 4))}};
  const auto lq = integral_lattice(1, quarter);
  REQUIRE(lq.size() == 1);
  CHECK(abs(lq[0][0]) == 4);
  // k * alpha never integral for k != 0.
  const std::vector<std::vector<FormalReal>> irr{{alpha()}};
  CHECK(integral_lattice(1, irr).empty());
  // k1 alpha + k2 (1/2 - alpha) integral iff k1 = k2 even.
  const std::vector<std::vector<FormalReal>> mixed{{alpha(), FormalReal::parse("1/2 - alpha")}};
  const auto lm = integral_lattice(2, mixed);
  REQUIRE(lm.size() == 1);
  CHECK(abs(lm[0][0]) == 2);
  CHECK(lm[0][0] == lm[0][1]);

  std::vector<std::vector<FormalReal>> theta{{alpha(), FormalReal(frac(1, 3))}};
  const KroneckerSystem k(2, theta, {{"alpha", std::sqrt(2.0)}});
  CHECK(k.is_ergodic());
  CHECK_FALSE(k.non_ergodicity_witness().has_value());
  const auto ann = k.annihilating_lattice({0, 1});
  REQUIRE(ann.size() == 1);
  CHECK(abs(ann[0][0]) == 3);
  CHECK(k.annihilating_lattice({1, 0}).empty());
  CHECK(k.pairing(std::vector<Int>{2}, {1, 1}) == FormalReal::parse("2 alpha + 2/3"));
  CHECK_FALSE(k.is_rational_character(std::vector<Int>{1}));
  CHECK(k.is_rational_character(std::vector<Int>{0}));
  CHECK(k.is_trivial_character(std::vector<Int>{0}));

  std::vector<std::vector<FormalReal>> rational{{FormalReal(frac(1, 4)), FormalReal(frac(1, 2))}};
  const KroneckerSystem kq(2, rational, {});
  CHECK_FALSE(kq.is_ergodic());
  const auto w = kq.non_ergodicity_witness();
  REQUIRE(w.has_value());
  CHECK(kq.pairing(w->coords(), {1, 0}).is_integer());
  CHECK(kq.pairing(w->coords(), {0, 1}).is_integer());
  CHECK(kq.is_trivial_character(std::vector<Int>{4}));

  CHECK_THROWS_AS(KroneckerSystem(2, theta, {}), Error);
}

TEST_CASE("kronecker orbit saturation") {
  std::vector<std::vector<FormalReal>> quarter{{FormalReal(frac(1, 4)), FormalReal(Rational(0))}};
  const KroneckerSystem kq(2, quarter, {});
  Box b{{Rational(0)}, {frac(1, 8)}};
  const auto set = BoxSet::from_boxes(1, {b});
  const auto est = orbit_saturation(kq, set, {1, 0});
  CHECK(est.estimate);
  CHECK(est.measure == doctest::Approx(0.5));
  CHECK(orbit_saturation(kq, set, {0, 1}).measure == doctest::Approx(0.125));

  std::vector<std::vector<FormalReal>> irr{{alpha(), FormalReal(Rational(0))}};
  const KroneckerSystem ki(2, irr, {{"alpha", std::sqrt(2.0) - 1.0}});
  Box h{{Rational(0)}, {frac(1, 2)}};
  const auto halfset = BoxSet::from_boxes(1, {h});
  CHECK(orbit_saturation(ki, halfset, {1, 0}).measure == doctest::Approx(1.0));
  const auto few = orbit_saturation(ki, halfset, {1, 0}, ErgodicSetSpec::interval(), 1);
  CHECK(few.measure == doctest::Approx(0.5));
  CHECK(few.translates == 1);
}
