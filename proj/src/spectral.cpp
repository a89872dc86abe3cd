#include "latspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace latspec {

// ---------------------------------------------------------------------------
// Weight

Weight Weight::of(const Rational& q) {
  Weight w;
  w.exact = q;
  w.lower = w.upper = q.get_d();
  return w;
}

Weight Weight::enclosure(double lower, double upper) {
  if (!(lower <= upper)) throw HardFailure("inverted enclosure");
  Weight w;
  w.lower = lower;
  w.upper = upper;
  return w;
}

Weight Weight::scaled(const Rational& factor) const {
  if (exact) return of(*exact * factor);
  const double f = factor.get_d();
  return enclosure(lower * f * (1 - 1e-15), upper * f * (1 + 1e-15));
}

std::string Weight::to_string() const {
  if (exact) return exact->get_str();
  std::ostringstream os;
  os.precision(17);
  os << "[" << lower << ", " << upper << "]";
  return os.str();
}

// ---------------------------------------------------------------------------
// Finite spectral measures

namespace {

constexpr std::size_t kMaxSpectralCarrier = 4096;
constexpr std::size_t kMaxRingCells = std::size_t{1} << 23;

Rational ratio(std::uint64_t a, std::uint64_t b) {
  Rational q(Int(std::to_string(a)), Int(std::to_string(b)));
  q.canonicalize();
  return q;
}

}  // namespace

FiniteSpectralMeasure::FiniteSpectralMeasure(const FiniteSystem& sys, const FiniteSet& set)
    : sys_(sys), set_(set) {
  const std::size_t n = sys.size();
  if (set.size() != n) throw Error("set does not belong to this system");
  if (n > kMaxSpectralCarrier)
    throw Error("carrier too large for atom-level spectra (|A| = " + std::to_string(n) + ")");
  if (!fits_int64(sys.exponent())) throw Error("exponent too large");
  e_ = sys.exponent().get_ui();
  if (n * e_ > kMaxRingCells) throw Error("carrier and exponent too large for atom-level spectra");
  field_ = std::make_shared<const CyclotomicField>(e_);
  base_ = ratio(1, static_cast<std::uint64_t>(n) * n);

  autocorr_.assign(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    const auto minus_c = sys.negate(c);
    std::uint64_t hits = 0;
    for (std::size_t x = 0; x < n; ++x)
      if (set[x] && set[sys.add(x, minus_c)]) ++hits;
    autocorr_[c] = hits;
  }

  atoms_.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    FiniteAtom atom;
    atom.character = sys.decode(t);
    atom.poly.assign(e_, 0);
    for (std::size_t c = 0; c < n; ++c)
      if (autocorr_[c]) atom.poly[pairing(t, c)] += static_cast<std::int64_t>(autocorr_[c]);
    const auto reduced = field_->reduce(atom.poly);
    if (CyclotomicField::is_rational(reduced)) {
      atom.weight = Weight::of(Rational(reduced.empty() ? Int(0) : reduced[0]) * base_);
    } else {
      double err = 0;
      const double v = CyclotomicField::evaluate_real(atom.poly, &err);
      const double b = base_.get_d();
      atom.weight = Weight::enclosure(std::max(0.0, (v - err) * b), (v + err) * b);
    }
    atoms_.push_back(std::move(atom));
  }
}

std::uint64_t FiniteSpectralMeasure::pairing(std::size_t t, FiniteSystem::Element a) const {
  const auto& mod = sys_.moduli();
  std::uint64_t acc = 0;
  std::size_t tt = t, aa = a;
  for (std::size_t i = mod.size(); i-- > 0;) {
    const std::uint64_t d = mod[i].get_ui();
    const std::uint64_t ti = tt % d, ai = aa % d;
    tt /= d;
    aa /= d;
    acc = (acc + static_cast<std::uint64_t>((static_cast<unsigned __int128>(ti * ai % d) * (e_ / d)) % e_)) % e_;
  }
  return acc;
}

Rational FiniteSpectralMeasure::atom_sum(const std::vector<std::int64_t>& poly) const {
  const auto reduced = field_->reduce(poly);
  if (!CyclotomicField::is_rational(reduced)) throw HardFailure("character sum is not rational");
  return Rational(reduced.empty() ? Int(0) : reduced[0]) * base_ * factor_;
}

Rational FiniteSpectralMeasure::trivial_weight() const { return atom_sum(atoms_.front().poly); }

Rational FiniteSpectralMeasure::total_mass() const {
  std::vector<std::int64_t> acc(e_, 0);
  for (const auto& a : atoms_)
    for (std::size_t j = 0; j < e_; ++j) acc[j] += a.poly[j];
  return atom_sum(acc);
}

Rational FiniteSpectralMeasure::annihilator_mass(const LatVec& lambda) const {
  const auto g = sys_.phi(lambda);
  std::vector<std::int64_t> acc(e_, 0);
  for (std::size_t t = 0; t < atoms_.size(); ++t)
    if (pairing(t, g) == 0)
      for (std::size_t j = 0; j < e_; ++j) acc[j] += atoms_[t].poly[j];
  Rational by_atoms = atom_sum(acc);
  const Rational by_cosets = coset_annihilator_mass(sys_, set_, lambda) * factor_;
  if (by_atoms != by_cosets)
    throw HardFailure("annihilator mass mismatch: atoms " + by_atoms.get_str() + ", cosets " + by_cosets.get_str());
  return by_atoms;
}

Rational FiniteSpectralMeasure::rational_mass_excluding_trivial() const { return total_mass() - trivial_weight(); }

Rational FiniteSpectralMeasure::character_sum(FiniteSystem::Element g) const {
  std::vector<std::int64_t> acc(e_, 0);
  for (std::size_t t = 0; t < atoms_.size(); ++t) {
    const std::uint64_t shift = pairing(t, g);
    const auto& poly = atoms_[t].poly;
    for (std::size_t j = 0; j < e_; ++j)
      if (poly[j]) acc[(j + shift) % e_] += poly[j];
  }
  return atom_sum(acc);
}

FiniteSpectralMeasure FiniteSpectralMeasure::normalized() const {
  const Rational trivial = trivial_weight();
  if (trivial == 0) throw Error("non-ergodic or null set");
  FiniteSpectralMeasure out = *this;
  out.factor_ = factor_ / trivial;
  out.normalized_ = true;
  const Rational rescale = 1 / trivial;
  for (auto& a : out.atoms_) a.weight = a.weight.scaled(rescale);
  return out;
}

FiniteSpectralMeasure spectral_measure(const FiniteSystem& sys, const FiniteSet& set) {
  return FiniteSpectralMeasure(sys, set);
}

Rational coset_annihilator_mass(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda) {
  const auto g = sys.phi(lambda);
  const std::vector<FiniteSystem::Element> gens{g};
  const auto h = sys.subgroup(gens);
  std::vector<bool> seen(sys.size(), false);
  // sum_C (|C|/|A|) (|B cap C|/|C|)^2 = sum_C |B cap C|^2 / (|A| |C|)
  Int acc = 0;
  for (std::size_t a = 0; a < sys.size(); ++a) {
    if (seen[a]) continue;
    unsigned long hits = 0;
    for (auto x : h) {
      const auto y = sys.add(a, x);
      seen[y] = true;
      if (set[y]) ++hits;
    }
    acc += Int(hits) * hits;
  }
  Rational q(acc, Int(static_cast<unsigned long>(sys.size())) * static_cast<unsigned long>(h.size()));
  q.canonicalize();
  return q;
}

BochnerVerdict verify_bochner(const FiniteSpectralMeasure& sigma, std::span<const LatVec> lambdas) {
  const auto& sys = sigma.system();
  BochnerVerdict verdict;
  std::map<FiniteSystem::Element, bool> cache;
  const Rational mu = measure(sys, sigma.set());
  const Rational norm = mu == 0 ? Rational(1) : sigma.trivial_weight() / (mu * mu);
  for (const auto& lambda : lambdas) {
    const auto g = sys.phi(lambda);
    auto it = cache.find(g);
    if (it == cache.end()) {
      bool ok = true;
      try {
        const Rational lhs = ratio(sigma.autocorrelation()[g], sys.size()) * norm;
        ok = sigma.character_sum(g) == lhs;
      } catch (const HardFailure&) {
        ok = false;
      }
      it = cache.emplace(g, ok).first;
    }
    ++verdict.checked;
    if (!it->second) {
      verdict.ok = false;
      verdict.violations.push_back(lambda);
    }
  }
  return verdict;
}

ExpansionCheck expansion_bound_check(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                     const ErgodicSetSpec& spec) {
  if (lambda.is_zero()) throw Error("direction must be nonzero");
  if (!spec.is_ergodic()) throw Error("ergodic set required, got " + spec.describe());
  const Rational mu = measure(sys, set);
  if (mu == 0) throw Error("null set");
  ExpansionCheck out;
  out.annihilator_mass = coset_annihilator_mass(sys, set, lambda) / (mu * mu);
  out.bound = 1 / out.annihilator_mass;
  out.measured = orbit_saturation(sys, set, lambda, spec).measure;
  out.holds = out.measured >= out.bound;
  out.tight = out.measured == out.bound;
  if (!out.holds)
    throw HardFailure("expansion bound violated at " + lambda.to_string() + ": measured " + out.measured.get_str() +
                      " < bound " + out.bound.get_str());
  return out;
}

// ---------------------------------------------------------------------------
// Kronecker spectral measures

namespace {

constexpr std::size_t kMaxTorusAtoms = std::size_t{1} << 22;

struct Factor {
  std::complex<double> value;
  double magnitude = 0;
  bool zero = false;
};

Rational frac(const Rational& q) {
  Rational f = q - Rational(floor_div(q.get_num(), q.get_den()));
  return f;
}

// int_a^b e(-k x) dx
Factor interval_factor(long k, const Rational& a, const Rational& b) {
  Factor f;
  if (k == 0) {
    f.value = Rational(b - a).get_d();
    f.magnitude = std::abs(f.value.real());
    return f;
  }
  const Rational kk(k);
  const Rational pa = frac(kk * a), pb = frac(kk * b);
  if (pa == pb) {
    f.zero = true;
    return f;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const std::complex<double> ea = std::polar(1.0, -two_pi * pa.get_d());
  const std::complex<double> eb = std::polar(1.0, -two_pi * pb.get_d());
  f.value = (eb - ea) / std::complex<double>(0.0, -two_pi * static_cast<double>(k));
  f.magnitude = std::abs(f.value);
  return f;
}

long shell_of(const std::vector<long>& k) {
  long s = 0;
  for (auto v : k) s = std::max(s, std::labs(v));
  return s;
}

}  // namespace

KroneckerSpectralMeasure::KroneckerSpectralMeasure(const KroneckerSystem& sys, const BoxSet& set, std::size_t radius)
    : sys_(sys), set_(set), radius_(radius), mu_(set.measure()) {
  const std::size_t s = sys.torus_dim();
  if (set.dim != s) throw Error("box set dimension does not match the torus");
  const double cells = std::pow(2.0 * static_cast<double>(radius) + 1.0, static_cast<double>(s));
  if (cells > static_cast<double>(kMaxTorusAtoms)) throw Error("truncation radius too large for this torus");
  const long k_max = static_cast<long>(radius);

  // factors[box][axis][k + K]
  std::vector<std::vector<std::vector<Factor>>> factors(set.boxes.size());
  for (std::size_t b = 0; b < set.boxes.size(); ++b) {
    factors[b].resize(s);
    for (std::size_t i = 0; i < s; ++i)
      for (long k = -k_max; k <= k_max; ++k)
        factors[b][i].push_back(interval_factor(k, set.boxes[b].lower[i], set.boxes[b].upper[i]));
  }

  std::vector<std::vector<long>> ks;
  std::vector<long> cur(s, -k_max);
  for (bool more = true; more;) {
    ks.push_back(cur);
    more = false;
    for (std::size_t i = s; i-- > 0;) {
      if (cur[i] < k_max) {
        ++cur[i];
        more = true;
        break;
      }
      cur[i] = -k_max;
    }
  }
  std::stable_sort(ks.begin(), ks.end(), [](const auto& a, const auto& b) { return shell_of(a) < shell_of(b); });

  const Rational mu2 = mu_ * mu_;
  for (const auto& k : ks) {
    TorusAtom atom;
    for (auto v : k) atom.frequency.push_back(Int(v));
    if (shell_of(k) == 0) {
      atom.weight = Weight::of(mu2);
    } else {
      std::complex<double> c = 0;
      double mag = 0;
      bool all_zero = true;
      for (std::size_t b = 0; b < factors.size(); ++b) {
        std::complex<double> prod = 1;
        double pmag = 1;
        bool zero = false;
        for (std::size_t i = 0; i < s; ++i) {
          const Factor& f = factors[b][i][static_cast<std::size_t>(k[i] + k_max)];
          if (f.zero) {
            zero = true;
            break;
          }
          prod *= f.value;
          pmag *= f.magnitude;
        }
        if (zero) continue;
        all_zero = false;
        c += prod;
        mag += pmag;
      }
      if (all_zero) {
        atom.exact_zero = true;
        atom.weight = Weight::of(0);
      } else {
        const double err = 1e-13 * (static_cast<double>(s) + 2.0) * mag;
        const double a = std::abs(c);
        const double lo = std::max(0.0, a - err), hi = a + err;
        atom.weight = Weight::enclosure(lo * lo, hi * hi);
      }
    }
    lower_sum_ += atom.weight.lower;
    raw_lower_.push_back(atom.weight.lower);
    atoms_.push_back(std::move(atom));
  }
}

Weight KroneckerSpectralMeasure::trivial_weight() const { return Weight::of(mu_ * mu_ * factor_); }

Weight KroneckerSpectralMeasure::total_mass() const { return Weight::of(mu_ * factor_); }

double KroneckerSpectralMeasure::tail_bound() const {
  const double raw = std::max(0.0, mu_.get_d() - lower_sum_) + 1e-15;
  return raw * factor_.get_d();
}

namespace {

Weight interval_of(double lower, double upper, const Rational& factor) {
  const double f = factor.get_d();
  lower = std::max(0.0, lower * f * (1 - 1e-14));
  upper = std::max(lower, upper * f * (1 + 1e-14) + 1e-15);
  return Weight::enclosure(lower, upper);
}

bool annihilates(std::span<const Int> k, const std::vector<FormalReal>& freq) {
  FormalReal acc;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] != 0) acc += Rational(k[i]) * freq[i];
  return acc.is_integer();
}

}  // namespace

Weight KroneckerSpectralMeasure::annihilator_mass(const LatVec& lambda) const {
  const double mu = mu_.get_d();
  if (lambda.is_zero()) return interval_of(lower_sum_, mu, factor_);
  if (sys_.annihilating_lattice(lambda).empty()) return trivial_weight();
  const auto freq = sys_.frequency(lambda);
  double in = 0, out = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (annihilates(atoms_[i].frequency, freq)) in += raw_lower_[i];
    else out += raw_lower_[i];
  }
  return interval_of(in, mu - out, factor_);
}

Weight KroneckerSpectralMeasure::rational_mass_excluding_trivial() const {
  if (sys_.rational_lattice().empty()) return Weight::of(0);
  const double mu = mu_.get_d();
  double in = 0, out = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& k = atoms_[i].frequency;
    if (std::all_of(k.begin(), k.end(), [](const Int& v) { return v == 0; })) continue;
    if (sys_.is_rational_character(k)) in += raw_lower_[i];
    else out += raw_lower_[i];
  }
  return interval_of(in, mu - Rational(mu_ * mu_).get_d() - out, factor_);
}

KroneckerSpectralMeasure KroneckerSpectralMeasure::normalized() const {
  if (mu_ == 0) throw Error("non-ergodic or null set");
  KroneckerSpectralMeasure out = *this;
  const Rational rescale = 1 / (mu_ * mu_ * factor_);
  out.factor_ = 1 / (mu_ * mu_);
  out.normalized_ = true;
  for (auto& a : out.atoms_) a.weight = a.weight.scaled(rescale);
  return out;
}

KroneckerSpectralMeasure spectral_measure_kronecker(const KroneckerSystem& sys, const BoxSet& set,
                                                    std::size_t radius) {
  return KroneckerSpectralMeasure(sys, set, radius);
}

IrrationalPart irrational_part(const KroneckerSpectralMeasure& sigma) {
  IrrationalPart tau;
  tau.system = &sigma.system();
  for (const auto& a : sigma.atoms())
    if (!sigma.system().is_rational_character(a.frequency)) tau.atoms.push_back(a);
  tau.tail_upper = sigma.tail_bound();
  const Rational mu = sigma.set_measure();
  tau.total_upper = (mu - mu * mu) * sigma.factor();
  return tau;
}

AnnihilatorSearch haystack_annihilator_search(const IrrationalPart& tau, std::span<const LatVec> sample,
                                              const Rational& delta) {
  if (delta <= 0) throw Error("delta must be positive");
  if (sample.empty()) throw Error("empty haystack sample");
  const std::size_t r = sample.front().rank();
  const Rational scan = Rational(static_cast<unsigned long>(r)) * tau.total_upper / delta;
  const Int required = floor_div(scan.get_num(), scan.get_den()) + 1;
  if (Int(static_cast<unsigned long>(sample.size())) < required)
    throw Error("insufficient sample length: need " + required.get_str() + " elements, got " +
                std::to_string(sample.size()));
  const std::size_t limit = required.get_ui();
  const double d = delta.get_d();
  AnnihilatorSearch out;
  out.required_length = limit;
  for (std::size_t i = 0; i < limit; ++i) {
    const LatVec& lambda = sample[i];
    out.index = i;
    out.lambda = lambda;
    if (tau.system == nullptr || tau.total_upper == 0 || tau.system->annihilating_lattice(lambda).empty()) {
      out.mass_upper = 0;
      out.exact_zero = true;
      return out;
    }
    const auto freq = tau.system->frequency(lambda);
    double mass = tau.tail_upper;
    for (const auto& a : tau.atoms)
      if (annihilates(a.frequency, freq)) mass += a.weight.upper;
    if (mass < d) {
      out.mass_upper = mass;
      out.exact_zero = false;
      return out;
    }
  }
  throw HardFailure("no sample element within the scan length has a small annihilator");
}

// ---------------------------------------------------------------------------
// Small intersections

SmallIntersection small_intersection_bound(std::span<const Rational> weights, std::span<const FiniteSet> sets,
                                           std::size_t p) {
  if (sets.empty()) throw Error("need at least one set");
  if (p == 0) throw Error("p must be >= 1");
  for (const auto& w : weights)
    if (w < 0) throw Error("weights must be nonnegative");
  for (const auto& a : sets)
    if (a.size() != weights.size()) throw Error("set size does not match the space");

  SmallIntersection out;
  std::optional<std::vector<std::size_t>> least;
  for (std::size_t y = 0; y < weights.size(); ++y) {
    if (weights[y] == 0) continue;
    std::vector<std::size_t> containing;
    for (std::size_t n = 0; n < sets.size() && containing.size() < p; ++n)
      if (sets[n][y]) containing.push_back(n);
    if (containing.size() == p && (!least || containing < *least)) least = containing;
  }
  if (least) {
    out.kind = SmallIntersection::Kind::Violation;
    for (std::size_t y = 0; y < weights.size(); ++y) {
      bool all = true;
      for (auto n : *least) all = all && sets[n][y];
      if (all) out.measure += weights[y];
    }
    for (auto n : *least) out.violation.push_back(n + 1);
    return out;
  }
  Rational total = 0;
  for (const auto& w : weights) total += w;
  const Rational threshold = Rational(static_cast<unsigned long>(p)) * total /
                             Rational(static_cast<unsigned long>(sets.size()));
  for (std::size_t n = 0; n < sets.size(); ++n) {
    Rational m = 0;
    for (std::size_t y = 0; y < weights.size(); ++y)
      if (sets[n][y]) m += weights[y];
    if (m < threshold) {
      out.kind = SmallIntersection::Kind::Index;
      out.index = n + 1;
      out.measure = m;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Directional expansion

namespace {

// Midpoint of (0, (1 - (1 + eps_o)(1 - eps)) / (1 - eps)).
Rational admissible_delta(const Rational& eps_o, const Rational& eps) {
  return (1 - (1 + eps_o) * (1 - eps)) / (1 - eps) / 2;
}

std::optional<std::string> refusal(const Weight& rational_mass, const Rational& eps_o, const Rational& eps) {
  if (rational_mass.upper > eps_o.get_d() && !(rational_mass.exact && *rational_mass.exact <= eps_o))
    return "hypothesis violated: rational mass " + rational_mass.to_string() + " exceeds eps_o = " + eps_o.get_str();
  if (eps <= eps_o) return "eps must exceed eps_o";
  if (eps >= 1) return "vacuous: eps >= 1 makes the expansion bound trivial";
  return std::nullopt;
}

}  // namespace

TheoremCheck directional_expansion_theorem_check(const FiniteSystem& sys, const FiniteSet& set,
                                                 const Rational& eps_o, const Rational& eps,
                                                 std::span<const LatVec> haystack,
                                                 std::span<const ErgodicSetSpec> sets) {
  TheoremCheck out;
  const Rational mu = measure(sys, set);
  if (mu == 0) {
    out.reason = "null set";
    return out;
  }
  for (const auto& spec : sets)
    if (!spec.is_ergodic()) throw Error("ergodic set required, got " + spec.describe());
  out.rational_mass = Weight::of(1 / mu - 1);
  if (auto why = refusal(out.rational_mass, eps_o, eps)) {
    out.reason = *why;
    return out;
  }
  out.delta = admissible_delta(eps_o, eps);
  const IrrationalPart tau;  // every character of a finite system is rational
  const auto hit = haystack_annihilator_search(tau, haystack, out.delta);
  out.haystack_index = hit.index;
  out.lambda = hit.lambda;
  for (const auto& spec : sets) {
    const Rational m = orbit_saturation(sys, set, hit.lambda, spec).measure;
    out.measured.push_back(Weight::of(m));
    if (!(m > 1 - eps))
      throw HardFailure("expansion " + m.get_str() + " not above 1 - eps at " + hit.lambda.to_string());
  }
  out.status = TheoremCheck::Status::Verified;
  return out;
}

TheoremCheck directional_expansion_theorem_check(const KroneckerSystem& sys, const BoxSet& set,
                                                 const Rational& eps_o, const Rational& eps,
                                                 std::span<const LatVec> haystack,
                                                 std::span<const ErgodicSetSpec> sets, std::size_t radius,
                                                 std::size_t translates) {
  TheoremCheck out;
  out.estimate = true;
  if (set.measure() == 0) {
    out.reason = "null set";
    return out;
  }
  if (!sys.is_ergodic()) {
    out.reason = "system is not ergodic";
    return out;
  }
  for (const auto& spec : sets)
    if (!spec.is_ergodic()) throw Error("ergodic set required, got " + spec.describe());
  const auto sigma = spectral_measure_kronecker(sys, set, radius).normalized();
  out.rational_mass = sigma.rational_mass_excluding_trivial();
  if (auto why = refusal(out.rational_mass, eps_o, eps)) {
    out.reason = *why;
    return out;
  }
  out.delta = admissible_delta(eps_o, eps);
  const auto tau = irrational_part(sigma);
  const auto hit = haystack_annihilator_search(tau, haystack, out.delta);
  out.haystack_index = hit.index;
  out.lambda = hit.lambda;
  bool ok = true;
  const double target = Rational(1 - eps).get_d();
  for (const auto& spec : sets) {
    const auto est = orbit_saturation(sys, set, hit.lambda, spec, translates);
    out.measured.push_back(Weight::enclosure(est.measure, 1.0));
    ok = ok && est.measure + 1e-9 > target;
  }
  out.status = ok ? TheoremCheck::Status::Verified : TheoremCheck::Status::Failed;
  if (!ok) out.reason = "estimated expansion not above 1 - eps within the translates used";
  return out;
}

// ---------------------------------------------------------------------------
// Shrinking the rational spectrum

ShrinkResult shrink_rational_spectrum(const FiniteSystem& sys, const FiniteSet& set, const Rational& eps_o) {
  if (eps_o <= 0) throw Error("eps_o must be positive");
  const Rational mu = measure(sys, set);
  if (mu == 0) throw Error("null set");
  const Int& e = sys.exponent();
  Int fact = 1;
  for (std::uint64_t m = 1;; ++m) {
    fact *= static_cast<unsigned long>(m);
    ShrinkResult res;
    res.m = m;
    res.n = gcd(fact, e);
    res.components = ergodic_components_scaled(sys, res.n);
    std::vector<Rational> nu_b;
    Rational trivial_on_sub = 0;
    for (const auto& c : res.components) {
      nu_b.push_back(component_measure(c, set));
      trivial_on_sub += c.weight * nu_b.back() * nu_b.back();
    }
    res.rho = 1 / mu - trivial_on_sub / (mu * mu);
    std::optional<std::size_t> pick;
    if (res.rho == 0) {
      for (std::size_t i = 0; i < nu_b.size(); ++i)
        if (nu_b[i] > 0 && (!pick || nu_b[i] > nu_b[*pick])) pick = i;
    } else {
      for (std::size_t i = 0; i < nu_b.size() && !pick; ++i) {
        if (nu_b[i] == 0) continue;
        const bool in_s1 = 1 / nu_b[i] - 1 >= 3 * res.rho;
        const bool in_s2 = 1 / nu_b[i] >= 3 / mu;
        if (!in_s1 && !in_s2) pick = i;
      }
    }
    if (!pick) throw HardFailure("no admissible component at n = " + res.n.get_str());
    res.component_index = *pick;
    res.nu_b = nu_b[*pick];
    res.rational_mass = 1 / res.nu_b - 1;
    bool first = true;
    for (std::size_t i = 0; i < nu_b.size(); ++i)
      if (nu_b[i] > 0 && (first || res.components[i].weight < res.c)) {
        res.c = res.components[i].weight;
        first = false;
      }
    if (res.rational_mass < eps_o) return res;
    if (res.n == e) throw HardFailure("rational spectrum did not shrink at the group exponent");
  }
}

ShrinkCheck verify_shrink(const FiniteSystem& sys, const FiniteSet& set, const Rational& eps_o,
                          const ShrinkResult& result, std::size_t samples, std::uint64_t seed) {
  ShrinkCheck out;
  if (result.component_index >= result.components.size()) {
    out.failures.push_back("component index out of range");
    return out;
  }
  const auto& comp = result.component();
  const Rational mu = measure(sys, set);
  const Rational nu_b = component_measure(comp, set);
  if (nu_b != result.nu_b) out.failures.push_back("nu(B) differs from the recomputed value");
  if (nu_b == 0 || 1 / nu_b - 1 >= eps_o || result.rational_mass != 1 / nu_b - 1) {
    out.rational_mass_ok = false;
    out.failures.push_back("rational mass is not below eps_o");
  }
  if (!(nu_b >= Rational(1, 3) || mu < 3 * nu_b)) {
    out.component_ok = false;
    out.failures.push_back("nu(B) < 1/3 and mu(B) >= 3 nu(B)");
  }
  if (!divides(result.n, sys.exponent())) out.failures.push_back("n does not divide the exponent");

  std::vector<bool> in(sys.size(), false);
  for (auto x : comp.support) in[x] = true;
  for (std::size_t j = 0; j < sys.rank(); ++j) {
    const auto g = sys.phi(result.n * LatVec::unit(sys.rank(), j));
    for (auto x : comp.support)
      if (!in[sys.add(x, g)]) {
        out.failures.push_back("component is not a coset of n A");
        j = sys.rank();
        break;
      }
  }
  std::optional<Rational> c;
  for (const auto& other : result.components)
    if (component_measure(other, set) > 0 && (!c || other.weight < *c)) c = other.weight;
  if (!c || *c != result.c) out.failures.push_back("c is not the least weight of a component meeting B");

  std::mt19937_64 rng(seed);
  const auto coord = [&] { return Int(static_cast<long>(rng() % 11) - 5); };
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t size = 1 + rng() % 3;
    FiniteSet both(sys.size(), true);
    for (std::size_t i = 0; i < size; ++i) {
      std::vector<Int> v;
      for (std::size_t j = 0; j < sys.rank(); ++j) v.push_back(result.n * coord());
      both = intersect(both, translate(sys, set, sys.phi(LatVec(std::move(v)))));
    }
    ++out.samples;
    if (measure(sys, both) < result.c * component_measure(comp, both)) {
      out.intersections_ok = false;
      out.failures.push_back("intersection inequality fails on sample " + std::to_string(s));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Intersections

Rational intersection_measure(const FiniteSystem& sys, const FiniteSet& set, const Int& n, const LatVec& lambda,
                              const Int& m1, const IntersectionWitness& witness) {
  std::vector<FiniteSystem::Element> shifts;
  shifts.push_back(sys.phi(Int(m1 * n) * lambda));
  for (std::size_t k = 0; k < witness.probe.size(); ++k)
    shifts.push_back(sys.phi(Int(witness.m[k] * n) * lambda + n * witness.probe[k]));
  return intersection_measure(sys, set, shifts);
}

IntersectionResult intersection_theorem_search(const FiniteSystem& sys, const FiniteSet& set, std::size_t p,
                                               std::span<const LatVec> haystack, const ErgodicSetSpec& spec,
                                               std::span<const std::vector<LatVec>> probes) {
  if (p < 2) throw Error("p must be >= 2");
  if (!spec.is_ergodic()) throw Error("ergodic set required, got " + spec.describe());
  if (haystack.empty()) throw Error("empty haystack sample");
  for (const auto& probe : probes) {
    if (probe.size() != p - 1) throw Error("each probe needs p - 1 vectors");
    for (const auto& v : probe)
      if (v.rank() != sys.rank()) throw Error("probe vector has the wrong rank");
  }
  const Rational mu = measure(sys, set);
  if (mu == 0) throw Error("null set");

  IntersectionResult out;
  const Rational eps_target = mu * mu / Rational(18 * static_cast<unsigned long>(p - 1));
  out.eps_o = eps_target / 3;
  out.eps = 2 * eps_target / 3;
  out.shrink = shrink_rational_spectrum(sys, set, out.eps_o);
  out.n = out.shrink.n;
  const auto& comp = out.shrink.component();
  std::vector<bool> in_comp(sys.size(), false);
  for (auto x : comp.support) in_comp[x] = true;
  const auto nu = [&](const FiniteSet& s) {
    unsigned long hits = 0;
    for (auto x : comp.support)
      if (s[x]) ++hits;
    Rational q(Int(hits), Int(static_cast<unsigned long>(comp.support.size())));
    q.canonicalize();
    return q;
  };
  const Rational nu_b = out.shrink.nu_b;

  std::optional<std::size_t> chosen;
  for (std::size_t i = 0; i < haystack.size() && !chosen; ++i) {
    const auto sat = orbit_saturation(sys, set, out.n * haystack[i], spec);
    if (nu(sat.set) > 1 - out.eps) chosen = i;
  }
  if (!chosen) throw HardFailure("no haystack element expands the component");
  out.haystack_index = *chosen;
  out.lambda = haystack[*chosen];
  const auto g = sys.phi(out.n * out.lambda);
  const std::uint64_t ord = sys.order(g);

  // Nonzero members of S, first representative of each residue mod ord(g).
  std::vector<Int> reps;
  {
    std::vector<bool> seen(ord, false);
    const Int mod(std::to_string(ord));
    for (std::uint64_t i = 0; i < 4 * ord + 4; ++i) {
      Int m = spec.member(i);
      if (m == 0) continue;
      const auto res = mod_floor(m, mod).get_ui();
      if (!seen[res]) {
        seen[res] = true;
        reps.push_back(std::move(m));
      }
    }
  }

  bool have_m1 = false;
  for (const auto& m : reps) {
    const auto shifted = translate(sys, set, sys.multiply(m, g));
    if (nu(intersect(set, shifted)) > nu_b * nu_b / 2) {
      out.m1 = m;
      have_m1 = true;
      break;
    }
  }
  if (!have_m1) throw HardFailure("no m1 with nu(B cap m1 lambda.B) > nu(B)^2 / 2");

  const auto m1g = sys.multiply(out.m1, g);
  for (const auto& probe : probes) {
    std::vector<FiniteSystem::Element> offsets;
    for (const auto& v : probe) offsets.push_back(sys.phi(out.n * v));
    bool found = false;
    for (auto x : comp.support) {
      if (!set[x] || !set[sys.add(x, sys.negate(m1g))]) continue;
      IntersectionWitness w;
      w.probe = probe;
      w.point = x;
      for (std::size_t k = 0; k < probe.size(); ++k) {
        bool hit = false;
        for (const auto& m : reps) {
          const auto shift = sys.add(sys.multiply(m, g), offsets[k]);
          if (set[sys.add(x, sys.negate(shift))]) {
            w.m.push_back(m);
            hit = true;
            break;
          }
        }
        if (!hit) break;
      }
      if (w.m.size() != probe.size()) continue;
      w.measure = intersection_measure(sys, set, out.n, out.lambda, out.m1, w);
      if (w.measure <= 0) throw HardFailure("witness intersection is null");
      out.witnesses.push_back(std::move(w));
      found = true;
      break;
    }
    if (!found) throw HardFailure("no witness for a probe within the component");
  }
  return out;
}

}  // namespace latspec
