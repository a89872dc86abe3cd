#include "latspec/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace latspec {

// ---------------------------------------------------------------------------
// ErgodicSetSpec

ErgodicSetSpec ErgodicSetSpec::progression(Int a, Int b) {
  if (b == 0) throw Error("progression step must be nonzero");
  return {Kind::Progression, std::move(a), std::move(b)};
}

Int ErgodicSetSpec::member(std::uint64_t i) const {
  const Int idx(std::to_string(i));
  switch (kind) {
    case Kind::Integers:
      if (i == 0) return 0;
      return (i % 2 == 1) ? Int((idx + 1) / 2) : Int(-(idx / 2));
    case Kind::Interval:
      return idx;
    case Kind::Progression:
      return offset + step * idx;
  }
  return 0;
}

bool ErgodicSetSpec::is_ergodic() const {
  return kind != Kind::Progression || step == 1 || step == -1;
}

std::string ErgodicSetSpec::describe() const {
  switch (kind) {
    case Kind::Integers:
      return "integers";
    case Kind::Interval:
      return "interval";
    case Kind::Progression:
      return "progression " + offset.get_str() + " + " + step.get_str() + "*n";
  }
  return "";
}

// ---------------------------------------------------------------------------
// FiniteSystem

namespace {

constexpr std::size_t kMaxCarrier = std::size_t{1} << 24;

void init_layout(std::vector<Int>& moduli, std::vector<std::uint64_t>& small, std::vector<std::size_t>& strides,
                 std::size_t& size, Int& exponent) {
  Int total = 1;
  exponent = 1;
  for (const auto& d : moduli) {
    total *= d;
    exponent = lcm(exponent, d);
  }
  if (total > Int(std::to_string(kMaxCarrier)))
    throw Error("finite system too large: |A| = " + total.get_str() + " exceeds " + std::to_string(kMaxCarrier));
  size = total.get_ui();
  small.clear();
  for (const auto& d : moduli) small.push_back(d.get_ui());
  strides.assign(moduli.size(), 1);
  for (std::size_t i = moduli.size(); i-- > 1;) strides[i - 1] = strides[i] * small[i];
}

}  // namespace

FiniteSystem FiniteSystem::from_sublattice(const SubLattice& lattice) {
  const QuotientStructure q = snf(lattice.basis());
  const std::size_t r = lattice.rank();
  FiniteSystem sys;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < r; ++i)
    if (q.invariant_factors[i] != 1) {
      keep.push_back(i);
      sys.moduli_.push_back(q.invariant_factors[i]);
    }
  init_layout(sys.moduli_, sys.small_moduli_, sys.strides_, sys.size_, sys.exponent_);
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<Int> residues;
    for (std::size_t i : keep) residues.push_back(mod_floor(q.to_normal(i, j), q.invariant_factors[i]));
    sys.images_.push_back(sys.encode(residues));
  }
  sys.kernel_ = lattice;
  return sys;
}

FiniteSystem FiniteSystem::from_action(std::vector<Int> moduli, std::vector<std::vector<Int>> images) {
  if (images.empty()) throw Error("action needs at least one generator image (rank >= 1)");
  FiniteSystem sys;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    if (moduli[i] < 1) throw Error("moduli must be positive");
    if (moduli[i] != 1) {
      keep.push_back(i);
      sys.moduli_.push_back(moduli[i]);
    }
  }
  init_layout(sys.moduli_, sys.small_moduli_, sys.strides_, sys.size_, sys.exponent_);
  for (const auto& img : images) {
    if (img.size() != moduli.size())
      throw Error("generator image has " + std::to_string(img.size()) + " residues, expected " +
                  std::to_string(moduli.size()));
    std::vector<Int> residues;
    for (std::size_t i : keep) residues.push_back(mod_floor(img[i], moduli[i]));
    sys.images_.push_back(sys.encode(residues));
  }
  if (sys.subgroup(sys.images_).size() != sys.size_) throw Error("action is not onto: the system is not ergodic");
  return sys;
}

std::vector<Int> FiniteSystem::decode(Element a) const {
  std::vector<Int> out(moduli_.size());
  for (std::size_t i = 0; i < moduli_.size(); ++i) {
    out[i] = static_cast<unsigned long>((a / strides_[i]) % small_moduli_[i]);
  }
  return out;
}

FiniteSystem::Element FiniteSystem::encode(std::span<const Int> residues) const {
  if (residues.size() != moduli_.size()) throw Error("element has the wrong number of residues");
  Element a = 0;
  for (std::size_t i = 0; i < moduli_.size(); ++i)
    a += mod_floor(residues[i], moduli_[i]).get_ui() * strides_[i];
  return a;
}

FiniteSystem::Element FiniteSystem::add(Element a, Element b) const {
  Element out = 0;
  for (std::size_t i = 0; i < small_moduli_.size(); ++i) {
    const std::uint64_t d = small_moduli_[i];
    const std::uint64_t x = (a / strides_[i]) % d, y = (b / strides_[i]) % d;
    out += ((x + y) % d) * strides_[i];
  }
  return out;
}

FiniteSystem::Element FiniteSystem::negate(Element a) const {
  Element out = 0;
  for (std::size_t i = 0; i < small_moduli_.size(); ++i) {
    const std::uint64_t d = small_moduli_[i];
    const std::uint64_t x = (a / strides_[i]) % d;
    out += ((d - x) % d) * strides_[i];
  }
  return out;
}

FiniteSystem::Element FiniteSystem::multiply(const Int& k, Element a) const {
  Element out = 0;
  for (std::size_t i = 0; i < small_moduli_.size(); ++i) {
    const std::uint64_t d = small_moduli_[i];
    const std::uint64_t x = (a / strides_[i]) % d;
    const std::uint64_t kk = mod_floor(k, moduli_[i]).get_ui();
    out += static_cast<std::uint64_t>((static_cast<unsigned __int128>(kk) * x) % d) * strides_[i];
  }
  return out;
}

FiniteSystem::Element FiniteSystem::phi(const LatVec& v) const {
  if (v.rank() != rank())
    throw Error("vector " + v.to_string() + " has rank " + std::to_string(v.rank()) + ", system has rank " +
                std::to_string(rank()));
  Element out = 0;
  for (std::size_t j = 0; j < rank(); ++j) out = add(out, multiply(v[j], images_[j]));
  return out;
}

std::uint64_t FiniteSystem::order(Element a) const {
  std::uint64_t ord = 1;
  for (std::size_t i = 0; i < small_moduli_.size(); ++i) {
    const std::uint64_t d = small_moduli_[i];
    const std::uint64_t x = (a / strides_[i]) % d;
    ord = std::lcm(ord, d / std::gcd(d, x));
  }
  return ord;
}

std::vector<FiniteSystem::Element> FiniteSystem::subgroup(std::span<const Element> generators) const {
  std::vector<bool> seen(size_, false);
  std::vector<Element> out{0};
  seen[0] = true;
  for (std::size_t head = 0; head < out.size(); ++head)
    for (Element g : generators) {
      const Element y = add(out[head], g);
      if (!seen[y]) {
        seen[y] = true;
        out.push_back(y);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::string FiniteSystem::describe() const {
  if (moduli_.empty()) return "trivial";
  std::string s;
  for (std::size_t i = 0; i < moduli_.size(); ++i) s += (i ? " x Z/" : "Z/") + moduli_[i].get_str();
  return s;
}

// ---------------------------------------------------------------------------
// Finite sets

FiniteSet make_set(const FiniteSystem& sys, std::span<const FiniteSystem::Element> elements) {
  FiniteSet s(sys.size(), false);
  for (auto e : elements) {
    if (e >= sys.size()) throw Error("element index out of range");
    s[e] = true;
  }
  return s;
}

FiniteSet full_set(const FiniteSystem& sys) { return FiniteSet(sys.size(), true); }

std::size_t count(const FiniteSet& set) { return static_cast<std::size_t>(std::count(set.begin(), set.end(), true)); }

Rational measure(const FiniteSystem& sys, const FiniteSet& set) {
  if (set.size() != sys.size()) throw Error("set does not belong to this system");
  Rational q(Int(static_cast<unsigned long>(count(set))), Int(static_cast<unsigned long>(sys.size())));
  q.canonicalize();
  return q;
}

FiniteSet translate(const FiniteSystem& sys, const FiniteSet& set, FiniteSystem::Element g) {
  FiniteSet out(sys.size(), false);
  for (std::size_t a = 0; a < set.size(); ++a)
    if (set[a]) out[sys.add(a, g)] = true;
  return out;
}

FiniteSet intersect(const FiniteSet& a, const FiniteSet& b) {
  FiniteSet out(a.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

Rational intersection_measure(const FiniteSystem& sys, const FiniteSet& set,
                              std::span<const FiniteSystem::Element> shifts) {
  std::size_t hits = 0;
  for (std::size_t x = 0; x < sys.size(); ++x) {
    if (!set[x]) continue;
    bool all = true;
    for (auto g : shifts)
      if (!set[sys.add(x, sys.negate(g))]) {
        all = false;
        break;
      }
    if (all) ++hits;
  }
  Rational q(Int(static_cast<unsigned long>(hits)), Int(static_cast<unsigned long>(sys.size())));
  q.canonicalize();
  return q;
}

namespace {

// Residues m mod ord(g) reached by S (or its first `horizon` members).
std::vector<std::uint64_t> reached_residues(const ErgodicSetSpec& spec, std::uint64_t ord,
                                            std::optional<std::uint64_t> horizon) {
  const Int mod(std::to_string(ord));
  std::uint64_t limit = 2 * ord + 1;
  if (horizon) limit = std::min(limit, *horizon);
  std::vector<bool> seen(ord, false);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < limit; ++i) {
    const std::uint64_t res = mod_floor(spec.member(i), mod).get_ui();
    if (!seen[res]) {
      seen[res] = true;
      out.push_back(res);
    }
  }
  return out;
}

}  // namespace

SaturationResult orbit_saturation(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                  const ErgodicSetSpec& spec, std::optional<std::uint64_t> horizon) {
  if (set.size() != sys.size()) throw Error("set does not belong to this system");
  const auto g = sys.phi(lambda);
  const std::uint64_t ord = sys.order(g);
  SaturationResult out{FiniteSet(sys.size(), false), 0};
  for (auto res : reached_residues(spec, ord, horizon)) {
    const auto shift = sys.multiply(Int(std::to_string(res)), g);
    for (std::size_t a = 0; a < set.size(); ++a)
      if (set[a]) out.set[sys.add(a, shift)] = true;
  }
  out.measure = measure(sys, out.set);
  return out;
}

bool is_ergodic_direction(const FiniteSystem& sys, const LatVec& lambda) {
  if (lambda.is_zero()) throw Error("direction must be nonzero");
  return sys.order(sys.phi(lambda)) == sys.size();
}

ExpansionMaximum max_directional_expansion(const FiniteSystem& sys, const FiniteSet& set,
                                           std::span<const LatVec> candidates) {
  if (candidates.empty()) throw Error("no candidate directions");
  std::map<FiniteSystem::Element, Rational> cache;
  std::optional<ExpansionMaximum> best;
  for (const auto& lambda : candidates) {
    if (lambda.is_zero()) throw Error("candidate directions must be nonzero");
    const auto g = sys.phi(lambda);
    auto it = cache.find(g);
    if (it == cache.end()) it = cache.emplace(g, orbit_saturation(sys, set, lambda).measure).first;
    const Rational& m = it->second;
    if (!best || m > best->measure || (m == best->measure && lambda < best->argmax)) best = {m, lambda};
  }
  return *best;
}

std::vector<LatVec> candidate_box(std::size_t rank, std::int64_t radius) {
  if (rank == 0) throw Error("rank must be >= 1");
  if (radius < 0) throw Error("radius must be nonnegative");
  std::vector<LatVec> out;
  std::vector<std::int64_t> cur(rank, -radius);
  for (;;) {
    if (std::any_of(cur.begin(), cur.end(), [](auto c) { return c != 0; })) {
      std::vector<Int> coords;
      for (auto c : cur) coords.push_back(from_int64(c));
      out.emplace_back(std::move(coords));
    }
    std::size_t k = rank;
    for (;;) {
      if (k == 0) return out;
      --k;
      if (cur[k] < radius) {
        ++cur[k];
        break;
      }
      cur[k] = -radius;
    }
  }
}

namespace {

std::vector<ErgodicComponent> cosets_of(const FiniteSystem& sys, const std::vector<FiniteSystem::Element>& h) {
  std::vector<ErgodicComponent> out;
  std::vector<bool> assigned(sys.size(), false);
  Rational weight(Int(static_cast<unsigned long>(h.size())), Int(static_cast<unsigned long>(sys.size())));
  weight.canonicalize();
  for (std::size_t a = 0; a < sys.size(); ++a) {
    if (assigned[a]) continue;
    ErgodicComponent c;
    for (auto x : h) {
      const auto y = sys.add(a, x);
      assigned[y] = true;
      c.support.push_back(y);
    }
    std::sort(c.support.begin(), c.support.end());
    c.weight = weight;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<ErgodicComponent> ergodic_components(const FiniteSystem& sys, const SubLattice& lattice) {
  if (lattice.rank() != sys.rank()) throw Error("sublattice rank does not match the system");
  std::vector<FiniteSystem::Element> gens;
  for (std::size_t j = 0; j < lattice.rank(); ++j) gens.push_back(sys.phi(lattice.basis().column(j)));
  return cosets_of(sys, sys.subgroup(gens));
}

std::vector<ErgodicComponent> ergodic_components_scaled(const FiniteSystem& sys, const Int& n) {
  if (n <= 0) throw Error("scale must be positive");
  std::vector<FiniteSystem::Element> gens;
  for (auto g : sys.generator_images()) gens.push_back(sys.multiply(n, g));
  return cosets_of(sys, sys.subgroup(gens));
}

Rational component_measure(const ErgodicComponent& component, const FiniteSet& set) {
  std::size_t hits = 0;
  for (auto x : component.support)
    if (set[x]) ++hits;
  Rational q(Int(static_cast<unsigned long>(hits)), Int(static_cast<unsigned long>(component.support.size())));
  q.canonicalize();
  return q;
}

Rational birkhoff_annihilator_average(const FiniteSystem& sys, const FiniteSet& set, const LatVec& lambda,
                                      std::uint64_t horizon) {
  if (horizon == 0) throw Error("horizon must be >= 1");
  const auto g = sys.phi(lambda);
  const std::uint64_t ord = sys.order(g);
  std::vector<std::uint64_t> per(ord);
  FiniteSystem::Element shift = 0;
  for (std::uint64_t j = 0; j < ord; ++j) {
    std::uint64_t hits = 0;
    for (std::size_t a = 0; a < sys.size(); ++a)
      if (set[a] && set[sys.add(a, shift)]) ++hits;
    per[j] = hits;
    shift = sys.add(shift, g);
  }
  Int total = 0;
  const std::uint64_t full = horizon / ord, rest = horizon % ord;
  Int period = 0;
  for (auto h : per) period += static_cast<unsigned long>(h);
  total = period * Int(std::to_string(full));
  for (std::uint64_t j = 0; j < rest; ++j) total += static_cast<unsigned long>(per[j]);
  Rational q(total, Int(std::to_string(horizon)) * static_cast<unsigned long>(sys.size()));
  q.canonicalize();
  return q;
}

// ---------------------------------------------------------------------------
// Boxes

Rational Box::volume() const {
  Rational v = 1;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

BoxSet BoxSet::full(std::size_t dim) {
  Box b;
  b.lower.assign(dim, Rational(0));
  b.upper.assign(dim, Rational(1));
  return from_boxes(dim, {b});
}

BoxSet BoxSet::from_boxes(std::size_t dim, std::vector<Box> boxes) {
  if (dim == 0) throw Error("torus dimension must be >= 1");
  for (const auto& b : boxes) {
    if (b.lower.size() != dim || b.upper.size() != dim) throw Error("box has the wrong dimension");
    for (std::size_t i = 0; i < dim; ++i)
      if (b.lower[i] < 0 || b.upper[i] > 1 || !(b.lower[i] < b.upper[i]))
        throw Error("box sides must satisfy 0 <= lower < upper <= 1");
  }
  for (std::size_t a = 0; a < boxes.size(); ++a)
    for (std::size_t c = a + 1; c < boxes.size(); ++c) {
      bool overlap = true;
      for (std::size_t i = 0; i < dim && overlap; ++i)
        overlap = std::max(boxes[a].lower[i], boxes[c].lower[i]) < std::min(boxes[a].upper[i], boxes[c].upper[i]);
      if (overlap) throw Error("boxes " + std::to_string(a) + " and " + std::to_string(c) + " overlap");
    }
  return {dim, std::move(boxes)};
}

Rational BoxSet::measure() const {
  Rational m = 0;
  for (const auto& b : boxes) m += b.volume();
  return m;
}

// ---------------------------------------------------------------------------
// Kronecker systems

namespace {

std::set<std::string> symbols_of(std::span<const std::vector<FormalReal>> columns) {
  std::set<std::string> names;
  for (const auto& col : columns)
    for (const auto& f : col)
      for (const auto& [name, c] : f.coefficients()) names.insert(name);
  return names;
}

// Basis (columns, s x t) of { k : symbol parts of sum_i k_i v_i[c] vanish for all c }.
IntMatrix symbol_kernel(std::size_t s, std::span<const std::vector<FormalReal>> columns) {
  const auto names = symbols_of(columns);
  std::vector<std::vector<Int>> rows;
  for (const auto& col : columns) {
    if (col.size() != s) throw Error("frequency vector has the wrong length");
    for (const auto& name : names) {
      Int den = 1;
      for (const auto& f : col) den = lcm(den, f.coefficient(name).get_den());
      std::vector<Int> row;
      bool nonzero = false;
      for (const auto& f : col) {
        Rational scaled = f.coefficient(name) * den;
        row.push_back(scaled.get_num());
        nonzero = nonzero || scaled != 0;
      }
      if (nonzero) rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) return IntMatrix::identity(s);
  const auto kernel = integer_kernel(IntMatrix::from_rows(rows));
  IntMatrix out(s, kernel.size());
  for (std::size_t j = 0; j < kernel.size(); ++j) out.set_column(j, kernel[j]);
  return out;
}

std::vector<LatVec> columns_of(const IntMatrix& m) {
  std::vector<LatVec> out;
  for (std::size_t j = 0; j < m.cols(); ++j) out.push_back(m.column(j));
  return out;
}

}  // namespace

std::vector<LatVec> integral_lattice(std::size_t s, std::span<const std::vector<FormalReal>> columns) {
  const IntMatrix kb = symbol_kernel(s, columns);
  const std::size_t t = kb.cols();
  if (t == 0) return {};
  const std::size_t m = columns.size();
  if (m == 0) return columns_of(kb);

  // R(c, j) = sum_i kb(i, j) * q(c, i); solve D R y = 0 (mod D).
  std::vector<std::vector<Rational>> r(m, std::vector<Rational>(t, Rational(0)));
  Int den = 1;
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t j = 0; j < t; ++j) {
      for (std::size_t i = 0; i < s; ++i) r[c][j] += Rational(kb(i, j)) * columns[c][i].rational_part();
      den = lcm(den, r[c][j].get_den());
    }
  if (den == 1) return columns_of(kb);
  IntMatrix sys(m, t + m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t j = 0; j < t; ++j) sys(c, j) = Rational(r[c][j] * den).get_num();
    sys(c, t + c) = den;
  }
  const auto kernel = integer_kernel(sys);
  IntMatrix proj(t, kernel.size());
  for (std::size_t q = 0; q < kernel.size(); ++q)
    for (std::size_t j = 0; j < t; ++j) proj(j, q) = kernel[q][j];
  const ColumnEchelon ech = column_echelon(proj);
  if (ech.rank != t) throw HardFailure("integral lattice projection lost rank");
  IntMatrix ybasis(t, t);
  for (std::size_t j = 0; j < t; ++j) ybasis.set_column(j, ech.reduced.column(j));
  return columns_of(kb * ybasis);
}

KroneckerSystem::KroneckerSystem(std::size_t rank, std::vector<std::vector<FormalReal>> theta,
                                 std::map<std::string, double> symbol_values)
    : rank_(rank), theta_(std::move(theta)), symbols_(std::move(symbol_values)) {
  if (rank_ == 0) throw Error("rank must be >= 1");
  if (theta_.empty()) throw Error("torus dimension must be >= 1");
  for (const auto& row : theta_) {
    if (row.size() != rank_) throw Error("frequency matrix must be s x r");
    for (const auto& f : row)
      for (const auto& [name, c] : f.coefficients())
        if (!symbols_.count(name)) throw Error("undeclared symbol '" + name + "'");
  }
}

std::vector<FormalReal> KroneckerSystem::frequency(const LatVec& lambda) const {
  if (lambda.rank() != rank_) throw Error("direction has the wrong rank");
  std::vector<FormalReal> out(theta_.size());
  for (std::size_t i = 0; i < theta_.size(); ++i)
    for (std::size_t j = 0; j < rank_; ++j) out[i] += Rational(lambda[j]) * theta_[i][j];
  return out;
}

FormalReal KroneckerSystem::pairing(std::span<const Int> k, const LatVec& lambda) const {
  if (k.size() != theta_.size()) throw Error("frequency vector has the wrong length");
  const auto f = frequency(lambda);
  FormalReal out;
  for (std::size_t i = 0; i < k.size(); ++i) out += Rational(k[i]) * f[i];
  return out;
}

namespace {

std::vector<std::vector<FormalReal>> theta_columns(const std::vector<std::vector<FormalReal>>& theta,
                                                   std::size_t rank) {
  std::vector<std::vector<FormalReal>> cols(rank);
  for (std::size_t j = 0; j < rank; ++j)
    for (const auto& row : theta) cols[j].push_back(row[j]);
  return cols;
}

}  // namespace

bool KroneckerSystem::is_ergodic() const { return !non_ergodicity_witness().has_value(); }

std::optional<LatVec> KroneckerSystem::non_ergodicity_witness() const {
  const auto cols = theta_columns(theta_, rank_);
  const auto lattice = integral_lattice(theta_.size(), cols);
  if (lattice.empty()) return std::nullopt;
  return lattice.front();
}

std::vector<LatVec> KroneckerSystem::annihilating_lattice(const LatVec& lambda) const {
  const std::vector<std::vector<FormalReal>> cols{frequency(lambda)};
  return integral_lattice(theta_.size(), cols);
}

std::vector<LatVec> KroneckerSystem::rational_lattice() const {
  const auto cols = theta_columns(theta_, rank_);
  return columns_of(symbol_kernel(theta_.size(), cols));
}

bool KroneckerSystem::is_trivial_character(std::span<const Int> k) const {
  for (std::size_t j = 0; j < rank_; ++j)
    if (!pairing(k, LatVec::unit(rank_, j)).is_integer()) return false;
  return true;
}

bool KroneckerSystem::is_rational_character(std::span<const Int> k) const {
  for (std::size_t j = 0; j < rank_; ++j)
    if (!pairing(k, LatVec::unit(rank_, j)).is_rational()) return false;
  return true;
}

std::string KroneckerSystem::describe() const {
  std::string s = "torus dim " + std::to_string(theta_.size()) + ", theta [";
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    s += i ? "; " : "";
    for (std::size_t j = 0; j < rank_; ++j) s += (j ? ", " : "") + theta_[i][j].to_string();
  }
  return s + "]";
}

bool is_ergodic_direction(const KroneckerSystem& sys, const LatVec& lambda) {
  if (lambda.is_zero()) throw Error("direction must be nonzero");
  return sys.annihilating_lattice(lambda).empty();
}

namespace {

struct RealBox {
  std::vector<double> lo, hi;
};

// Lebesgue measure of a union of boxes by recursive slab sweep.
double union_measure(const std::vector<const RealBox*>& boxes, std::size_t axis, std::size_t dim) {
  if (boxes.empty()) return 0;
  std::vector<double> cuts;
  for (const auto* b : boxes) {
    cuts.push_back(b->lo[axis]);
    cuts.push_back(b->hi[axis]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    std::vector<const RealBox*> active;
    for (const auto* box : boxes)
      if (box->lo[axis] <= a && box->hi[axis] >= b) active.push_back(box);
    if (active.empty()) continue;
    total += (b - a) * (axis + 1 == dim ? 1.0 : union_measure(active, axis + 1, dim));
  }
  return total;
}

void push_translate(const Box& box, const std::vector<double>& shift, std::vector<RealBox>& out) {
  const std::size_t s = shift.size();
  std::vector<std::vector<std::pair<double, double>>> pieces(s);
  for (std::size_t i = 0; i < s; ++i) {
    const double lo = box.lower[i].get_d() + shift[i];
    const double hi = box.upper[i].get_d() + shift[i];
    if (hi <= 1.0) {
      pieces[i].push_back({lo, hi});
    } else if (lo >= 1.0) {
      pieces[i].push_back({lo - 1.0, hi - 1.0});
    } else {
      pieces[i].push_back({lo, 1.0});
      pieces[i].push_back({0.0, hi - 1.0});
    }
  }
  std::vector<std::size_t> pick(s, 0);
  for (;;) {
    RealBox rb;
    for (std::size_t i = 0; i < s; ++i) {
      rb.lo.push_back(pieces[i][pick[i]].first);
      rb.hi.push_back(pieces[i][pick[i]].second);
    }
    out.push_back(std::move(rb));
    std::size_t i = 0;
    while (i < s && ++pick[i] == pieces[i].size()) pick[i++] = 0;
    if (i == s) break;
  }
}

}  // namespace

SaturationEstimate orbit_saturation(const KroneckerSystem& sys, const BoxSet& set, const LatVec& lambda,
                                    const ErgodicSetSpec& spec, std::size_t translates) {
  if (set.dim != sys.torus_dim()) throw Error("box set dimension does not match the torus");
  if (translates == 0) throw Error("need at least one translate");
  const auto freq = sys.frequency(lambda);
  std::vector<double> step;
  for (const auto& f : freq) step.push_back(f.evaluate(sys.symbol_values()));
  SaturationEstimate est;
  std::vector<RealBox> pieces;
  std::size_t next_check = 1;
  for (std::size_t i = 0; i < translates; ++i) {
    const double m = spec.member(i).get_d();
    std::vector<double> shift;
    for (double v : step) {
      double t = std::fmod(m * v, 1.0);
      if (t < 0) t += 1.0;
      shift.push_back(t);
    }
    for (const auto& b : set.boxes) push_translate(b, shift, pieces);
    est.translates = i + 1;
    if (i + 1 == next_check || i + 1 == translates) {
      std::vector<const RealBox*> ptrs;
      for (const auto& p : pieces) ptrs.push_back(&p);
      est.measure = std::min(1.0, union_measure(ptrs, 0, set.dim));
      if (est.measure >= 1.0) break;
      next_check *= 2;
    }
  }
  return est;
}

}  // namespace latspec
