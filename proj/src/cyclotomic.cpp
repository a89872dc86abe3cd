#include "latspec/cyclotomic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace latspec {

namespace {

// a / b for monic b, exact.
std::vector<Int> divide_exact(std::vector<Int> a, const std::vector<Int>& b) {
  const std::size_t db = b.size() - 1;
  if (a.size() < b.size()) throw HardFailure("cyclotomic division degree mismatch");
  std::vector<Int> q(a.size() - db, Int(0));
  for (std::size_t i = a.size(); i-- > db;) {
    const Int c = a[i];
    if (c == 0) continue;
    q[i - db] = c;
    for (std::size_t j = 0; j <= db; ++j) a[i - db + j] -= c * b[j];
  }
  for (std::size_t i = 0; i < db; ++i)
    if (a[i] != 0) throw HardFailure("cyclotomic division left a remainder");
  return q;
}

}  // namespace

std::vector<Int> cyclotomic_polynomial(std::uint64_t n) {
  if (n == 0) throw Error("cyclotomic index must be positive");
  static std::mutex mutex;
  static std::map<std::uint64_t, std::vector<Int>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  std::vector<Int> p(n + 1, Int(0));
  p[0] = -1;
  p[n] = 1;
  for (std::uint64_t d = 1; d < n; ++d)
    if (n % d == 0) p = divide_exact(std::move(p), cyclotomic_polynomial(d));
  std::lock_guard lock(mutex);
  cache.emplace(n, p);
  return p;
}

CyclotomicField::CyclotomicField(std::uint64_t e) : e_(e), modulus_(cyclotomic_polynomial(e)) {}

std::vector<Int> CyclotomicField::reduce(const std::vector<std::int64_t>& poly) const {
  if (poly.size() > e_) throw Error("polynomial longer than the field order");
  const std::size_t deg = degree();
  std::vector<Int> a(std::max(poly.size(), deg), Int(0));
  for (std::size_t i = 0; i < poly.size(); ++i) a[i] = from_int64(poly[i]);
  for (std::size_t i = a.size(); i-- > deg;) {
    if (a[i] == 0) continue;
    const Int c = a[i];
    for (std::size_t j = 0; j <= deg; ++j) a[i - deg + j] -= c * modulus_[j];
  }
  a.resize(deg);
  return a;
}

bool CyclotomicField::is_rational(const std::vector<Int>& reduced) {
  for (std::size_t i = 1; i < reduced.size(); ++i)
    if (reduced[i] != 0) return false;
  return true;
}

double CyclotomicField::evaluate_real(const std::vector<std::int64_t>& poly, double* error_bound) {
  const double e = static_cast<double>(poly.size());
  double sum = 0, mag = 0;
  for (std::size_t j = 0; j < poly.size(); ++j) {
    if (poly[j] == 0) continue;
    const double c = static_cast<double>(poly[j]);
    sum += c * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / e);
    mag += std::abs(c);
  }
  if (error_bound) *error_bound = 1e-13 * (mag + 1.0);
  return sum;
}

}  // namespace latspec
