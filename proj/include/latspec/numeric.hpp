#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace latspec {

using Int = mpz_class;
using Rational = mpq_class;

/// Raised for violated preconditions and malformed input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a search that a theorem guarantees to succeed comes up empty.
/// Seeing one of these means the library is wrong, not the input.
class HardFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline Int gcd(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Int lcm(const Int& a, const Int& b) {
  Int l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

/// Extended gcd: returns g = gcd(a, b) >= 0 and sets s, t with s*a + t*b = g.
inline Int xgcd(const Int& a, const Int& b, Int& s, Int& t) {
  Int g;
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

/// Least nonnegative residue of a mod m (m > 0).
inline Int mod_floor(const Int& a, const Int& m) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline bool divides(const Int& d, const Int& a) {
  return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0;
}

inline bool fits_int64(const Int& a) {
  return mpz_sizeinbase(a.get_mpz_t(), 2) <= 62;
}

inline std::int64_t to_int64(const Int& a) {
  if (!fits_int64(a)) throw Error("integer out of 64-bit range: " + a.get_str());
  return static_cast<std::int64_t>(a.get_si());
}

inline Int from_int64(std::int64_t v) {
  Int out;
  mpz_set_si(out.get_mpz_t(), static_cast<long>(v));
  return out;
}

inline Int parse_int(std::string_view text) {
  Int out;
  if (text.empty() || out.set_str(std::string(text), 10) != 0) {
    throw Error("not an integer: '" + std::string(text) + "'");
  }
  return out;
}

/// Accepts "p", "p/q" and "-p/q"; the result is canonicalized.
inline Rational parse_rational(std::string_view text) {
  Rational out;
  if (text.empty() || out.set_str(std::string(text), 10) != 0) {
    throw Error("not a rational: '" + std::string(text) + "'");
  }
  if (out.get_den() == 0) throw Error("zero denominator: '" + std::string(text) + "'");
  out.canonicalize();
  return out;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline std::string to_string(const Int& a) { return a.get_str(); }
inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace latspec
