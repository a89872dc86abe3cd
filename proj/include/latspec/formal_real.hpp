#pragma once

#include "latspec/numeric.hpp"

#include <map>
#include <string>

namespace latspec {

/// q + sum_j c_j * alpha_j with rational q, c_j. The declared symbols alpha_j
/// are treated as rationally independent together with 1.
class FormalReal {
 public:
  FormalReal() = default;
  FormalReal(Rational q) : rational_(std::move(q)) {}  // NOLINT(google-explicit-constructor)
  static FormalReal symbol(const std::string& name, Rational coefficient = 1);

  const Rational& rational_part() const { return rational_; }
  /// Nonzero coefficients only.
  const std::map<std::string, Rational>& coefficients() const { return coeffs_; }
  Rational coefficient(const std::string& name) const;

  bool is_rational() const { return coeffs_.empty(); }
  bool is_integer() const { return coeffs_.empty() && latspec::is_integer(rational_); }
  bool is_zero() const { return coeffs_.empty() && rational_ == 0; }

  FormalReal& operator+=(const FormalReal& other);
  FormalReal& operator-=(const FormalReal& other);
  FormalReal& operator*=(const Rational& scalar);

  friend FormalReal operator+(FormalReal a, const FormalReal& b) { return a += b; }
  friend FormalReal operator-(FormalReal a, const FormalReal& b) { return a -= b; }
  friend FormalReal operator*(const Rational& s, FormalReal a) { return a *= s; }
  friend bool operator==(const FormalReal& a, const FormalReal& b) {
    return a.rational_ == b.rational_ && a.coeffs_ == b.coeffs_;
  }

  /// Numeric value given symbol values; throws on an unknown symbol.
  double evaluate(const std::map<std::string, double>& values) const;

  /// e.g. "1/2 + 3*alpha - beta".
  std::string to_string() const;
  /// Parses sums of terms "q", "q*name", "name", "q name"; q may be "a/b".
  static FormalReal parse(const std::string& text);

 private:
  Rational rational_ = 0;
  std::map<std::string, Rational> coeffs_;
};

}  // namespace latspec
