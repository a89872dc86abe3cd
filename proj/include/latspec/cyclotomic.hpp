#pragma once

#include "latspec/numeric.hpp"

#include <cstdint>
#include <vector>

namespace latspec {

/// Coefficients of the n-th cyclotomic polynomial, lowest degree first.
std::vector<Int> cyclotomic_polynomial(std::uint64_t n);

/// Arithmetic in Z[zeta_e], zeta_e = exp(2 pi i / e). Elements arrive as
/// coefficient vectors in Z[x]/(x^e - 1) and are reduced modulo Phi_e onto the
/// power basis 1, zeta, ..., zeta^{phi(e)-1}.
class CyclotomicField {
 public:
  explicit CyclotomicField(std::uint64_t e);

  std::uint64_t order() const { return e_; }
  std::size_t degree() const { return modulus_.size() - 1; }

  /// Reduced coefficients (length degree()).
  std::vector<Int> reduce(const std::vector<std::int64_t>& poly) const;
  /// An element is rational iff its reduced form is constant.
  static bool is_rational(const std::vector<Int>& reduced);

  /// Numeric value of sum_j poly[j] zeta^j (real part) and a bound on its error.
  static double evaluate_real(const std::vector<std::int64_t>& poly, double* error_bound = nullptr);

 private:
  std::uint64_t e_;
  std::vector<Int> modulus_;
};

}  // namespace latspec
