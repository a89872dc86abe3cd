#pragma once

#include "latspec/numeric.hpp"

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace latspec {

/// A point of the free abelian group Z^r.
class LatVec {
 public:
  LatVec() = default;
  explicit LatVec(std::vector<Int> coords);
  LatVec(std::initializer_list<long> coords);

  static LatVec zero(std::size_t rank);
  static LatVec unit(std::size_t rank, std::size_t axis);

  std::size_t rank() const { return coords_.size(); }
  const std::vector<Int>& coords() const { return coords_; }
  const Int& operator[](std::size_t i) const { return coords_[i]; }
  Int& operator[](std::size_t i) { return coords_[i]; }
  bool is_zero() const;

  LatVec& operator+=(const LatVec& other);
  LatVec& operator-=(const LatVec& other);
  LatVec& operator*=(const Int& scalar);

  friend LatVec operator+(LatVec a, const LatVec& b) { return a += b; }
  friend LatVec operator-(LatVec a, const LatVec& b) { return a -= b; }
  friend LatVec operator*(const Int& s, LatVec v) { return v *= s; }
  friend LatVec operator-(LatVec v);

  friend bool operator==(const LatVec& a, const LatVec& b) { return a.coords_ == b.coords_; }
  /// Lexicographic; shorter vectors sort first.
  friend bool operator<(const LatVec& a, const LatVec& b);

  std::string to_string() const;

 private:
  std::vector<Int> coords_;
};

std::ostream& operator<<(std::ostream& os, const LatVec& v);

/// Dense integer matrix, row-major. Sublattices are generated by columns.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

  static IntMatrix identity(std::size_t n);
  static IntMatrix diagonal(std::span<const Int> entries);
  static IntMatrix from_rows(const std::vector<std::vector<Int>>& rows);
  static IntMatrix from_columns(std::span<const LatVec> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Int& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Int& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  LatVec column(std::size_t j) const;
  LatVec row(std::size_t i) const;
  void set_column(std::size_t j, const LatVec& v);

  // Elementary operations; all of them are unimodular.
  void swap_columns(std::size_t a, std::size_t b);
  void swap_rows(std::size_t a, std::size_t b);
  void negate_column(std::size_t j);
  void negate_row(std::size_t i);
  /// column dst += factor * column src
  void add_column_multiple(std::size_t dst, std::size_t src, const Int& factor);
  /// row dst += factor * row src
  void add_row_multiple(std::size_t dst, std::size_t src, const Int& factor);

  IntMatrix transpose() const;
  LatVec apply(const LatVec& v) const;

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string to_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Int> data_;
};

std::ostream& operator<<(std::ostream& os, const IntMatrix& m);

/// gcd of the coordinates; 0 for the zero vector.
Int content(const LatVec& v);
bool is_primitive(const LatVec& v);

/// Exact determinant by fraction-free (Bareiss) elimination.
Int det_exact(const IntMatrix& m);

/// Column echelon form of an arbitrary integer matrix: reduced = m * transform,
/// transform unimodular. The first `rank` columns carry the pivots (row indices
/// in `pivot_rows`), remaining columns are zero, so the trailing columns of
/// `transform` form a basis of the integer kernel.
struct ColumnEchelon {
  IntMatrix reduced;
  IntMatrix transform;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_rows;
};

ColumnEchelon column_echelon(const IntMatrix& m);

/// Basis of { x in Z^cols : m x = 0 }, as columns.
std::vector<LatVec> integer_kernel(const IntMatrix& m);

/// Canonical column Hermite normal form: H = M * U, H lower triangular in its
/// leading r x r block with positive diagonal and 0 <= H(i,j) < H(i,i) for j < i;
/// the remaining k - r columns are zero.
struct HermiteForm {
  IntMatrix basis;
  IntMatrix transform;
};

HermiteForm hnf(const IntMatrix& m);

/// to_normal * M * from_normal = diag(invariant_factors), d_1 | d_2 | ... | d_r.
struct QuotientStructure {
  std::vector<Int> invariant_factors;
  IntMatrix to_normal;
  IntMatrix from_normal;
};

QuotientStructure snf(const IntMatrix& m);

/// Unimodular matrix with determinant 1 whose first column is v.
IntMatrix complete_to_basis(const LatVec& v);

/// A finite-index subgroup of Z^r, stored by its r x r Hermite basis.
class SubLattice {
 public:
  /// Columns of `generators` span the subgroup; must have rank r.
  explicit SubLattice(const IntMatrix& generators);

  static SubLattice full(std::size_t rank);

  std::size_t rank() const { return basis_.rows(); }
  const IntMatrix& basis() const { return basis_; }
  const Int& index() const { return index_; }

  bool contains(const LatVec& v) const;
  /// Coefficients c with basis * c = v; empty when v is not in the lattice.
  std::vector<Int> coordinates(const LatVec& v) const;

  friend bool operator==(const SubLattice& a, const SubLattice& b) { return a.basis_ == b.basis_; }

 private:
  IntMatrix basis_;
  Int index_;
};

/// n * Z^r.
SubLattice scale_lattice(std::size_t rank, const Int& n);

bool contains(const SubLattice& lattice, const LatVec& v);

/// Exponent of Z^r / L: the least N with N * Z^r inside L.
Int smallest_scale_inside(const SubLattice& lattice);

}  // namespace latspec
