#include "latspec/lattice.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <utility>

namespace latspec {

// ---------------------------------------------------------------------------
// LatVec

LatVec::LatVec(std::vector<Int> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw Error("lattice vector must have rank >= 1");
}

LatVec::LatVec(std::initializer_list<long> coords) {
  if (coords.size() == 0) throw Error("lattice vector must have rank >= 1");
  coords_.reserve(coords.size());
  for (long c : coords) coords_.emplace_back(c);
}

LatVec LatVec::zero(std::size_t rank) { return LatVec(std::vector<Int>(rank, Int(0))); }

LatVec LatVec::unit(std::size_t rank, std::size_t axis) {
  LatVec v = zero(rank);
  v.coords_.at(axis) = 1;
  return v;
}

bool LatVec::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Int& c) { return c == 0; });
}

LatVec& LatVec::operator+=(const LatVec& other) {
  if (rank() != other.rank()) throw Error("rank mismatch in vector addition");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

LatVec& LatVec::operator-=(const LatVec& other) {
  if (rank() != other.rank()) throw Error("rank mismatch in vector subtraction");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

LatVec& LatVec::operator*=(const Int& scalar) {
  for (auto& c : coords_) c *= scalar;
  return *this;
}

LatVec operator-(LatVec v) {
  for (auto& c : v.coords_) c = -c;
  return v;
}

bool operator<(const LatVec& a, const LatVec& b) {
  if (a.rank() != b.rank()) return a.rank() < b.rank();
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (a.coords_[i] != b.coords_[i]) return a.coords_[i] < b.coords_[i];
  }
  return false;
}

std::string LatVec::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) out += ",";
    out += coords_[i].get_str();
  }
  return out + ")";
}

std::ostream& operator<<(std::ostream& os, const LatVec& v) { return os << v.to_string(); }

// ---------------------------------------------------------------------------
// IntMatrix

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Int(0)) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error("ragged matrix literal");
    for (long x : row) data_.emplace_back(x);
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::diagonal(std::span<const Int> entries) {
  IntMatrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<Int>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  IntMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw Error("ragged matrix");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::from_columns(std::span<const LatVec> columns) {
  if (columns.empty()) return {};
  const std::size_t r = columns.front().rank();
  IntMatrix m(r, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].rank() != r) throw Error("columns of differing rank");
    for (std::size_t i = 0; i < r; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

LatVec IntMatrix::column(std::size_t j) const {
  std::vector<Int> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return LatVec(std::move(c));
}

LatVec IntMatrix::row(std::size_t i) const {
  std::vector<Int> r(cols_);
  for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return LatVec(std::move(r));
}

void IntMatrix::set_column(std::size_t j, const LatVec& v) {
  if (v.rank() != rows_) throw Error("column rank mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

void IntMatrix::swap_columns(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
}

void IntMatrix::negate_column(std::size_t j) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = -(*this)(i, j);
}

void IntMatrix::negate_row(std::size_t i) {
  for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = -(*this)(i, j);
}

void IntMatrix::add_column_multiple(std::size_t dst, std::size_t src, const Int& factor) {
  if (factor == 0) return;
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += factor * (*this)(i, src);
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src, const Int& factor) {
  if (factor == 0) return;
  for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += factor * (*this)(src, j);
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

LatVec IntMatrix::apply(const LatVec& v) const {
  if (v.rank() != cols_) throw Error("matrix-vector dimension mismatch");
  std::vector<Int> out(rows_, Int(0));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
  return LatVec(std::move(out));
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols_ != b.rows_) throw Error("matrix product dimension mismatch");
  IntMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Int& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j).get_str();
    os << "]";
  }
  os << "]";
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const IntMatrix& m) { return os << m.to_string(); }

// ---------------------------------------------------------------------------
// Primitivity and determinants

Int content(const LatVec& v) {
  Int g = 0;
  for (const auto& c : v.coords()) g = gcd(g, c);
  return g;
}

bool is_primitive(const LatVec& v) { return content(v) == 1; }

Int det_exact(const IntMatrix& m) {
  if (!m.is_square()) throw Error("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  int sign = 1;
  Int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t swap_with = k + 1;
      while (swap_with < n && a(swap_with, k) == 0) ++swap_with;
      if (swap_with == n) return 0;
      a.swap_rows(k, swap_with);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Int t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        a(i, j) = std::move(t);
      }
    }
    prev = a(k, k);
  }
  Int d = a(n - 1, n - 1);
  return sign < 0 ? Int(-d) : d;
}

// ---------------------------------------------------------------------------
// Normal forms

namespace {

// Replace columns (c, j) by a unimodular combination so that entry (row, j)
// becomes zero and (row, c) becomes gcd of the two entries.
void gcd_combine_columns(IntMatrix& h, IntMatrix& u, std::size_t row, std::size_t c,
                         std::size_t j) {
  const Int a = h(row, c);
  const Int b = h(row, j);
  if (b == 0) return;
  Int s, t;
  const Int g = xgcd(a, b, s, t);
  const Int a_g = a / g;
  const Int b_g = b / g;
  for (IntMatrix* m : {&h, &u}) {
    for (std::size_t i = 0; i < m->rows(); ++i) {
      const Int x = (*m)(i, c);
      const Int y = (*m)(i, j);
      (*m)(i, c) = s * x + t * y;
      (*m)(i, j) = a_g * y - b_g * x;
    }
  }
}

}  // namespace

ColumnEchelon column_echelon(const IntMatrix& m) {
  ColumnEchelon out{m, IntMatrix::identity(m.cols()), 0, {}};
  IntMatrix& h = out.reduced;
  IntMatrix& u = out.transform;
  std::size_t c = 0;
  for (std::size_t i = 0; i < h.rows() && c < h.cols(); ++i) {
    for (std::size_t j = c + 1; j < h.cols(); ++j) gcd_combine_columns(h, u, i, c, j);
    if (h(i, c) == 0) continue;
    if (h(i, c) < 0) {
      h.negate_column(c);
      u.negate_column(c);
    }
    const Int pivot = h(i, c);
    for (std::size_t j = 0; j < c; ++j) {
      const Int q = floor_div(h(i, j), pivot);
      if (q != 0) {
        h.add_column_multiple(j, c, -q);
        u.add_column_multiple(j, c, -q);
      }
    }
    out.pivot_rows.push_back(i);
    ++c;
  }
  out.rank = c;
  return out;
}

std::vector<LatVec> integer_kernel(const IntMatrix& m) {
  const ColumnEchelon e = column_echelon(m);
  std::vector<LatVec> basis;
  for (std::size_t j = e.rank; j < m.cols(); ++j) basis.push_back(e.transform.column(j));
  return basis;
}

HermiteForm hnf(const IntMatrix& m) {
  if (m.rows() == 0) throw Error("empty matrix");
  ColumnEchelon e = column_echelon(m);
  if (e.rank < m.rows()) throw Error("not full rank");
  return {std::move(e.reduced), std::move(e.transform)};
}

QuotientStructure snf(const IntMatrix& m) {
  if (!m.is_square() || m.rows() == 0) throw Error("Smith normal form needs a square matrix");
  if (det_exact(m) == 0) throw Error("singular matrix has no finite quotient");
  const std::size_t n = m.rows();
  IntMatrix a = m;
  IntMatrix p = IntMatrix::identity(n);
  IntMatrix q = IntMatrix::identity(n);

  for (std::size_t t = 0; t < n; ++t) {
    for (;;) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      std::size_t pi = t, pj = t;
      bool found = false;
      for (std::size_t i = t; i < n; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (a(i, j) == 0) continue;
          if (!found || abs(a(i, j)) < abs(a(pi, pj))) {
            pi = i;
            pj = j;
            found = true;
          }
        }
      if (!found) throw Error("singular matrix has no finite quotient");
      a.swap_rows(t, pi);
      p.swap_rows(t, pi);
      a.swap_columns(t, pj);
      q.swap_columns(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < n; ++i) {
        const Int f = floor_div(a(i, t), a(t, t));
        if (f != 0) {
          a.add_row_multiple(i, t, -f);
          p.add_row_multiple(i, t, -f);
        }
        if (a(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        const Int f = floor_div(a(t, j), a(t, t));
        if (f != 0) {
          a.add_column_multiple(j, t, -f);
          q.add_column_multiple(j, t, -f);
        }
        if (a(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // Enforce the divisibility chain: fold an offending row into row t.
      bool divisible = true;
      for (std::size_t i = t + 1; i < n && divisible; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!divides(a(t, t), a(i, j))) {
            a.add_row_multiple(t, i, Int(1));
            p.add_row_multiple(t, i, Int(1));
            divisible = false;
            break;
          }
      if (divisible) break;
    }
    if (a(t, t) < 0) {
      a.negate_row(t);
      p.negate_row(t);
    }
  }

  QuotientStructure out;
  out.invariant_factors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.invariant_factors.push_back(a(i, i));
  out.to_normal = std::move(p);
  out.from_normal = std::move(q);
  return out;
}

IntMatrix complete_to_basis(const LatVec& v) {
  if (!is_primitive(v)) throw Error("not primitive: " + v.to_string());
  const std::size_t r = v.rank();
  if (r == 1) {
    if (v[0] != 1) throw Error("no determinant-one completion of (-1) in rank 1");
    return IntMatrix::identity(1);
  }
  // Row-reduce w = v to e_1 with unimodular U while accumulating U^{-1}.
  std::vector<Int> w = v.coords();
  IntMatrix inverse = IntMatrix::identity(r);
  for (std::size_t i = r - 1; i >= 1; --i) {
    if (w[i] == 0) continue;
    Int s, t;
    const Int g = xgcd(w[0], w[i], s, t);
    const Int a_g = w[0] / g;
    const Int b_g = w[i] / g;
    // Row op E = [[s, t], [-b_g, a_g]] on rows (0, i); E^{-1} = [[a_g, -t], [b_g, s]]
    // applied to the columns (0, i) of the inverse.
    for (std::size_t row = 0; row < r; ++row) {
      const Int x = inverse(row, 0);
      const Int y = inverse(row, i);
      inverse(row, 0) = x * a_g + y * b_g;
      inverse(row, i) = -x * t + y * s;
    }
    w[0] = g;
    w[i] = 0;
  }
  // w[0] is now +-1; U v = w[0] e_1, so the first column of the inverse is +-v.
  if (w[0] < 0) inverse.negate_column(0);
  if (det_exact(inverse) < 0) inverse.negate_column(1);
  return inverse;
}

// ---------------------------------------------------------------------------
// SubLattice

SubLattice::SubLattice(const IntMatrix& generators) {
  HermiteForm h = hnf(generators);
  const std::size_t r = generators.rows();
  basis_ = IntMatrix(r, r);
  index_ = 1;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j <= i; ++j) basis_(i, j) = h.basis(i, j);
    index_ *= basis_(i, i);
  }
}

SubLattice SubLattice::full(std::size_t rank) { return SubLattice(IntMatrix::identity(rank)); }

std::vector<Int> SubLattice::coordinates(const LatVec& v) const {
  if (v.rank() != rank()) throw Error("rank mismatch in lattice membership");
  std::vector<Int> residual = v.coords();
  std::vector<Int> coeffs(rank());
  for (std::size_t i = 0; i < rank(); ++i) {
    if (!divides(basis_(i, i), residual[i])) return {};
    coeffs[i] = residual[i] / basis_(i, i);
    for (std::size_t k = i; k < rank(); ++k) residual[k] -= coeffs[i] * basis_(k, i);
  }
  return coeffs;
}

bool SubLattice::contains(const LatVec& v) const { return !coordinates(v).empty(); }

SubLattice scale_lattice(std::size_t rank, const Int& n) {
  if (rank == 0) throw Error("rank must be >= 1");
  if (n <= 0) throw Error("scale must be a positive integer");
  std::vector<Int> diag(rank, n);
  return SubLattice(IntMatrix::diagonal(diag));
}

bool contains(const SubLattice& lattice, const LatVec& v) { return lattice.contains(v); }

Int smallest_scale_inside(const SubLattice& lattice) {
  return snf(lattice.basis()).invariant_factors.back();
}

}  // namespace latspec
