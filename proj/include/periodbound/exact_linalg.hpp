#pragma once

// Dense exact rational matrices and the eliminations used for certificate
// validation: rank/row-basis selection, linear solves, and the Sylvester
// positive-definiteness test. Everything here is exact; nothing rounds.

#include <optional>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace periodbound {

class RatMatrix {
 public:
  RatMatrix() : rows_(0), cols_(0) {}
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rat& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rat& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RatMatrix transpose() const {
    RatMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  RatMatrix operator*(const RatMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
    RatMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const Rat& aik = (*this)(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) {
          if (o(k, j) == 0) continue;
          r(i, j) += aik * o(k, j);
        }
      }
    return r;
  }

  std::vector<Rat> multiply(const std::vector<Rat>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<Rat> r(rows_, Rat(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if ((*this)(i, j) != 0 && x[j] != 0) r[i] += (*this)(i, j) * x[j];
    return r;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<Rat> data_;
};

/// Indices of a maximal linearly independent subset of the rows, in order.
/// Gaussian elimination over the rationals; O(rows * rank * cols).
inline std::vector<std::size_t> independent_rows(const RatMatrix& m) {
  std::vector<std::vector<Rat>> reduced;   // rows in echelon form
  std::vector<std::size_t> pivots;         // pivot column of each reduced row
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<Rat> v(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) v[j] = m(i, j);
    for (std::size_t r = 0; r < reduced.size(); ++r) {
      const Rat& lead = v[pivots[r]];
      if (lead == 0) continue;
      Rat factor = lead / reduced[r][pivots[r]];
      for (std::size_t j = pivots[r]; j < m.cols(); ++j)
        if (reduced[r][j] != 0) v[j] -= factor * reduced[r][j];
    }
    std::size_t p = 0;
    while (p < m.cols() && v[p] == 0) ++p;
    if (p == m.cols()) continue;
    // keep echelon rows sorted by pivot column so earlier pivots eliminate first
    std::size_t at = 0;
    while (at < pivots.size() && pivots[at] < p) ++at;
    reduced.insert(reduced.begin() + at, std::move(v));
    pivots.insert(pivots.begin() + at, p);
    chosen.push_back(i);
  }
  return chosen;
}

inline std::size_t rank(const RatMatrix& m) { return independent_rows(m).size(); }

/// Solves M x = rhs for square nonsingular M by exact Gaussian elimination
/// with partial (first-nonzero) pivoting. Returns nullopt if singular.
inline std::optional<std::vector<Rat>> solve_square(RatMatrix m, std::vector<Rat> rhs) {
  const std::size_t n = m.rows();
  if (m.cols() != n || rhs.size() != n) throw std::invalid_argument("solve_square shape mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m(perm[piv], k) == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(perm[k], perm[piv]);
    const Rat& d = m(perm[k], k);
    for (std::size_t i = k + 1; i < n; ++i) {
      Rat factor = m(perm[i], k) / d;
      if (factor == 0) continue;
      m(perm[i], k) = 0;
      for (std::size_t j = k + 1; j < n; ++j)
        if (m(perm[k], j) != 0) m(perm[i], j) -= factor * m(perm[k], j);
      rhs[perm[i]] -= factor * rhs[perm[k]];
    }
  }
  std::vector<Rat> x(n);
  for (std::size_t k = n; k-- > 0;) {
    Rat acc = rhs[perm[k]];
    for (std::size_t j = k + 1; j < n; ++j)
      if (m(perm[k], j) != 0) acc -= m(perm[k], j) * x[j];
    x[k] = acc / m(perm[k], k);
  }
  return x;
}

/// Sylvester criterion for a symmetric rational matrix: strictly positive
/// definite iff every leading principal minor is positive. Implemented as
/// pivotless elimination; pivot k equals det(M_k)/det(M_{k-1}), so all
/// pivots positive <=> all leading minors positive.
inline bool sylvester_pd(RatMatrix m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("sylvester_pd needs a square matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m(i, j) != m(j, i)) throw std::invalid_argument("sylvester_pd needs a symmetric matrix");
  if (n == 0) return true;
  for (std::size_t k = 0; k < n; ++k) {
    if (m(k, k) <= 0) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (m(i, k) == 0) continue;
      Rat factor = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j)
        if (m(k, j) != 0) m(i, j) -= factor * m(k, j);
    }
  }
  return true;
}

}  // namespace periodbound
