#pragma once

#include <utility>
#include <vector>

#include "soergel/error.hpp"
#include "soergel/intmatrix.hpp"
#include "soergel/scalar.hpp"

namespace soergel {

// Dense matrix over an exact scalar field.  Everything downstream of the
// braid solver, the lambda/eta inversion and the graded-rank computation
// runs through the handful of eliminations below; sizes are small, so
// plain Gaussian elimination with exact arithmetic is the right tool.
template <ScalarField K>
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = K::from_int(1);
    return m;
  }

  static Matrix from_int(const IntMatrix& m) {
    Matrix r(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j) r.at(i, j) = K::from_int(m.at(i, j));
    return r;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  K& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const K& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw TheoryError("Matrix dimension mismatch");
    Matrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const K& v = at(i, k);
        if (v.is_zero()) continue;
        for (int j = 0; j < o.cols_; ++j) r.at(i, j) += v * o.at(k, j);
      }
    return r;
  }

  Matrix operator-(const Matrix& o) const {
    Matrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
  }

  Matrix transpose() const {
    Matrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  // In-place row echelon reduction; returns rank.
  int rref() {
    int rank = 0;
    for (int col = 0; col < cols_ && rank < rows_; ++col) {
      int pivot = -1;
      for (int i = rank; i < rows_; ++i)
        if (!at(i, col).is_zero()) { pivot = i; break; }
      if (pivot < 0) continue;
      swap_rows(pivot, rank);
      K inv = at(rank, col).inverse();
      for (int j = col; j < cols_; ++j) at(rank, j) = at(rank, j) * inv;
      for (int i = 0; i < rows_; ++i) {
        if (i == rank || at(i, col).is_zero()) continue;
        K f = at(i, col);
        for (int j = col; j < cols_; ++j) at(i, j) = at(i, j) - f * at(rank, j);
      }
      ++rank;
    }
    return rank;
  }

  int rank() const {
    Matrix m = *this;
    return m.rref();
  }

  K det() const {
    if (rows_ != cols_) throw TheoryError("det of non-square matrix");
    Matrix m = *this;
    K d = K::from_int(1);
    for (int col = 0; col < cols_; ++col) {
      int pivot = -1;
      for (int i = col; i < rows_; ++i)
        if (!m.at(i, col).is_zero()) { pivot = i; break; }
      if (pivot < 0) return K();
      if (pivot != col) {
        m.swap_rows(pivot, col);
        d = -d;
      }
      d = d * m.at(col, col);
      K inv = m.at(col, col).inverse();
      for (int i = col + 1; i < rows_; ++i) {
        K f = m.at(i, col) * inv;
        if (f.is_zero()) continue;
        for (int j = col; j < cols_; ++j) m.at(i, j) = m.at(i, j) - f * m.at(col, j);
      }
    }
    return d;
  }

  // Inverse; nullopt when singular.
  std::optional<Matrix> inverse() const {
    if (rows_ != cols_) throw TheoryError("inverse of non-square matrix");
    Matrix aug(rows_, 2 * cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
      aug.at(i, cols_ + i) = K::from_int(1);
    }
    if (aug.rref() != rows_) return std::nullopt;
    Matrix r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r.at(i, j) = aug.at(i, cols_ + j);
    return r;
  }

  int kernel_dim() const { return cols_ - rank(); }

  // Solves A x = b for all columns of b simultaneously.  Returns nullopt if
  // inconsistent; sets *unique to false when the solution has free variables
  // (a representative with free variables set to zero is still returned).
  std::optional<Matrix> solve(const Matrix& b, bool* unique) const {
    Matrix aug(rows_, cols_ + b.cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
      for (int j = 0; j < b.cols_; ++j) aug.at(i, cols_ + j) = b.at(i, j);
    }
    aug.rref();
    std::vector<int> pivot_col(rows_, -1);
    std::vector<int> col_pivot(cols_, -1);
    int r = 0;
    for (int i = 0; i < rows_; ++i) {
      int c = 0;
      while (c < cols_ && aug.at(i, c).is_zero()) ++c;
      if (c == cols_) {
        for (int j = 0; j < b.cols_; ++j)
          if (!aug.at(i, cols_ + j).is_zero()) return std::nullopt;
        continue;
      }
      pivot_col[r] = c;
      col_pivot[c] = i;
      ++r;
    }
    if (unique) *unique = (r == cols_);
    Matrix x(cols_, b.cols_);
    for (int c = 0; c < cols_; ++c) {
      int i = col_pivot[c];
      if (i < 0) continue;
      for (int j = 0; j < b.cols_; ++j) x.at(c, j) = aug.at(i, cols_ + j);
    }
    return x;
  }

 private:
  void swap_rows(int i, int j) {
    if (i == j) return;
    for (int c = 0; c < cols_; ++c) std::swap(at(i, c), at(j, c));
  }

  int rows_, cols_;
  std::vector<K> a_;
};

}  // namespace soergel
