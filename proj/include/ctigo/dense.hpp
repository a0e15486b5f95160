/// \file dense.hpp
/// Small dense matrices for desk-scale covariance work.  Everything here is
/// gated by an explicit size limit; the sparse kernels carry the real load.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ctigo/errors.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

inline constexpr index_t kDenseLimit = 4096;

/// Row-major dense matrix of finite reals.
struct DenseMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(index_t r, index_t c)
      : nrows(r), ncols(c),
        data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& operator()(index_t i, index_t j) {
    return data[static_cast<std::size_t>(i * ncols + j)];
  }
  double operator()(index_t i, index_t j) const {
    return data[static_cast<std::size_t>(i * ncols + j)];
  }

  static DenseMatrix eye(index_t n) {
    DenseMatrix I(n, n);
    for (index_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }
};

inline DenseMatrix to_dense(const SparseMatrix& A) {
  DenseMatrix D(A.nrows, A.ncols);
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      D(A.row_idx[static_cast<std::size_t>(p)], j) =
          A.values[static_cast<std::size_t>(p)];
    }
  }
  return D;
}

/// Maximum absolute column sum.
inline double norm1(const DenseMatrix& A) {
  double best = 0.0;
  for (index_t j = 0; j < A.ncols; ++j) {
    double s = 0.0;
    for (index_t i = 0; i < A.nrows; ++i) s += std::abs(A(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.ncols != B.nrows) throw dim_error("matmul: inner dimension mismatch");
  DenseMatrix C(A.nrows, B.ncols);
  for (index_t i = 0; i < A.nrows; ++i) {
    for (index_t k = 0; k < A.ncols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (index_t j = 0; j < B.ncols; ++j) C(i, j) += aik * B(k, j);
    }
  }
  return C;
}

inline DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.nrows != B.nrows || A.ncols != B.ncols) {
    throw dim_error("subtract: shape mismatch");
  }
  DenseMatrix C(A.nrows, A.ncols);
  for (std::size_t k = 0; k < C.data.size(); ++k) {
    C.data[k] = A.data[k] - B.data[k];
  }
  return C;
}

/// Dense inverse by Gaussian elimination with partial pivoting.
///
/// Intended for covariance comparisons on desk-scale problems; refuses to run
/// above `limit` so the sparse path stays the default.
inline DenseMatrix dense_inverse(const SparseMatrix& A,
                                 index_t limit = kDenseLimit) {
  if (A.nrows != A.ncols) throw dim_error("dense_inverse: matrix not square");
  if (A.nrows > limit) {
    throw size_error("dense_inverse: n = " + std::to_string(A.nrows) +
                     " exceeds dense limit " + std::to_string(limit));
  }
  const index_t n = A.nrows;
  DenseMatrix M = to_dense(A);
  DenseMatrix X = DenseMatrix::eye(n);

  for (index_t k = 0; k < n; ++k) {
    index_t piv = k;
    double best = std::abs(M(k, k));
    for (index_t i = k + 1; i < n; ++i) {
      if (std::abs(M(i, k)) > best) {
        best = std::abs(M(i, k));
        piv = i;
      }
    }
    if (best == 0.0) {
      throw not_spd_error("dense_inverse: singular at column " +
                              std::to_string(k),
                          k);
    }
    if (piv != k) {
      for (index_t j = 0; j < n; ++j) {
        std::swap(M(k, j), M(piv, j));
        std::swap(X(k, j), X(piv, j));
      }
    }
    const double d = M(k, k);
    for (index_t i = k + 1; i < n; ++i) {
      const double f = M(i, k) / d;
      if (f == 0.0) continue;
      M(i, k) = 0.0;
      for (index_t j = k + 1; j < n; ++j) M(i, j) -= f * M(k, j);
      for (index_t j = 0; j < n; ++j) X(i, j) -= f * X(k, j);
    }
  }
  // Back substitution on each right-hand side.
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = n - 1; i >= 0; --i) {
      double s = X(i, j);
      for (index_t k = i + 1; k < n; ++k) s -= M(i, k) * X(k, j);
      X(i, j) = s / M(i, i);
    }
  }
  return X;
}

}  // namespace ctigo
