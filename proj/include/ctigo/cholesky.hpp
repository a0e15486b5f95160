/// \file cholesky.hpp
/// Exact sparse Cholesky factorization Q = L L^T and triangular solves.
///
/// Up-looking algorithm: the elimination tree of Q gives the pattern of each
/// row of L, then a sparse triangular solve fills the numbers in.  No
/// reordering is applied, so band structure is preserved as-is.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctigo/errors.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Lower-triangular Cholesky factor with positive diagonal.
struct LowerFactor {
  SparseMatrix matrix;     // strictly upper part absent; diagonal first per column
  double logdet_half = 0;  // sum of log(L_ii)

  index_t dim() const { return matrix.nrows; }
};

namespace detail {

/// Elimination tree of a symmetric matrix given by its upper triangle.
inline std::vector<index_t> etree(const SparseMatrix& A) {
  const index_t n = A.ncols;
  std::vector<index_t> parent(static_cast<std::size_t>(n), -1);
  std::vector<index_t> ancestor(static_cast<std::size_t>(n), -1);
  for (index_t k = 0; k < n; ++k) {
    for (index_t p = A.col_ptr[k]; p < A.col_ptr[k + 1]; ++p) {
      index_t i = A.row_idx[static_cast<std::size_t>(p)];
      while (i != -1 && i < k) {
        const index_t next = ancestor[static_cast<std::size_t>(i)];
        ancestor[static_cast<std::size_t>(i)] = k;  // path compression
        if (next == -1) parent[static_cast<std::size_t>(i)] = k;
        i = next;
      }
    }
  }
  return parent;
}

/// Pattern of row k of L: reach of column k's upper entries in the etree.
/// Appends column indices (ascending after sort) into `out`.
inline void ereach(const SparseMatrix& A, index_t k,
                   const std::vector<index_t>& parent, std::vector<index_t>& mark,
                   std::vector<index_t>& out) {
  out.clear();
  mark[static_cast<std::size_t>(k)] = k;
  for (index_t p = A.col_ptr[k]; p < A.col_ptr[k + 1]; ++p) {
    index_t i = A.row_idx[static_cast<std::size_t>(p)];
    while (i != -1 && i < k && mark[static_cast<std::size_t>(i)] != k) {
      out.push_back(i);
      mark[static_cast<std::size_t>(i)] = k;
      i = parent[static_cast<std::size_t>(i)];
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace detail

/// Factor a symmetric positive definite matrix as Q = L L^T.
///
/// Symmetry is validated (never silently repaired); a non-positive pivot
/// aborts with the failing column, which is how intrinsic (rank-deficient)
/// models surface when built without jitter.
inline LowerFactor cholesky(const SparseMatrix& Q, double sym_rtol = 1e-12) {
  if (Q.nrows != Q.ncols) throw dim_error("cholesky: matrix not square");
  if (!is_symmetric(Q, sym_rtol)) {
    throw dim_error("cholesky: matrix not symmetric within tolerance");
  }
  const index_t n = Q.nrows;
  const std::vector<index_t> parent = detail::etree(Q);

  // Symbolic pass: per-column entry counts of L.
  std::vector<index_t> mark(static_cast<std::size_t>(n), -1);
  std::vector<index_t> pattern;
  std::vector<index_t> count(static_cast<std::size_t>(n), 1);  // diagonals
  for (index_t k = 0; k < n; ++k) {
    detail::ereach(Q, k, parent, mark, pattern);
    for (index_t j : pattern) count[static_cast<std::size_t>(j)]++;
  }

  LowerFactor F;
  SparseMatrix& L = F.matrix;
  L.nrows = L.ncols = n;
  L.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (index_t j = 0; j < n; ++j) {
    L.col_ptr[static_cast<std::size_t>(j) + 1] =
        L.col_ptr[static_cast<std::size_t>(j)] +
        count[static_cast<std::size_t>(j)];
  }
  L.row_idx.assign(static_cast<std::size_t>(L.col_ptr.back()), 0);
  L.values.assign(static_cast<std::size_t>(L.col_ptr.back()), 0.0);
  std::vector<index_t> cursor(L.col_ptr.begin(), L.col_ptr.end() - 1);

  // Numeric pass, one row of L at a time.
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<index_t> stamp(static_cast<std::size_t>(n), -1);
  std::fill(mark.begin(), mark.end(), -1);

  for (index_t k = 0; k < n; ++k) {
    detail::ereach(Q, k, parent, mark, pattern);
    for (index_t j : pattern) {
      x[static_cast<std::size_t>(j)] = 0.0;
      stamp[static_cast<std::size_t>(j)] = k;
    }
    double d = 0.0;
    for (index_t p = Q.col_ptr[k]; p < Q.col_ptr[k + 1]; ++p) {
      const index_t i = Q.row_idx[static_cast<std::size_t>(p)];
      if (i < k) {
        x[static_cast<std::size_t>(i)] = Q.values[static_cast<std::size_t>(p)];
      } else if (i == k) {
        d = Q.values[static_cast<std::size_t>(p)];
      }
    }
    for (index_t j : pattern) {
      const double lkj = x[static_cast<std::size_t>(j)] /
                         L.values[static_cast<std::size_t>(L.col_ptr[j])];
      // Push the update to later pattern entries via stored column j.
      for (index_t p = L.col_ptr[j] + 1; p < cursor[static_cast<std::size_t>(j)];
           ++p) {
        const index_t i = L.row_idx[static_cast<std::size_t>(p)];
        if (stamp[static_cast<std::size_t>(i)] != k) {
          x[static_cast<std::size_t>(i)] = 0.0;
          stamp[static_cast<std::size_t>(i)] = k;
        }
        x[static_cast<std::size_t>(i)] -=
            L.values[static_cast<std::size_t>(p)] * lkj;
      }
      d -= lkj * lkj;
      const index_t q = cursor[static_cast<std::size_t>(j)]++;
      L.row_idx[static_cast<std::size_t>(q)] = k;
      L.values[static_cast<std::size_t>(q)] = lkj;
    }
    if (!(d > 0.0)) {
      throw not_spd_error(
          "cholesky: non-positive pivot at column " + std::to_string(k), k);
    }
    const double lkk = std::sqrt(d);
    const index_t q = cursor[static_cast<std::size_t>(k)]++;
    L.row_idx[static_cast<std::size_t>(q)] = k;
    L.values[static_cast<std::size_t>(q)] = lkk;
    F.logdet_half += std::log(lkk);
  }
  // Exact cancellations can leave stored zeros in rare cases.
  L = compress(L);
  return F;
}

/// Forward substitution L x = b.
inline DenseVector solve_lower(const LowerFactor& F, const DenseVector& b) {
  const SparseMatrix& L = F.matrix;
  if (static_cast<index_t>(b.size()) != L.nrows) {
    throw dim_error("solve_lower: length mismatch");
  }
  DenseVector x = b;
  for (index_t j = 0; j < L.ncols; ++j) {
    const index_t p0 = L.col_ptr[j];
    if (p0 == L.col_ptr[j + 1] ||
        L.row_idx[static_cast<std::size_t>(p0)] != j ||
        L.values[static_cast<std::size_t>(p0)] == 0.0) {
      throw singular_error("solve_lower: zero diagonal at column " +
                           std::to_string(j));
    }
    const double xj =
        x[static_cast<std::size_t>(j)] / L.values[static_cast<std::size_t>(p0)];
    x[static_cast<std::size_t>(j)] = xj;
    for (index_t p = p0 + 1; p < L.col_ptr[j + 1]; ++p) {
      x[static_cast<std::size_t>(L.row_idx[static_cast<std::size_t>(p)])] -=
          L.values[static_cast<std::size_t>(p)] * xj;
    }
  }
  return x;
}

/// Back substitution L^T x = z.
inline DenseVector solve_upper_transpose(const LowerFactor& F,
                                         const DenseVector& z) {
  const SparseMatrix& L = F.matrix;
  if (static_cast<index_t>(z.size()) != L.nrows) {
    throw dim_error("solve_upper_transpose: length mismatch");
  }
  DenseVector x = z;
  for (index_t j = L.ncols - 1; j >= 0; --j) {
    const index_t p0 = L.col_ptr[j];
    if (p0 == L.col_ptr[j + 1] ||
        L.row_idx[static_cast<std::size_t>(p0)] != j ||
        L.values[static_cast<std::size_t>(p0)] == 0.0) {
      throw singular_error("solve_upper_transpose: zero diagonal at column " +
                           std::to_string(j));
    }
    double s = x[static_cast<std::size_t>(j)];
    for (index_t p = p0 + 1; p < L.col_ptr[j + 1]; ++p) {
      s -= L.values[static_cast<std::size_t>(p)] *
           x[static_cast<std::size_t>(L.row_idx[static_cast<std::size_t>(p)])];
    }
    x[static_cast<std::size_t>(j)] = s / L.values[static_cast<std::size_t>(p0)];
  }
  return x;
}

/// log det Q = 2 sum_i log L_ii.
inline double log_det(const LowerFactor& F) { return 2.0 * F.logdet_half; }

}  // namespace ctigo
