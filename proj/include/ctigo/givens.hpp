/// \file givens.hpp
/// Plane rotations: the atomic step of the incomplete orthogonal
/// factorization.  A rotation is fully described by its (c, s) pair.
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ctigo/errors.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Rotation acting on rows i and j (j is the annihilated row):
///   row_i' =  c*row_i + s*row_j
///   row_j' = -s*row_i + c*row_j
struct GivensRotation {
  index_t i;
  index_t j;
  double c;
  double s;
};

/// Coefficients zeroing x_j against x_i:
///   c = x_i / r,  s = x_j / r,  r = sqrt(x_i^2 + x_j^2)
/// so the rotated pair becomes (r, 0) with r >= 0.  Total function:
/// x_j == 0 (including both zero) gives the identity rotation (1, 0).
inline std::pair<double, double> compute_givens(double x_i, double x_j) {
  if (x_j == 0.0) return {1.0, 0.0};
  const double r = std::hypot(x_i, x_j);
  return {x_i / r, x_j / r};
}

/// Apply a rotation to rows g.i and g.j of a sparse matrix; all other rows
/// are untouched.  Exact zeros produced by cancellation are not stored.
inline SparseMatrix apply_rotation(const SparseMatrix& A,
                                   const GivensRotation& g) {
  if (g.i < 0 || g.i >= A.nrows || g.j < 0 || g.j >= A.nrows) {
    throw dim_error("apply_rotation: row index out of range");
  }
  if (g.i == g.j) throw param_error("apply_rotation: equal row indices");

  std::vector<Triplet> ts;
  ts.reserve(A.values.size() + 8);
  std::vector<double> row_i(static_cast<std::size_t>(A.ncols), 0.0);
  std::vector<double> row_j(static_cast<std::size_t>(A.ncols), 0.0);
  for (index_t col = 0; col < A.ncols; ++col) {
    for (index_t p = A.col_ptr[col]; p < A.col_ptr[col + 1]; ++p) {
      const index_t r = A.row_idx[static_cast<std::size_t>(p)];
      const double v = A.values[static_cast<std::size_t>(p)];
      if (r == g.i) {
        row_i[static_cast<std::size_t>(col)] = v;
      } else if (r == g.j) {
        row_j[static_cast<std::size_t>(col)] = v;
      } else {
        ts.push_back({r, col, v});
      }
    }
  }
  for (index_t col = 0; col < A.ncols; ++col) {
    const double a = row_i[static_cast<std::size_t>(col)];
    const double b = row_j[static_cast<std::size_t>(col)];
    if (a == 0.0 && b == 0.0) continue;
    const double vi = g.c * a + g.s * b;
    const double vj = -g.s * a + g.c * b;
    if (vi != 0.0) ts.push_back({g.i, col, vi});
    if (vj != 0.0) ts.push_back({g.j, col, vj});
  }
  return from_triplets(A.nrows, A.ncols, std::move(ts));
}

}  // namespace ctigo
