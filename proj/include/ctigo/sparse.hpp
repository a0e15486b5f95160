/// \file sparse.hpp
/// Compressed-sparse-column matrix type and the arithmetic kernels every
/// other module consumes.  Storage is canonical CSC: column pointers,
/// strictly increasing row indices per column, no stored zeros.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ctigo/errors.hpp"

namespace ctigo {

using index_t = std::int64_t;

/// Dense vector of finite reals; length is the only shape information.
using DenseVector = std::vector<double>;

/// One coordinate-format entry, used to assemble matrices.
struct Triplet {
  index_t row;
  index_t col;
  double value;
};

/// Compressed sparse column matrix.
///
/// Invariants (restored by every operation in this header):
///  - col_ptr is non-decreasing, col_ptr[0] == 0, col_ptr[ncols] == nnz
///  - row indices strictly increase within each column and lie in [0, nrows)
///  - no stored entry is exactly zero
struct SparseMatrix {
  index_t nrows = 0;
  index_t ncols = 0;
  std::vector<index_t> col_ptr{0};
  std::vector<index_t> row_idx;
  std::vector<double> values;

  index_t nnz() const { return static_cast<index_t>(values.size()); }

  /// Value at (i, j); zero if not stored.  Binary search within the column.
  double at(index_t i, index_t j) const {
    if (i < 0 || i >= nrows || j < 0 || j >= ncols) {
      throw dim_error("at: index out of range");
    }
    auto first = row_idx.begin() + col_ptr[j];
    auto last = row_idx.begin() + col_ptr[j + 1];
    auto it = std::lower_bound(first, last, i);
    if (it == last || *it != i) return 0.0;
    return values[static_cast<std::size_t>(it - row_idx.begin())];
  }

  std::span<const index_t> col_rows(index_t j) const {
    return {row_idx.data() + col_ptr[j],
            static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }
  std::span<const double> col_values(index_t j) const {
    return {values.data() + col_ptr[j],
            static_cast<std::size_t>(col_ptr[j + 1] - col_ptr[j])};
  }
};

/// Assemble from coordinate entries.  Duplicates are summed, entries sorted,
/// exact zeros (including cancelled duplicates) are not stored.
inline SparseMatrix from_triplets(index_t nrows, index_t ncols,
                                  std::vector<Triplet> entries) {
  if (nrows < 0 || ncols < 0) throw dim_error("from_triplets: negative shape");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw dim_error("from_triplets: entry (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ") outside " +
                      std::to_string(nrows) + "x" + std::to_string(ncols));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return std::tie(a.col, a.row) < std::tie(b.col, b.row);
            });

  SparseMatrix A;
  A.nrows = nrows;
  A.ncols = ncols;
  A.col_ptr.assign(static_cast<std::size_t>(ncols) + 1, 0);
  A.row_idx.reserve(entries.size());
  A.values.reserve(entries.size());

  std::size_t k = 0;
  for (index_t j = 0; j < ncols; ++j) {
    while (k < entries.size() && entries[k].col == j) {
      index_t i = entries[k].row;
      double v = 0.0;
      while (k < entries.size() && entries[k].col == j && entries[k].row == i) {
        v += entries[k].value;
        ++k;
      }
      if (v != 0.0) {
        A.row_idx.push_back(i);
        A.values.push_back(v);
      }
    }
    A.col_ptr[static_cast<std::size_t>(j) + 1] = A.nnz();
  }
  return A;
}

/// n-by-n identity.
inline SparseMatrix identity(index_t n) {
  SparseMatrix I;
  I.nrows = I.ncols = n;
  I.col_ptr.resize(static_cast<std::size_t>(n) + 1);
  I.row_idx.resize(static_cast<std::size_t>(n));
  I.values.assign(static_cast<std::size_t>(n), 1.0);
  for (index_t j = 0; j <= n; ++j) I.col_ptr[static_cast<std::size_t>(j)] = j;
  for (index_t j = 0; j < n; ++j) I.row_idx[static_cast<std::size_t>(j)] = j;
  return I;
}

/// Diagonal matrix from a vector; zeros yield absent entries.
inline SparseMatrix diagonal(const DenseVector& d) {
  std::vector<Triplet> ts;
  ts.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    ts.push_back({static_cast<index_t>(i), static_cast<index_t>(i), d[i]});
  }
  const auto n = static_cast<index_t>(d.size());
  return from_triplets(n, n, std::move(ts));
}

/// Drop stored exact zeros.  Idempotent; never adds entries.
inline SparseMatrix compress(const SparseMatrix& A) {
  SparseMatrix C;
  C.nrows = A.nrows;
  C.ncols = A.ncols;
  C.col_ptr.assign(static_cast<std::size_t>(A.ncols) + 1, 0);
  C.row_idx.reserve(A.row_idx.size());
  C.values.reserve(A.values.size());
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      if (A.values[static_cast<std::size_t>(p)] != 0.0) {
        C.row_idx.push_back(A.row_idx[static_cast<std::size_t>(p)]);
        C.values.push_back(A.values[static_cast<std::size_t>(p)]);
      }
    }
    C.col_ptr[static_cast<std::size_t>(j) + 1] = C.nnz();
  }
  return C;
}

/// Transpose; O(nnz) counting sort keeps columns sorted.
inline SparseMatrix transpose(const SparseMatrix& A) {
  SparseMatrix T;
  T.nrows = A.ncols;
  T.ncols = A.nrows;
  T.col_ptr.assign(static_cast<std::size_t>(A.nrows) + 1, 0);
  T.row_idx.resize(A.row_idx.size());
  T.values.resize(A.values.size());

  for (index_t r : A.row_idx) T.col_ptr[static_cast<std::size_t>(r) + 1]++;
  for (index_t i = 0; i < A.nrows; ++i) {
    T.col_ptr[static_cast<std::size_t>(i) + 1] +=
        T.col_ptr[static_cast<std::size_t>(i)];
  }
  std::vector<index_t> next(T.col_ptr.begin(), T.col_ptr.end() - 1);
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      const index_t i = A.row_idx[static_cast<std::size_t>(p)];
      const index_t q = next[static_cast<std::size_t>(i)]++;
      T.row_idx[static_cast<std::size_t>(q)] = j;
      T.values[static_cast<std::size_t>(q)] =
          A.values[static_cast<std::size_t>(p)];
    }
  }
  return T;
}

/// Entrywise sum; the pattern is the union of both patterns minus exact
/// cancellations.
inline SparseMatrix add(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.nrows != B.nrows || A.ncols != B.ncols) {
    throw dim_error("add: shape mismatch");
  }
  SparseMatrix C;
  C.nrows = A.nrows;
  C.ncols = A.ncols;
  C.col_ptr.assign(static_cast<std::size_t>(A.ncols) + 1, 0);
  C.row_idx.reserve(A.row_idx.size() + B.row_idx.size());
  C.values.reserve(A.values.size() + B.values.size());

  for (index_t j = 0; j < A.ncols; ++j) {
    index_t pa = A.col_ptr[j], pb = B.col_ptr[j];
    const index_t ea = A.col_ptr[j + 1], eb = B.col_ptr[j + 1];
    while (pa < ea || pb < eb) {
      index_t i;
      double v;
      const index_t ra = pa < ea ? A.row_idx[static_cast<std::size_t>(pa)]
                               : A.nrows;
      const index_t rb = pb < eb ? B.row_idx[static_cast<std::size_t>(pb)]
                               : B.nrows;
      if (ra < rb) {
        i = ra;
        v = A.values[static_cast<std::size_t>(pa++)];
      } else if (rb < ra) {
        i = rb;
        v = B.values[static_cast<std::size_t>(pb++)];
      } else {
        i = ra;
        v = A.values[static_cast<std::size_t>(pa++)] +
            B.values[static_cast<std::size_t>(pb++)];
      }
      if (v != 0.0) {
        C.row_idx.push_back(i);
        C.values.push_back(v);
      }
    }
    C.col_ptr[static_cast<std::size_t>(j) + 1] = C.nnz();
  }
  return C;
}

/// Entrywise scaling.  scale == 0 yields the empty pattern.
inline SparseMatrix scale(const SparseMatrix& A, double factor) {
  SparseMatrix C = A;
  for (auto& v : C.values) v *= factor;
  return compress(C);
}

/// Sparse product A*B via column-wise scatter/gather.
inline SparseMatrix matmul(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.ncols != B.nrows) throw dim_error("matmul: inner dimension mismatch");
  SparseMatrix C;
  C.nrows = A.nrows;
  C.ncols = B.ncols;
  C.col_ptr.assign(static_cast<std::size_t>(B.ncols) + 1, 0);

  std::vector<double> work(static_cast<std::size_t>(A.nrows), 0.0);
  std::vector<index_t> mark(static_cast<std::size_t>(A.nrows), -1);
  std::vector<index_t> pattern;

  for (index_t j = 0; j < B.ncols; ++j) {
    pattern.clear();
    for (index_t pb = B.col_ptr[j]; pb < B.col_ptr[j + 1]; ++pb) {
      const index_t k = B.row_idx[static_cast<std::size_t>(pb)];
      const double bkj = B.values[static_cast<std::size_t>(pb)];
      for (index_t pa = A.col_ptr[k]; pa < A.col_ptr[k + 1]; ++pa) {
        const index_t i = A.row_idx[static_cast<std::size_t>(pa)];
        if (mark[static_cast<std::size_t>(i)] != j) {
          mark[static_cast<std::size_t>(i)] = j;
          work[static_cast<std::size_t>(i)] = 0.0;
          pattern.push_back(i);
        }
        work[static_cast<std::size_t>(i)] +=
            A.values[static_cast<std::size_t>(pa)] * bkj;
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (index_t i : pattern) {
      const double v = work[static_cast<std::size_t>(i)];
      if (v != 0.0) {
        C.row_idx.push_back(i);
        C.values.push_back(v);
      }
    }
    C.col_ptr[static_cast<std::size_t>(j) + 1] = C.nnz();
  }
  return C;
}

/// y = A*x.
inline DenseVector matvec(const SparseMatrix& A, const DenseVector& x) {
  if (static_cast<index_t>(x.size()) != A.ncols) {
    throw dim_error("matvec: length mismatch");
  }
  DenseVector y(static_cast<std::size_t>(A.nrows), 0.0);
  for (index_t j = 0; j < A.ncols; ++j) {
    const double xj = x[static_cast<std::size_t>(j)];
    if (xj == 0.0) continue;
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      y[static_cast<std::size_t>(A.row_idx[static_cast<std::size_t>(p)])] +=
          A.values[static_cast<std::size_t>(p)] * xj;
    }
  }
  return y;
}

/// y = A^T*x without forming the transpose.
inline DenseVector matvec_transpose(const SparseMatrix& A,
                                    const DenseVector& x) {
  if (static_cast<index_t>(x.size()) != A.nrows) {
    throw dim_error("matvec_transpose: length mismatch");
  }
  DenseVector y(static_cast<std::size_t>(A.ncols), 0.0);
  for (index_t j = 0; j < A.ncols; ++j) {
    double s = 0.0;
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      s += A.values[static_cast<std::size_t>(p)] *
           x[static_cast<std::size_t>(A.row_idx[static_cast<std::size_t>(p)])];
    }
    y[static_cast<std::size_t>(j)] = s;
  }
  return y;
}

/// Vertical concatenation [A; B].
inline SparseMatrix vstack(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.ncols != B.ncols) throw dim_error("vstack: column count mismatch");
  SparseMatrix C;
  C.nrows = A.nrows + B.nrows;
  C.ncols = A.ncols;
  C.col_ptr.assign(static_cast<std::size_t>(A.ncols) + 1, 0);
  C.row_idx.reserve(A.row_idx.size() + B.row_idx.size());
  C.values.reserve(A.values.size() + B.values.size());
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      C.row_idx.push_back(A.row_idx[static_cast<std::size_t>(p)]);
      C.values.push_back(A.values[static_cast<std::size_t>(p)]);
    }
    for (index_t p = B.col_ptr[j]; p < B.col_ptr[j + 1]; ++p) {
      C.row_idx.push_back(A.nrows + B.row_idx[static_cast<std::size_t>(p)]);
      C.values.push_back(B.values[static_cast<std::size_t>(p)]);
    }
    C.col_ptr[static_cast<std::size_t>(j) + 1] = C.nnz();
  }
  return C;
}

/// Maximum absolute column sum.
inline double norm1(const SparseMatrix& A) {
  double best = 0.0;
  for (index_t j = 0; j < A.ncols; ++j) {
    double s = 0.0;
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      s += std::abs(A.values[static_cast<std::size_t>(p)]);
    }
    best = std::max(best, s);
  }
  return best;
}

/// Maximum absolute row sum.
inline double norm_inf(const SparseMatrix& A) {
  std::vector<double> rowsum(static_cast<std::size_t>(A.nrows), 0.0);
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      rowsum[static_cast<std::size_t>(A.row_idx[static_cast<std::size_t>(p)])] +=
          std::abs(A.values[static_cast<std::size_t>(p)]);
    }
  }
  double best = 0.0;
  for (double s : rowsum) best = std::max(best, s);
  return best;
}

inline double frobenius_norm(const SparseMatrix& A) {
  double s = 0.0;
  for (double v : A.values) s += v * v;
  return std::sqrt(s);
}

/// ||A - A^T||_1 <= rtol * ||A||_1, with exact equality accepted for rtol 0.
inline bool is_symmetric(const SparseMatrix& A, double rtol = 1e-12) {
  if (A.nrows != A.ncols) return false;
  const SparseMatrix D = add(A, scale(transpose(A), -1.0));
  return norm1(D) <= rtol * norm1(A);
}

/// Number of stored entries on or below the diagonal.
inline index_t lower_triangle_nnz(const SparseMatrix& A) {
  index_t count = 0;
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      if (A.row_idx[static_cast<std::size_t>(p)] >= j) ++count;
    }
  }
  return count;
}

/// Bandwidth in the |i - j| sense: 0 for diagonal, 1 for tridiagonal.
inline index_t bandwidth(const SparseMatrix& A) {
  index_t b = 0;
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      b = std::max(b, std::abs(A.row_idx[static_cast<std::size_t>(p)] - j));
    }
  }
  return b;
}

inline double norm2(const DenseVector& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace ctigo
