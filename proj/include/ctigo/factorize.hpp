/// \file factorize.hpp
/// Column-wise threshold incomplete Givens orthogonalization (cTIGO).
///
/// Factors a tall matrix A (m >= n) as A = S R + E with R upper triangular
/// and S orthogonal.  Entries falling under the dropping rule are discarded
/// while the sweep runs, which keeps R sparse; R is then an incomplete
/// Cholesky factor of A^T A.  Only the (c, s) pairs are needed, so S is
/// never formed unless explicitly requested.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ctigo/dense.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/givens.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Dropping strategy: a relative numerical threshold (dynamic pattern) or a
/// fixed sparsity pattern decided up front.  Diagonal positions are always
/// kept by either rule.
class DropRule {
 public:
  enum class Kind { threshold, fixed_pattern };

  static DropRule threshold(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
      throw param_error("DropRule: tolerance must be finite and >= 0");
    }
    DropRule r;
    r.kind_ = Kind::threshold;
    r.tau_ = tau;
    return r;
  }

  static DropRule fixed_pattern(
      const std::vector<std::pair<index_t, index_t>>& keep) {
    DropRule r;
    r.kind_ = Kind::fixed_pattern;
    for (auto [i, j] : keep) r.pattern_.insert(pack(i, j));
    return r;
  }

  /// Fixed pattern taken from the stored entries of a matrix.
  static DropRule pattern_of(const SparseMatrix& M) {
    DropRule r;
    r.kind_ = Kind::fixed_pattern;
    for (index_t j = 0; j < M.ncols; ++j) {
      for (index_t p = M.col_ptr[j]; p < M.col_ptr[j + 1]; ++p) {
        r.pattern_.insert(pack(M.row_idx[static_cast<std::size_t>(p)], j));
      }
    }
    return r;
  }

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }

  /// Fixed-pattern membership; the full diagonal always belongs.
  bool keeps(index_t i, index_t j) const {
    return i == j || pattern_.count(pack(i, j)) > 0;
  }

 private:
  static std::uint64_t pack(index_t i, index_t j) {
    return (static_cast<std::uint64_t>(i) << 32) |
           static_cast<std::uint32_t>(j);
  }

  Kind kind_ = Kind::threshold;
  double tau_ = 0.0;
  std::unordered_set<std::uint64_t> pattern_;
};

/// Upper triangular factor with positive diagonal plus sweep statistics.
struct UpperFactor {
  SparseMatrix matrix;
  index_t dropped_count = 0;
  index_t rotations_applied = 0;

  index_t dim() const { return matrix.ncols; }
};

/// Result of a factorization run.  The orthogonal accumulator and the
/// rotation log are filled only when tracking was requested.
struct Factorization {
  UpperFactor factor;
  std::optional<DenseMatrix> orthogonal;  // S with A = S*R + E
  double residual_norm1 = 0.0;            // ||A - S*R||_1, tracking only
  std::vector<GivensRotation> rotations;
  std::vector<index_t> sign_flips;  // rows negated to keep the diagonal positive
};

namespace detail {

/// The matrix rows under rotation: parallel (column, value) arrays sorted by
/// column.
struct WorkRow {
  std::vector<index_t> cols;
  std::vector<double> vals;

  bool empty() const { return cols.empty(); }
  index_t first_col() const { return cols.front(); }
};

/// Survival test for one produced entry.  `row` is the physical row the
/// entry lives in, which is also the row of R it may end up in.  A fixed
/// pattern constrains finalized R rows only, so it never touches rows that
/// are still waiting to be annihilated.
inline bool keep_entry(const DropRule& rule, index_t row, index_t col, double v,
                       bool is_pivot_row, const std::vector<double>& colscale,
                       index_t& dropped) {
  if (v == 0.0) return false;  // exact cancellation, never stored or counted
  if (col == row) return true;
  if (rule.kind() == DropRule::Kind::threshold) {
    if (std::abs(v) <
        rule.tau() * colscale[static_cast<std::size_t>(col)]) {
      ++dropped;
      return false;
    }
    return true;
  }
  if (is_pivot_row && !rule.keeps(row, col)) {
    ++dropped;
    return false;
  }
  return true;
}

}  // namespace detail

/// cTIGO sweep.  Columns are processed left to right; within column j the
/// subdiagonal entries are annihilated bottom-up against pivot row j, and the
/// dropping rule is applied to both modified rows after every rotation (the
/// nonzero pattern of R is determined dynamically).  For the threshold rule
/// an entry in column k survives unless |value| < tau * colscale(k), where
/// colscale(k) is the infinity norm of column k of the original A; the fixed
/// pattern rule constrains the rows of R only.  Diagonal entries are never
/// dropped.
///
/// With tau = 0 nothing is discarded and R equals the Cholesky factor of
/// A^T A up to roundoff.  Set track_orthogonal to also accumulate S
/// (desk scale only, n <= 512) together with ||A - S*R||_1.
inline Factorization ctigo_factorize(const SparseMatrix& A,
                                     const DropRule& rule,
                                     bool track_orthogonal = false) {
  const index_t m = A.nrows;
  const index_t n = A.ncols;
  if (m < n) {
    throw dim_error("ctigo_factorize: matrix must have nrows >= ncols");
  }
  constexpr index_t kTrackLimit = 512;
  if (track_orthogonal && n > kTrackLimit) {
    throw size_error("ctigo_factorize: orthogonal tracking limited to n <= " +
                     std::to_string(kTrackLimit));
  }

  // Column scales come from the original matrix, so the threshold keeps its
  // meaning across rescaled inputs.
  std::vector<double> colscale(static_cast<std::size_t>(n), 0.0);
  if (rule.kind() == DropRule::Kind::threshold) {
    for (index_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
        s = std::max(s, std::abs(A.values[static_cast<std::size_t>(p)]));
      }
      colscale[static_cast<std::size_t>(j)] = s;
    }
  }

  // Row-wise working copy of A.
  std::vector<detail::WorkRow> rows(static_cast<std::size_t>(m));
  for (index_t j = 0; j < n; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      auto& r = rows[static_cast<std::size_t>(
          A.row_idx[static_cast<std::size_t>(p)])];
      r.cols.push_back(j);
      r.vals.push_back(A.values[static_cast<std::size_t>(p)]);
    }
  }

  // bucket[c] holds rows whose leading entry currently sits in column c.
  // Entries go stale once a row is finalized; stage j skips rows <= j.
  std::vector<std::vector<index_t>> bucket(static_cast<std::size_t>(n));
  for (index_t r = 0; r < m; ++r) {
    if (!rows[static_cast<std::size_t>(r)].empty()) {
      bucket[static_cast<std::size_t>(
                 rows[static_cast<std::size_t>(r)].first_col())]
          .push_back(r);
    }
  }

  Factorization out;
  if (track_orthogonal) out.orthogonal = DenseMatrix::eye(m);

  detail::WorkRow new_pivot, new_other;
  std::vector<index_t> cand;

  for (index_t j = 0; j < n; ++j) {
    cand.clear();
    for (index_t r : bucket[static_cast<std::size_t>(j)]) {
      if (r > j) cand.push_back(r);
    }
    std::sort(cand.begin(), cand.end(), std::greater<index_t>());

    for (index_t r : cand) {
      detail::WorkRow& pivot = rows[static_cast<std::size_t>(j)];
      detail::WorkRow& other = rows[static_cast<std::size_t>(r)];
      const double b = other.vals.front();  // leading entry, column j
      const double a =
          (!pivot.empty() && pivot.first_col() == j) ? pivot.vals.front() : 0.0;
      const auto [c, s] = compute_givens(a, b);
      ++out.factor.rotations_applied;
      if (track_orthogonal) {
        out.rotations.push_back({j, r, c, s});
        DenseMatrix& S = *out.orthogonal;
        for (index_t i = 0; i < m; ++i) {
          const double sp = S(i, j), so = S(i, r);
          S(i, j) = c * sp + s * so;
          S(i, r) = -s * sp + c * so;
        }
      }

      // Merge-rotate the two rows; the column-j entry of `other` is
      // annihilated by construction and removed explicitly.
      new_pivot.cols.clear();
      new_pivot.vals.clear();
      new_other.cols.clear();
      new_other.vals.clear();
      std::size_t pa = 0, pb = 0;
      while (pa < pivot.cols.size() || pb < other.cols.size()) {
        index_t col;
        double va = 0.0, vb = 0.0;
        const index_t ca = pa < pivot.cols.size() ? pivot.cols[pa] : n;
        const index_t cb = pb < other.cols.size() ? other.cols[pb] : n;
        if (ca <= cb) {
          col = ca;
          va = pivot.vals[pa++];
        } else {
          col = cb;
        }
        if (cb == col && pb < other.cols.size() && other.cols[pb] == col) {
          vb = other.vals[pb++];
        }
        const double vp = c * va + s * vb;
        const double vo = -s * va + c * vb;
        if (detail::keep_entry(rule, j, col, vp, true, colscale,
                               out.factor.dropped_count)) {
          new_pivot.cols.push_back(col);
          new_pivot.vals.push_back(vp);
        }
        if (col != j && detail::keep_entry(rule, r, col, vo, false, colscale,
                                           out.factor.dropped_count)) {
          new_other.cols.push_back(col);
          new_other.vals.push_back(vo);
        }
      }
      std::swap(pivot, new_pivot);
      std::swap(other, new_other);
      if (!other.empty()) {
        bucket[static_cast<std::size_t>(other.first_col())].push_back(r);
      }
    }

    // Finalize pivot row j as row j of R.  A fixed pattern is enforced here
    // as well, which covers columns that saw no rotation at all.
    detail::WorkRow& pivot = rows[static_cast<std::size_t>(j)];
    if (rule.kind() == DropRule::Kind::fixed_pattern) {
      std::size_t w = 0;
      for (std::size_t p = 0; p < pivot.cols.size(); ++p) {
        if (rule.keeps(j, pivot.cols[p])) {
          pivot.cols[w] = pivot.cols[p];
          pivot.vals[w] = pivot.vals[p];
          ++w;
        } else {
          ++out.factor.dropped_count;
        }
      }
      pivot.cols.resize(w);
      pivot.vals.resize(w);
    }
    if (pivot.empty() || pivot.first_col() != j ||
        std::abs(pivot.vals.front()) < 1e-300) {
      throw rank_error(
          "ctigo_factorize: structurally rank-deficient column " +
              std::to_string(j),
          j);
    }
    if (pivot.vals.front() < 0.0) {
      for (double& v : pivot.vals) v = -v;
      out.sign_flips.push_back(j);
      if (track_orthogonal) {
        DenseMatrix& S = *out.orthogonal;
        for (index_t i = 0; i < m; ++i) S(i, j) = -S(i, j);
      }
    }
  }

  std::vector<Triplet> ts;
  for (index_t i = 0; i < n; ++i) {
    const detail::WorkRow& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < row.cols.size(); ++p) {
      ts.push_back({i, row.cols[p], row.vals[p]});
    }
  }
  out.factor.matrix = from_triplets(n, n, std::move(ts));

  if (track_orthogonal) {
    DenseMatrix W(m, n);
    for (index_t i = 0; i < m; ++i) {
      const detail::WorkRow& row = rows[static_cast<std::size_t>(i)];
      for (std::size_t p = 0; p < row.cols.size(); ++p) {
        W(i, row.cols[p]) = row.vals[p];
      }
    }
    out.residual_norm1 =
        norm1(subtract(to_dense(A), matmul(*out.orthogonal, W)));
  }
  return out;
}

/// Back substitution R x = b.
inline DenseVector solve_upper(const UpperFactor& F, const DenseVector& b) {
  const SparseMatrix& R = F.matrix;
  if (static_cast<index_t>(b.size()) != R.nrows) {
    throw dim_error("solve_upper: length mismatch");
  }
  DenseVector x = b;
  for (index_t j = R.ncols - 1; j >= 0; --j) {
    const index_t pd = R.col_ptr[j + 1] - 1;  // diagonal is last in its column
    if (pd < R.col_ptr[j] || R.row_idx[static_cast<std::size_t>(pd)] != j ||
        R.values[static_cast<std::size_t>(pd)] == 0.0) {
      throw singular_error("solve_upper: zero diagonal at column " +
                           std::to_string(j));
    }
    const double xj =
        x[static_cast<std::size_t>(j)] / R.values[static_cast<std::size_t>(pd)];
    x[static_cast<std::size_t>(j)] = xj;
    for (index_t p = R.col_ptr[j]; p < pd; ++p) {
      x[static_cast<std::size_t>(R.row_idx[static_cast<std::size_t>(p)])] -=
          R.values[static_cast<std::size_t>(p)] * xj;
    }
  }
  return x;
}

/// Forward substitution R^T x = b.
inline DenseVector solve_upper_transpose(const UpperFactor& F,
                                         const DenseVector& b) {
  const SparseMatrix& R = F.matrix;
  if (static_cast<index_t>(b.size()) != R.nrows) {
    throw dim_error("solve_upper_transpose: length mismatch");
  }
  DenseVector x = b;
  for (index_t j = 0; j < R.ncols; ++j) {
    const index_t pd = R.col_ptr[j + 1] - 1;
    if (pd < R.col_ptr[j] || R.row_idx[static_cast<std::size_t>(pd)] != j ||
        R.values[static_cast<std::size_t>(pd)] == 0.0) {
      throw singular_error("solve_upper_transpose: zero diagonal at column " +
                           std::to_string(j));
    }
    double s = x[static_cast<std::size_t>(j)];
    for (index_t p = R.col_ptr[j]; p < pd; ++p) {
      s -= R.values[static_cast<std::size_t>(p)] *
           x[static_cast<std::size_t>(R.row_idx[static_cast<std::size_t>(p)])];
    }
    x[static_cast<std::size_t>(j)] = s / R.values[static_cast<std::size_t>(pd)];
  }
  return x;
}

/// ||A^T A - R^T R||_1: the 1-norm of the precision error matrix E.
inline double factorization_error(const SparseMatrix& A,
                                  const UpperFactor& R) {
  if (A.ncols != R.matrix.ncols) {
    throw dim_error("factorization_error: dimension mismatch");
  }
  const SparseMatrix ata = matmul(transpose(A), A);
  const SparseMatrix rtr = matmul(transpose(R.matrix), R.matrix);
  return norm1(add(ata, scale(rtr, -1.0)));
}

}  // namespace ctigo
