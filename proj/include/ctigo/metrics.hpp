/// \file metrics.hpp
/// Error and sparsity diagnostics comparing exact and incomplete factors.
#pragma once

#include <charconv>
#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctigo/cholesky.hpp"
#include "ctigo/dense.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/factorize.hpp"
#include "ctigo/gmrf.hpp"
#include "ctigo/io.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Everything one factorization run produced: sparsity counts, fill-in
/// n_f = nnz(L) - nnz(tril(Q)), the precision error ||Q - R^T R||_1 and, at
/// desk scale, the covariance error ||Q^{-1} - (R^T R)^{-1}||_1.
struct FactorizationReport {
  double tolerance = 0.0;
  index_t nnz_q = 0;
  index_t nnz_l = 0;
  index_t nnz_r = 0;
  index_t fill_in = 0;
  double error_precision_norm1 = 0.0;
  std::optional<double> error_covariance_norm1;
  double wall_time_ms = 0.0;
};

/// Populate a report for one (Q, L, R) triple.  The covariance error needs a
/// dense inverse and is computed only for n <= dense_limit.  Timing is the
/// caller's business (it alone knows what it measured).
inline FactorizationReport report(const SparseMatrix& Q, const LowerFactor& L,
                                  const UpperFactor& R, double tolerance,
                                  index_t dense_limit = kDenseLimit) {
  if (Q.nrows != L.dim() || Q.nrows != R.dim()) {
    throw dim_error("report: dimension mismatch");
  }
  FactorizationReport rep;
  rep.tolerance = tolerance;
  rep.nnz_q = Q.nnz();
  rep.nnz_l = L.matrix.nnz();
  rep.nnz_r = R.matrix.nnz();
  rep.fill_in = rep.nnz_l - lower_triangle_nnz(Q);
  const SparseMatrix rtr = matmul(transpose(R.matrix), R.matrix);
  rep.error_precision_norm1 = norm1(add(Q, scale(rtr, -1.0)));
  if (Q.nrows <= dense_limit) {
    rep.error_covariance_norm1 =
        norm1(subtract(dense_inverse(Q, dense_limit),
                       dense_inverse(rtr, dense_limit)));
  }
  return rep;
}

/// The paper-style experiment for one prior precision Q1: condition with
/// Q2 = I, stack A = [L1^T; I], and factor A once per tolerance.  The same
/// stacked matrix is reused across the sweep; reports come back in the given
/// order with the factorization wall time filled in.
inline std::vector<FactorizationReport> tolerance_sweep(
    const SparseMatrix& Q1, const std::vector<double>& taus,
    index_t dense_limit = kDenseLimit) {
  if (taus.empty()) throw param_error("tolerance_sweep: no tolerances given");
  for (double t : taus) {
    if (!(t >= 0.0)) throw param_error("tolerance_sweep: negative tolerance");
  }
  const LowerFactor L1 = cholesky(Q1);
  LowerFactor L2;
  L2.matrix = identity(Q1.nrows);
  const SparseMatrix A = stack_factor(L1, L2);
  const SparseMatrix Q = add(Q1, identity(Q1.nrows));
  const LowerFactor L = cholesky(Q);

  std::vector<FactorizationReport> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    const auto t0 = std::chrono::steady_clock::now();
    const Factorization f = ctigo_factorize(A, DropRule::threshold(tau));
    const auto t1 = std::chrono::steady_clock::now();
    FactorizationReport rep = report(Q, L, f.factor, tau, dense_limit);
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.push_back(std::move(rep));
  }
  return out;
}

/// Binary occupancy image: pixel black iff the entry is stored.
inline GrayImage pattern_image(const SparseMatrix& M) {
  GrayImage img;
  img.width = M.ncols;
  img.height = M.nrows;
  img.pixels.assign(
      static_cast<std::size_t>(M.ncols) * static_cast<std::size_t>(M.nrows),
      255);
  for (index_t j = 0; j < M.ncols; ++j) {
    for (index_t p = M.col_ptr[j]; p < M.col_ptr[j + 1]; ++p) {
      img.pixels[static_cast<std::size_t>(
          M.row_idx[static_cast<std::size_t>(p)] * M.ncols + j)] = 0;
    }
  }
  return img;
}

namespace detail {

inline std::string format_scientific(double v, int precision = 6) {
  char buf[48];
  auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific,
                    precision);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline constexpr const char* kReportCsvHeader =
    "tolerance,nnz_q,nnz_l,nnz_r,fill_in,err_prec_1norm,err_cov_1norm,wall_ms";

/// CSV serialization with the fixed header; absent covariance errors leave
/// the field empty.
inline std::string reports_to_csv(const std::vector<FactorizationReport>& reps) {
  std::ostringstream out;
  out << kReportCsvHeader << "\r\n";
  for (const auto& r : reps) {
    out << format_double(r.tolerance) << "," << r.nnz_q << "," << r.nnz_l
        << "," << r.nnz_r << "," << r.fill_in << ","
        << format_double(r.error_precision_norm1) << ",";
    if (r.error_covariance_norm1) out << format_double(*r.error_covariance_norm1);
    out << "," << format_double(r.wall_time_ms) << "\r\n";
  }
  return out.str();
}

/// Human-readable table in the (tolerance | error) layout.
inline std::string reports_to_table(
    const std::vector<FactorizationReport>& reps) {
  std::ostringstream out;
  out << "  tolerance |        error |  nnz(R) |  nnz(L) | fill-in\n";
  out << "  ----------+--------------+---------+---------+--------\n";
  for (const auto& r : reps) {
    std::string tol = format_double(r.tolerance);
    out << std::string(tol.size() < 11 ? 11 - tol.size() : 0, ' ') << tol
        << " | " << detail::format_scientific(r.error_precision_norm1) << " | ";
    std::string nr = std::to_string(r.nnz_r);
    std::string nl = std::to_string(r.nnz_l);
    std::string fi = std::to_string(r.fill_in);
    out << std::string(nr.size() < 7 ? 7 - nr.size() : 0, ' ') << nr << " | "
        << std::string(nl.size() < 7 ? 7 - nl.size() : 0, ' ') << nl << " | "
        << std::string(fi.size() < 6 ? 6 - fi.size() : 0, ' ') << fi << "\n";
  }
  return out.str();
}

}  // namespace ctigo
