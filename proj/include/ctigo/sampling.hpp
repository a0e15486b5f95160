/// \file sampling.hpp
/// Drawing GMRF samples from a factor (exact or incomplete) and via the
/// least-squares route: the minimizer of ||A y - z||_2 with z standard normal
/// is a draw from N(0, (A^T A)^{-1}).
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ctigo/cholesky.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/factorize.hpp"
#include "ctigo/gmrf.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

namespace detail {

/// Lower tail / central / upper tail rational approximation of the standard
/// normal quantile function (Acklam), good to about 1e-9 relative error.
inline double inverse_normal_cdf(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

/// Deterministic seeded source of standard normal variates.  A splitmix64
/// counter generator feeds the inverse normal CDF; identical seeds give
/// identical streams on every platform.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

  static constexpr const char* algorithm() { return "splitmix64-icdf"; }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return detail::inverse_normal_cdf(uniform01()); }

  DenseVector normal_vector(index_t n) {
    DenseVector z(static_cast<std::size_t>(n));
    for (auto& v : z) v = normal();
    return z;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

/// Draw x with precision L L^T: sample z ~ N(0, I), solve L^T x = z, add the
/// mean if given.
inline DenseVector sample_with_factor(const LowerFactor& L, RandomSource& rng,
                                      const DenseVector* mu = nullptr) {
  DenseVector z = rng.normal_vector(L.dim());
  DenseVector x = solve_upper_transpose(L, z);
  if (mu) {
    if (mu->size() != x.size()) {
      throw dim_error("sample_with_factor: mean length mismatch");
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += (*mu)[i];
  }
  return x;
}

/// Draw x with precision R^T R (the incomplete-factor approximation when R
/// came from a positive dropping tolerance): solve R x = z.
inline DenseVector sample_with_factor(const UpperFactor& R, RandomSource& rng,
                                      const DenseVector* mu = nullptr) {
  DenseVector z = rng.normal_vector(R.dim());
  DenseVector x = solve_upper(R, z);
  if (mu) {
    if (mu->size() != x.size()) {
      throw dim_error("sample_with_factor: mean length mismatch");
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += (*mu)[i];
  }
  return x;
}

/// argmin_x ||A x - rhs||_2 through the library's own orthogonal
/// factorization (tau = 0): solve R^T (R x) = A^T rhs.
inline DenseVector least_squares_solve(const SparseMatrix& A,
                                       const DenseVector& rhs) {
  if (static_cast<index_t>(rhs.size()) != A.nrows) {
    throw dim_error("least_squares_solve: length mismatch");
  }
  const Factorization f = ctigo_factorize(A, DropRule::threshold(0.0));
  const DenseVector atz = matvec_transpose(A, rhs);
  return solve_upper(f.factor, solve_upper_transpose(f.factor, atz));
}

/// Same problem via the normal equations with an exact Cholesky factor;
/// kept as an independent cross-check of the orthogonal route.
inline DenseVector least_squares_solve_normal(const SparseMatrix& A,
                                              const DenseVector& rhs) {
  if (static_cast<index_t>(rhs.size()) != A.nrows) {
    throw dim_error("least_squares_solve_normal: length mismatch");
  }
  const LowerFactor L = cholesky(matmul(transpose(A), A));
  const DenseVector atz = matvec_transpose(A, rhs);
  return solve_upper_transpose(L, solve_lower(L, atz));
}

/// Draw from N(0, (A^T A)^{-1}) by solving the least squares problem against
/// a standard normal right-hand side of length m.
inline DenseVector sample_least_squares(const SparseMatrix& A,
                                        RandomSource& rng) {
  if (A.nrows < A.ncols) {
    throw dim_error("sample_least_squares: matrix must have nrows >= ncols");
  }
  DenseVector z = rng.normal_vector(A.nrows);
  return least_squares_solve(A, z);
}

/// Mean of a canonical GMRF: the solution of Q mu = b.
inline DenseVector canonical_mean(const CanonicalGmrf& g) {
  const LowerFactor L = cholesky(g.Q);
  return solve_upper_transpose(L, solve_lower(L, g.b));
}

}  // namespace ctigo
