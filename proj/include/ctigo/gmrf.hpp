/// \file gmrf.hpp
/// Precision-matrix builders (random walks, Poisson / Toeplitz structures,
/// SPDE discretizations) and the conditioning operations that produce
/// canonical GMRFs N_c(b, Q), density proportional to exp(-x^T Q x / 2 + b^T x)
/// with mean Q^{-1} b.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctigo/cholesky.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Where a canonical GMRF came from.
enum class Provenance {
  Prior,
  SoftConstraint,
  DataConditioned,
  GmrfApprox,
  AuxProbit,
  AuxLogit,
};

/// Canonical parametrization N_c(b, Q); mean is Q^{-1} b.
struct CanonicalGmrf {
  DenseVector b;
  SparseMatrix Q;
  Provenance provenance = Provenance::Prior;

  index_t dim() const { return Q.nrows; }
};

/// Regular grid underlying the SPDE discretizations.
struct GridSpec {
  index_t nx;
  index_t ny;
  double h = 1.0;

  GridSpec(index_t nx_, index_t ny_, double h_ = 1.0) : nx(nx_), ny(ny_), h(h_) {
    if (nx < 3 || ny < 3) throw param_error("GridSpec: need nx, ny >= 3");
    if (!(h > 0.0)) throw param_error("GridSpec: spacing must be positive");
  }
  index_t n() const { return nx * ny; }
};

/// Symmetric positive definite 2x2 tensor controlling range and anisotropy.
struct AnisotropyTensor {
  double h11;
  double h12;
  double h22;

  AnisotropyTensor(double a11, double a12, double a22)
      : h11(a11), h12(a12), h22(a22) {
    if (!(h11 > 0.0 && h22 > 0.0 && h11 * h22 - h12 * h12 > 0.0)) {
      throw param_error("AnisotropyTensor: matrix must be SPD");
    }
  }
};

// ---------------------------------------------------------------------------
// Precision builders
// ---------------------------------------------------------------------------

/// The 9x9 circulant-like example: diagonal 5, first off-diagonals -1, and
/// corner entries (1,9), (9,1) equal to -1.  A torus-like structure whose
/// exact Cholesky factor fills in badly.
inline SparseMatrix build_example_q1() {
  const index_t n = 9;
  std::vector<Triplet> ts;
  for (index_t i = 0; i < n; ++i) ts.push_back({i, i, 5.0});
  for (index_t i = 0; i + 1 < n; ++i) {
    ts.push_back({i, i + 1, -1.0});
    ts.push_back({i + 1, i, -1.0});
  }
  ts.push_back({0, n - 1, -1.0});
  ts.push_back({n - 1, 0, -1.0});
  return from_triplets(n, n, std::move(ts));
}

namespace detail {

/// Gram matrix D^T D of a difference operator plus diagonal jitter.
inline SparseMatrix gram_with_jitter(const SparseMatrix& D, double jitter) {
  SparseMatrix Q = matmul(transpose(D), D);
  if (jitter != 0.0) {
    Q = add(Q, scale(identity(Q.nrows), jitter));
  }
  return Q;
}

}  // namespace detail

/// First-order random walk precision: tridiagonal with interior stencil
/// (-1, 2, -1) and boundary rows (1, -1).  The intrinsic model is singular;
/// `jitter` is added to every diagonal entry to restore full rank.
inline SparseMatrix build_rw1(index_t n, double jitter) {
  if (n < 3) throw param_error("build_rw1: need n >= 3");
  if (!(jitter >= 0.0)) throw param_error("build_rw1: jitter must be >= 0");
  std::vector<Triplet> ts;
  for (index_t i = 0; i + 1 < n; ++i) {
    ts.push_back({i, i, -1.0});
    ts.push_back({i, i + 1, 1.0});
  }
  const SparseMatrix D = from_triplets(n - 1, n, std::move(ts));
  return detail::gram_with_jitter(D, jitter);
}

/// Second-order random walk precision: pentadiagonal with interior stencil
/// (1, -4, 6, -4, 1) and the standard second-difference boundary rows.
inline SparseMatrix build_rw2(index_t n, double jitter) {
  if (n < 5) throw param_error("build_rw2: need n >= 5");
  if (!(jitter >= 0.0)) throw param_error("build_rw2: jitter must be >= 0");
  std::vector<Triplet> ts;
  for (index_t i = 0; i + 2 < n; ++i) {
    ts.push_back({i, i, 1.0});
    ts.push_back({i, i + 1, -2.0});
    ts.push_back({i, i + 2, 1.0});
  }
  const SparseMatrix D = from_triplets(n - 2, n, std::move(ts));
  return detail::gram_with_jitter(D, jitter);
}

/// Block tridiagonal matrix of order n^2 from the 5-point discretization of
/// Poisson's equation on an n-by-n mesh: diagonal 4, grid neighbors -1.
inline SparseMatrix build_poisson(index_t n) {
  if (n < 2) throw param_error("build_poisson: need n >= 2");
  const index_t size = n * n;
  std::vector<Triplet> ts;
  for (index_t r = 0; r < n; ++r) {
    for (index_t c = 0; c < n; ++c) {
      const index_t node = r * n + c;
      ts.push_back({node, node, 4.0});
      if (c + 1 < n) {
        ts.push_back({node, node + 1, -1.0});
        ts.push_back({node + 1, node, -1.0});
      }
      if (r + 1 < n) {
        ts.push_back({node, node + n, -1.0});
        ts.push_back({node + n, node, -1.0});
      }
    }
  }
  return from_triplets(size, size, std::move(ts));
}

/// Symmetric banded Toeplitz matrix with corner entries (1,n) = (n,1) = 1
/// destroying the band.  band[0] is the diagonal value, band[k] the value at
/// distance k.  The result is validated to be SPD.
inline SparseMatrix build_toeplitz_corner(index_t n,
                                          const std::vector<double>& band) {
  if (band.empty()) throw param_error("build_toeplitz_corner: empty band");
  if (static_cast<index_t>(band.size()) > n - 2) {
    throw param_error("build_toeplitz_corner: band too wide for corners");
  }
  std::vector<Triplet> ts;
  for (index_t i = 0; i < n; ++i) {
    ts.push_back({i, i, band[0]});
    for (std::size_t k = 1; k < band.size(); ++k) {
      const index_t j = i + static_cast<index_t>(k);
      if (j < n && band[k] != 0.0) {
        ts.push_back({i, j, band[k]});
        ts.push_back({j, i, band[k]});
      }
    }
  }
  ts.push_back({0, n - 1, 1.0});
  ts.push_back({n - 1, 0, 1.0});
  const SparseMatrix Q = from_triplets(n, n, std::move(ts));
  cholesky(Q);  // SPD validation; throws not_spd_error otherwise
  return Q;
}

/// Matern-type precision from (kappa^2 - Laplacian) applied twice on a
/// regular grid with Neumann boundary: Q = h^2 * B * B with
/// B = kappa^2 I + G / h^2, G the 5-point graph Laplacian.  The interior
/// stencil of Q has 13 points.
inline SparseMatrix build_spde_matern(const GridSpec& grid, double kappa) {
  if (!(kappa > 0.0)) throw param_error("build_spde_matern: kappa must be > 0");
  const double ih2 = 1.0 / (grid.h * grid.h);
  std::vector<Triplet> ts;
  for (index_t iy = 0; iy < grid.ny; ++iy) {
    for (index_t ix = 0; ix < grid.nx; ++ix) {
      const index_t node = iy * grid.nx + ix;
      index_t degree = 0;
      auto neighbor = [&](index_t jx, index_t jy) {
        if (jx < 0 || jx >= grid.nx || jy < 0 || jy >= grid.ny) return;
        ++degree;
        ts.push_back({node, jy * grid.nx + jx, -ih2});
      };
      neighbor(ix - 1, iy);
      neighbor(ix + 1, iy);
      neighbor(ix, iy - 1);
      neighbor(ix, iy + 1);
      ts.push_back({node, node, kappa * kappa + degree * ih2});
    }
  }
  const SparseMatrix B = from_triplets(grid.n(), grid.n(), std::move(ts));
  return scale(matmul(B, B), grid.h * grid.h);
}

/// Anisotropic precision from kappa^2 x - div(H grad x) on a regular grid
/// with periodic boundary: Q = h^2 * B^T B with B = kappa^2 I + A_H / h^2.
/// Axis terms use centered second differences, the cross term centered mixed
/// differences on the diagonal neighbors; the wraparound produces entries in
/// the corners of the matrix.
inline SparseMatrix build_spde_aniso(const GridSpec& grid, double kappa,
                                     const AnisotropyTensor& H) {
  if (!(kappa > 0.0)) throw param_error("build_spde_aniso: kappa must be > 0");
  const double ih2 = 1.0 / (grid.h * grid.h);
  std::vector<Triplet> ts;
  for (index_t iy = 0; iy < grid.ny; ++iy) {
    for (index_t ix = 0; ix < grid.nx; ++ix) {
      const index_t node = iy * grid.nx + ix;
      auto wrap = [&](index_t jx, index_t jy) {
        jx = (jx + grid.nx) % grid.nx;
        jy = (jy + grid.ny) % grid.ny;
        return jy * grid.nx + jx;
      };
      ts.push_back({node, node, kappa * kappa + 2.0 * (H.h11 + H.h22) * ih2});
      ts.push_back({node, wrap(ix - 1, iy), -H.h11 * ih2});
      ts.push_back({node, wrap(ix + 1, iy), -H.h11 * ih2});
      ts.push_back({node, wrap(ix, iy - 1), -H.h22 * ih2});
      ts.push_back({node, wrap(ix, iy + 1), -H.h22 * ih2});
      if (H.h12 != 0.0) {
        const double cross = 0.5 * H.h12 * ih2;
        ts.push_back({node, wrap(ix + 1, iy + 1), -cross});
        ts.push_back({node, wrap(ix - 1, iy - 1), -cross});
        ts.push_back({node, wrap(ix + 1, iy - 1), cross});
        ts.push_back({node, wrap(ix - 1, iy + 1), cross});
      }
    }
  }
  const SparseMatrix B = from_triplets(grid.n(), grid.n(), std::move(ts));
  return scale(matmul(transpose(B), B), grid.h * grid.h);
}

// ---------------------------------------------------------------------------
// Conditioning
// ---------------------------------------------------------------------------

/// Q2 = Aobs^T Qeps Aobs, the precision contribution of Gaussian observations.
inline SparseMatrix observation_precision(const SparseMatrix& Aobs,
                                          const SparseMatrix& Qeps) {
  if (Qeps.nrows != Qeps.ncols || Qeps.nrows != Aobs.nrows) {
    throw dim_error("observation_precision: dimension mismatch");
  }
  return matmul(transpose(Aobs), matmul(Qeps, Aobs));
}

/// Condition a zero-mean GMRF on Gaussian data y = Aobs x + noise:
/// N_c(Aobs^T Qeps y, Q1 + Aobs^T Qeps Aobs).  The same formula realizes the
/// soft-constraint form, selected via `provenance`.
inline CanonicalGmrf condition_on_gaussian_data(
    const SparseMatrix& Q1, const SparseMatrix& Aobs, const SparseMatrix& Qeps,
    const DenseVector& y, Provenance provenance = Provenance::DataConditioned) {
  if (Aobs.ncols != Q1.nrows || Aobs.nrows > Aobs.ncols) {
    throw dim_error("condition_on_gaussian_data: observation shape mismatch");
  }
  if (static_cast<index_t>(y.size()) != Aobs.nrows) {
    throw dim_error("condition_on_gaussian_data: data length mismatch");
  }
  CanonicalGmrf g;
  g.b = matvec_transpose(Aobs, matvec(Qeps, y));
  g.Q = add(Q1, observation_precision(Aobs, Qeps));
  g.provenance = provenance;
  return g;
}

/// Probit auxiliary-variable conditional: N_c(Z^T omega, Q1 + Z^T Z).
inline CanonicalGmrf condition_aux_probit(const SparseMatrix& Q1,
                                          const SparseMatrix& Z,
                                          const DenseVector& omega) {
  if (Z.ncols != Q1.nrows || static_cast<index_t>(omega.size()) != Z.nrows) {
    throw dim_error("condition_aux_probit: dimension mismatch");
  }
  CanonicalGmrf g;
  g.b = matvec_transpose(Z, omega);
  g.Q = add(Q1, matmul(transpose(Z), Z));
  g.provenance = Provenance::AuxProbit;
  return g;
}

/// Logit auxiliary-variable conditional with Lambda = diag(lambda):
/// N_c(Z^T Lambda omega, Q1 + Z^T Lambda Z).
inline CanonicalGmrf condition_aux_logit(const SparseMatrix& Q1,
                                         const SparseMatrix& Z,
                                         const DenseVector& omega,
                                         const DenseVector& lambda) {
  if (Z.ncols != Q1.nrows || static_cast<index_t>(omega.size()) != Z.nrows ||
      lambda.size() != omega.size()) {
    throw dim_error("condition_aux_logit: dimension mismatch");
  }
  for (double l : lambda) {
    if (!(l > 0.0)) {
      throw param_error("condition_aux_logit: lambda entries must be > 0");
    }
  }
  DenseVector lw(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) lw[i] = lambda[i] * omega[i];
  CanonicalGmrf g;
  g.b = matvec_transpose(Z, lw);
  g.Q = add(Q1, matmul(transpose(Z), matmul(diagonal(lambda), Z)));
  g.provenance = Provenance::AuxLogit;
  return g;
}

/// Gaussian proposal from a second-order expansion of a non-Gaussian
/// likelihood: N_c(b, Q1 + diag(c)) with each c_i < 0 clamped to zero, so the
/// Markov pattern of the prior is preserved.
inline CanonicalGmrf gmrf_approximation(const SparseMatrix& Q1,
                                        const DenseVector& b,
                                        const DenseVector& c) {
  if (static_cast<index_t>(b.size()) != Q1.nrows || b.size() != c.size()) {
    throw dim_error("gmrf_approximation: length mismatch");
  }
  DenseVector clamped(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) clamped[i] = std::max(c[i], 0.0);
  CanonicalGmrf g;
  g.b = b;
  g.Q = add(Q1, diagonal(clamped));
  g.provenance = Provenance::GmrfApprox;
  return g;
}

// ---------------------------------------------------------------------------
// Factor stacking
// ---------------------------------------------------------------------------

/// A = [L1^T; L2^T], the 2n-by-n matrix with A^T A = Q1 + Q2.
inline SparseMatrix stack_factor(const LowerFactor& L1, const LowerFactor& L2) {
  if (L1.dim() != L2.dim()) throw dim_error("stack_factor: dimension mismatch");
  return vstack(transpose(L1.matrix), transpose(L2.matrix));
}

/// Generalization to a k-by-n observation matrix: A = [L1^T; Leps^T Aobs],
/// an (n+k)-by-n matrix with the same A^T A = Q1 + Aobs^T Qeps Aobs identity.
inline SparseMatrix stack_factor_obs(const LowerFactor& L1,
                                     const SparseMatrix& Aobs,
                                     const LowerFactor& Leps) {
  if (Aobs.ncols != L1.dim() || Leps.dim() != Aobs.nrows) {
    throw dim_error("stack_factor_obs: dimension mismatch");
  }
  return vstack(transpose(L1.matrix), matmul(transpose(Leps.matrix), Aobs));
}

/// Fold a nonzero prior mean into the canonical vector: the conditioned
/// field keeps its precision and shifts b to Q mu + b.
inline DenseVector shift_for_mean(const SparseMatrix& Q, const DenseVector& mu,
                                  const DenseVector& b) {
  if (static_cast<index_t>(mu.size()) != Q.nrows || mu.size() != b.size()) {
    throw dim_error("shift_for_mean: length mismatch");
  }
  DenseVector out = matvec(Q, mu);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

/// Log posterior of the hyperparameters up to an additive constant:
/// log_prior + log|Q1|/2 - log|Qc|/2 + mu_c^T Qc mu_c / 2.
inline double log_posterior_theta(double logdet_q1, double logdet_qc,
                                  const DenseVector& mu_c,
                                  const SparseMatrix& Qc, double log_prior) {
  if (static_cast<index_t>(mu_c.size()) != Qc.nrows) {
    throw dim_error("log_posterior_theta: dimension mismatch");
  }
  const DenseVector qmu = matvec(Qc, mu_c);
  double quad = 0.0;
  for (std::size_t i = 0; i < mu_c.size(); ++i) quad += mu_c[i] * qmu[i];
  return log_prior + 0.5 * logdet_q1 - 0.5 * logdet_qc + 0.5 * quad;
}

}  // namespace ctigo
