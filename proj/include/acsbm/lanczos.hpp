#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "acsbm/linalg.hpp"
#include "acsbm/rng.hpp"

namespace acsbm {

struct LanczosOptions {
  Index max_iterations = 5000;  // matrix-vector products
  double tolerance = 1e-8;      // residual norm relative to the largest |Ritz value|
  std::uint64_t seed = 0x51ed5eedULL;
  Index subspace = 0;           // 0 picks max(2*nev + 20, 50)
};

struct LanczosInfo {
  Index iterations = 0;
  Index restarts = 0;
  double max_residual = 0.0;
  bool converged = false;
};

/// The `nev` eigenpairs of largest magnitude of a symmetric operator, by
/// thick-restart Lanczos with full reorthogonalisation. `op` needs rows()
/// and `op * vector`. Values are returned in descending signed order.
template <typename Scalar, typename Operator>
SymmetricEigen<Scalar> largest_magnitude_eigs(const Operator& op, Index nev,
                                              const LanczosOptions& opts = {},
                                              LanczosInfo* info = nullptr) {
  const Index n = op.rows();
  if (nev < 1 || nev > n) {
    throw DimensionError("largest_magnitude_eigs: nev " + std::to_string(nev) +
                         " outside [1, " + std::to_string(n) + "]");
  }
  Index m = opts.subspace > 0 ? opts.subspace : std::max<Index>(2 * nev + 20, 50);
  m = std::max(m, nev + 2);
  LanczosInfo local;
  if (m >= n) {
    const Matrix<Scalar> dense = Matrix<Scalar>(op);
    const auto full = sym_eig(dense);
    const auto keep = largest_magnitude<Scalar>(full.values, nev);
    SymmetricEigen<Scalar> out;
    out.values.resize(nev);
    out.vectors.resize(n, nev);
    for (Index j = 0; j < nev; ++j) {
      out.values(j) = full.values(keep[static_cast<std::size_t>(j)]);
      out.vectors.col(j) = full.vectors.col(keep[static_cast<std::size_t>(j)]);
    }
    local.converged = true;
    if (info) *info = local;
    return out;
  }
  const Index keep_count = nev + (m - nev) / 2;

  CounterRng rng(opts.seed);
  auto random_unit = [&](Index cols_in_basis, const Matrix<Scalar>& basis) {
    Vector<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v(i) = Scalar(rng.uniform() - 0.5);
    for (int pass = 0; pass < 2; ++pass) {
      if (cols_in_basis > 0) {
        v -= basis.leftCols(cols_in_basis) * (basis.leftCols(cols_in_basis).transpose() * v);
      }
    }
    return Vector<Scalar>(v / v.norm());
  };

  Matrix<Scalar> basis(n, m + 1);
  Matrix<Scalar> proj = Matrix<Scalar>::Zero(m, m);
  basis.col(0) = random_unit(0, basis);
  Index start = 0;
  Scalar coupling = 0;
  Vector<Scalar> w(n);

  for (;;) {
    for (Index j = start; j < m; ++j) {
      w.noalias() = op * basis.col(j);
      ++local.iterations;
      // Two passes of classical Gram-Schmidt keep the basis orthogonal to
      // working precision.
      Vector<Scalar> h = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * h;
      const Vector<Scalar> h2 = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * h2;
      h += h2;
      proj.col(j).head(j + 1) = h;
      proj.row(j).head(j + 1) = h.transpose();
      coupling = w.norm();
      const Scalar scale = std::max<Scalar>(proj.col(j).head(j + 1).cwiseAbs().maxCoeff(), Scalar(1e-300));
      if (coupling <= Scalar(1e-13) * scale) {
        // Invariant subspace: continue from a fresh orthogonal direction.
        coupling = 0;
        basis.col(j + 1) = random_unit(j + 1, basis);
      } else {
        basis.col(j + 1) = w / coupling;
      }
      if (j + 1 < m) {
        proj(j + 1, j) = coupling;
        proj(j, j + 1) = coupling;
      }
    }

    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> ritz(proj);
    const Vector<Scalar>& theta = ritz.eigenvalues();
    const Matrix<Scalar>& y = ritz.eigenvectors();
    std::vector<Index> ranked(static_cast<std::size_t>(m));
    std::iota(ranked.begin(), ranked.end(), Index(0));
    std::stable_sort(ranked.begin(), ranked.end(), [&](Index a, Index b) {
      return std::abs(theta(a)) > std::abs(theta(b));
    });
    const Scalar top = std::max<Scalar>(std::abs(theta(ranked.front())), Scalar(1e-300));
    Scalar worst = 0;
    for (Index k = 0; k < nev; ++k) {
      const Index i = ranked[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(coupling * y(m - 1, i)));
    }
    local.max_residual = static_cast<double>(worst / top);
    local.converged = local.max_residual <= opts.tolerance;

    if (local.converged || local.iterations >= opts.max_iterations) {
      std::vector<Index> wanted(ranked.begin(), ranked.begin() + nev);
      std::stable_sort(wanted.begin(), wanted.end(),
                       [&](Index a, Index b) { return theta(a) > theta(b); });
      SymmetricEigen<Scalar> out;
      out.values.resize(nev);
      Matrix<Scalar> coeffs(m, nev);
      for (Index k = 0; k < nev; ++k) {
        out.values(k) = theta(wanted[static_cast<std::size_t>(k)]);
        coeffs.col(k) = y.col(wanted[static_cast<std::size_t>(k)]);
      }
      out.vectors = basis.leftCols(m) * coeffs;
      for (Index k = 0; k < nev; ++k) out.vectors.col(k).normalize();
      detail::normalize_signs(out.vectors);
      if (info) *info = local;
      return out;
    }

    // Thick restart: keep the dominant Ritz vectors plus the residual
    // direction; the projected matrix becomes an arrowhead.
    Matrix<Scalar> coeffs(m, keep_count);
    for (Index k = 0; k < keep_count; ++k) coeffs.col(k) = y.col(ranked[static_cast<std::size_t>(k)]);
    const Vector<Scalar> residual_dir = basis.col(m);
    basis.leftCols(keep_count) = basis.leftCols(m) * coeffs;
    basis.col(keep_count) = residual_dir;
    proj.setZero();
    for (Index k = 0; k < keep_count; ++k) {
      const Index i = ranked[static_cast<std::size_t>(k)];
      proj(k, k) = theta(i);
      proj(keep_count, k) = coupling * y(m - 1, i);
      proj(k, keep_count) = proj(keep_count, k);
    }
    start = keep_count;
    ++local.restarts;
  }
}

enum class EigenSolverChoice { automatic, dense, lanczos };

inline constexpr Index kDenseEigenLimit = 512;

/// Truncated embedding of a sparse symmetric matrix. `automatic` uses the
/// dense solver up to kDenseEigenLimit rows and Lanczos above.
template <typename Scalar>
SpectralEmbedding<Scalar> truncated_embedding(const Eigen::SparseMatrix<Scalar>& y, Index d,
                                              EigenSolverChoice choice = EigenSolverChoice::automatic,
                                              const LanczosOptions& opts = {},
                                              LanczosInfo* info = nullptr) {
  if (d < 1 || d > y.rows()) {
    throw DimensionError("truncated_embedding: dimension " + std::to_string(d) +
                         " outside [1, " + std::to_string(y.rows()) + "]");
  }
  if (y.rows() != y.cols()) throw DimensionError("truncated_embedding: expected a square matrix");
  const bool dense = choice == EigenSolverChoice::dense ||
                     (choice == EigenSolverChoice::automatic && y.rows() <= kDenseEigenLimit);
  if (dense) {
    if (info) *info = LanczosInfo{0, 0, 0.0, true};
    return truncated_embedding(Matrix<Scalar>(y), d);
  }
  return embedding_from_pairs(largest_magnitude_eigs<Scalar>(y, d, opts, info));
}

}  // namespace acsbm
