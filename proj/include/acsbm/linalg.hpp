#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "acsbm/errors.hpp"

namespace acsbm {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;

/// Eigenpairs of a real symmetric matrix, values sorted by descending
/// signed value. For a partial decomposition `vectors` has one column per
/// stored value.
template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> values;
  Matrix<Scalar> vectors;

  Matrix<Scalar> reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& a, const char* what,
                       typename Derived::Scalar rel_tol = 1e-12) {
  require_square(a, what);
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max<Scalar>(Scalar(1), a.cwiseAbs().maxCoeff());
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > rel_tol * scale) {
    throw DimensionError(std::string(what) + ": matrix is not symmetric");
  }
}

// Flip each column so that its first non-negligible coordinate is positive.
template <typename Scalar>
void normalize_signs(Matrix<Scalar>& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    auto col = vectors.col(j);
    const Scalar cutoff = Scalar(1e-10) * col.cwiseAbs().maxCoeff();
    for (Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cutoff) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
  }
}

// Reorders eigenpairs by descending signed value.
template <typename Scalar>
SymmetricEigen<Scalar> sorted_descending(const Vector<Scalar>& values,
                                         const Matrix<Scalar>& vectors) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return values(a) > values(b); });
  SymmetricEigen<Scalar> out;
  out.values.resize(values.size());
  out.vectors.resize(vectors.rows(), values.size());
  for (Index j = 0; j < values.size(); ++j) {
    out.values(j) = values(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }
  normalize_signs(out.vectors);
  return out;
}

}  // namespace detail

/// Full eigendecomposition of a symmetric matrix.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_symmetric(a, "sym_eig");
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eig: eigensolver did not converge");
  }
  return detail::sorted_descending<Scalar>(solver.eigenvalues(), solver.eigenvectors());
}

/// Indices of the `count` entries of largest magnitude, returned in
/// descending signed order of the underlying values.
template <typename Scalar>
std::vector<Index> largest_magnitude(const Vector<Scalar>& values, Index count) {
  std::vector<Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  idx.resize(static_cast<std::size_t>(std::min<Index>(count, values.size())));
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return values(a) > values(b); });
  return idx;
}

/// Adjacency-style spectral embedding X = U |Lambda|^{1/2}. `values` keeps
/// the signed eigenvalues so the caller can read off the signature.
template <typename Scalar>
struct SpectralEmbedding {
  Matrix<Scalar> X;
  Vector<Scalar> values;

  Index positive() const { return (values.array() > Scalar(0)).count(); }
  Index negative() const { return (values.array() < Scalar(0)).count(); }
};

// Builds U|Lambda|^{1/2} from eigenpairs already sorted by signed value.
template <typename Scalar>
SpectralEmbedding<Scalar> embedding_from_pairs(const SymmetricEigen<Scalar>& pairs) {
  SpectralEmbedding<Scalar> out;
  out.values = pairs.values;
  out.X = pairs.vectors * pairs.values.cwiseAbs().cwiseSqrt().asDiagonal();
  return out;
}

/// Truncated embedding of a dense symmetric matrix using the `d`
/// eigenpairs of largest magnitude.
template <typename Derived>
SpectralEmbedding<typename Derived::Scalar> truncated_embedding(
    const Eigen::MatrixBase<Derived>& y, Index d) {
  using Scalar = typename Derived::Scalar;
  if (d < 1 || d > y.rows()) {
    throw DimensionError("truncated_embedding: dimension " + std::to_string(d) +
                         " outside [1, " + std::to_string(y.rows()) + "]");
  }
  const auto full = sym_eig(y);
  const auto keep = largest_magnitude<Scalar>(full.values, d);
  SymmetricEigen<Scalar> pairs;
  pairs.values.resize(d);
  pairs.vectors.resize(y.rows(), d);
  for (Index j = 0; j < d; ++j) {
    pairs.values(j) = full.values(keep[static_cast<std::size_t>(j)]);
    pairs.vectors.col(j) = full.vectors.col(keep[static_cast<std::size_t>(j)]);
  }
  return embedding_from_pairs(pairs);
}

/// Matrix absolute value |A| = sqrt(A^T A) of a symmetric matrix, computed
/// as U |Lambda| U^T.
template <typename Derived>
Matrix<typename Derived::Scalar> matrix_abs(const Eigen::MatrixBase<Derived>& a) {
  const auto eig = sym_eig(a);
  return eig.vectors * eig.values.cwiseAbs().asDiagonal() * eig.vectors.transpose();
}

/// Kronecker product; entry (i*p + s, j*p + t) equals A(i,j) * B(s,t).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
  return Eigen::kroneckerProduct(a.derived().eval(), b.derived().eval()).eval();
}

/// A (+) B = (A kron 11^T) + (11^T kron B). Element-wise exp turns it into a
/// Kronecker product, which is how the subcommunity matrix factorises under
/// the log link.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> boxplus(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_square(a, "boxplus");
  detail::require_square(b, "boxplus");
  const Index p = b.rows();
  const Index m = a.rows();
  Matrix<Scalar> out(m * p, m * p);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      out.block(i * p, j * p, p, p) = b.array() + a(i, j);
    }
  }
  return out;
}

/// I_{pq} = diag(+1 (p times), -1 (q times)).
template <typename Scalar = double>
Matrix<Scalar> signature_matrix(Index p, Index q) {
  Vector<Scalar> diag(p + q);
  diag.head(p).setOnes();
  diag.tail(q).setConstant(Scalar(-1));
  return diag.asDiagonal();
}

}  // namespace acsbm
