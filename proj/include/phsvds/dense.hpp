#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "phsvds/types.hpp"

namespace phsvds {

template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;   // ascending
  MatrixX<Scalar> vectors;  // columns match values
};

template <typename Scalar>
struct SingularValues {
  MatrixX<Scalar> u;
  VectorX<Scalar> sigma;  // ascending
  MatrixX<Scalar> v;
};

template <typename Scalar>
struct QrFactors {
  MatrixX<Scalar> q;  // orthonormal columns
  MatrixX<Scalar> r;  // upper triangular
};

// Eigendecomposition of a small symmetric matrix. Only the lower triangle is
// read after an explicit symmetry check.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> dense_sym_eig(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  if (h.rows() != h.cols()) throw std::invalid_argument("dense_sym_eig: matrix must be square");
  SymmetricEigen<Scalar> out;
  if (h.rows() == 0) return out;
  const MatrixX<Scalar> sym = (h + h.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense_sym_eig: no convergence");
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

// Thin SVD with singular values in ascending order. For an m x n input the
// factors are m x p, p, n x p with p = min(m, n).
template <typename Derived>
SingularValues<typename Derived::Scalar> dense_svd(const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  SingularValues<Scalar> out;
  const Index p = std::min(r.rows(), r.cols());
  if (p == 0) {
    out.u.resize(r.rows(), 0);
    out.v.resize(r.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(r.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.sigma = svd.singularValues().reverse();
  out.u = svd.matrixU().rowwise().reverse();
  out.v = svd.matrixV().rowwise().reverse();
  return out;
}

namespace detail {

// Modified Gram-Schmidt (two to four passes) of w against the columns of q. Returns the
// projection coefficients; w is overwritten with the orthogonal remainder.
template <typename Scalar>
VectorX<Scalar> project_out(const MatrixX<Scalar>& q, Index ncols, VectorX<Scalar>& w) {
  VectorX<Scalar> coeffs = VectorX<Scalar>::Zero(ncols);
  Scalar before = w.norm();
  for (int pass = 0; pass < 4; ++pass) {
    for (Index i = 0; i < ncols; ++i) {
      const Scalar c = q.col(i).dot(w);
      w -= c * q.col(i);
      coeffs(i) += c;
    }
    const Scalar after = w.norm();
    if (pass >= 1 && !(after < before * Scalar(0.7071067811865476))) break;
    before = after;
  }
  return coeffs;
}

// A unit vector orthogonal to the first ncols columns of q, drawn from the
// canonical basis.
template <typename Scalar>
VectorX<Scalar> orthogonal_completion(const MatrixX<Scalar>& q, Index ncols) {
  const Index n = q.rows();
  for (Index k = 0; k < n; ++k) {
    VectorX<Scalar> e = VectorX<Scalar>::Zero(n);
    e((k * 7919) % n) = Scalar(1);  // spread the search over rows
    project_out(q, ncols, e);
    const Scalar norm = e.norm();
    if (norm > Scalar(0.5)) return e / norm;
  }
  throw std::runtime_error("orthogonal_completion: basis already spans the space");
}

}  // namespace detail

template <typename Scalar>
bool rank_deficient_remainder(Scalar remainder, Scalar original, Index n) {
  (void)n;
  return !(remainder > std::numeric_limits<Scalar>::epsilon() * original);
}

// Thin QR by two-pass Gram-Schmidt. Rank-deficient columns get a zero-size
// diagonal in R and an arbitrary orthonormal completion in Q, so Q R
// reproduces the input in every case.
template <typename Derived>
QrFactors<typename Derived::Scalar> qr_factor(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const Index m = w.rows();
  const Index n = w.cols();
  if (n > m) throw std::invalid_argument("qr_factor: more columns than rows");
  QrFactors<Scalar> out{MatrixX<Scalar>::Zero(m, n), MatrixX<Scalar>::Zero(n, n)};
  for (Index j = 0; j < n; ++j) {
    VectorX<Scalar> col = w.col(j);
    const Scalar original = col.norm();
    out.r.col(j).head(j) = detail::project_out(out.q, j, col);
    const Scalar rem = col.norm();
    if (rank_deficient_remainder(rem, original, m)) {
      out.q.col(j) = detail::orthogonal_completion(out.q, j);
      out.r(j, j) = out.q.col(j).dot(col);
    } else {
      out.q.col(j) = col / rem;
      out.r(j, j) = rem;
    }
  }
  return out;
}

// Extends (q, r) by one column so that q' r' = [q r | w]. Returns false and
// leaves the factors untouched when w lies numerically in span(q).
template <typename Scalar>
bool qr_append_column(MatrixX<Scalar>& q, MatrixX<Scalar>& r, const VectorX<Scalar>& w) {
  if (w.size() != q.rows()) throw std::invalid_argument("qr_append_column: dimension mismatch");
  const Index j = q.cols();
  VectorX<Scalar> rem = w;
  const VectorX<Scalar> coeffs = detail::project_out(q, j, rem);
  const Scalar norm = rem.norm();
  if (rank_deficient_remainder(norm, w.norm(), j + 1)) return false;
  q.conservativeResize(Eigen::NoChange, j + 1);
  q.col(j) = rem / norm;
  r.conservativeResize(j + 1, j + 1);
  r.row(j).setZero();
  r.col(j).head(j) = coeffs;
  r(j, j) = norm;
  return true;
}

// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
// diagonal and off-diagonal.
Vector tridiagonal_eigenvalues(const Vector& diag, const Vector& off);

// Unit eigenvector of the same matrix for a computed eigenvalue theta, by
// inverse iteration.
Vector tridiagonal_eigenvector(const Vector& diag, const Vector& off, double theta);

// Orthonormal basis of the orthogonal complement of the columns of y inside
// R^n (y is n x p with orthonormal columns).
Matrix orthonormal_complement(const Matrix& y);

// Orthonormalizes columns in place, dropping columns that are numerically
// dependent. Returns the number of columns kept.
Index orthonormalize_columns(Matrix& c, double drop_tol = 1e-10);

}  // namespace phsvds
