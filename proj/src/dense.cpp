#include "phsvds/dense.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phsvds {

Matrix orthonormal_complement(const Matrix& y) {
  const Index n = y.rows();
  const Index p = y.cols();
  Eigen::HouseholderQR<Matrix> qr(y);
  const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  return full.rightCols(n - p);
}

Index orthonormalize_columns(Matrix& c, double drop_tol) {
  Index kept = 0;
  for (Index j = 0; j < c.cols(); ++j) {
    Vector col = c.col(j);
    const double original = col.norm();
    if (original == 0.0) continue;
    detail::project_out(c, kept, col);
    const double norm = col.norm();
    if (norm <= drop_tol * original) continue;
    c.col(kept++) = col / norm;
  }
  c.conservativeResize(Eigen::NoChange, kept);
  return kept;
}

Vector tridiagonal_eigenvalues(const Vector& diag, const Vector& off) {
  const Index k = diag.size();
  if (off.size() != std::max<Index>(k - 1, 0))
    throw std::invalid_argument("tridiagonal_eigenvalues: off-diagonal length");
  if (k == 0) return Vector();
  if (k == 1) return diag;
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("tridiagonal_eigenvalues: no convergence");
  return solver.eigenvalues();
}

Vector tridiagonal_eigenvector(const Vector& diag, const Vector& off, double theta) {
  const Index k = diag.size();
  if (k == 0) return Vector();
  if (k == 1) return Vector::Ones(1);
  const double scale = std::max(diag.cwiseAbs().maxCoeff(), off.cwiseAbs().maxCoeff());
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::max(eps * scale, std::numeric_limits<double>::min());
  // LU of T - theta I with partial pivoting; U has two superdiagonals.
  Vector d = diag.array() - theta;
  Vector u1 = off;
  Vector u2 = Vector::Zero(k);
  Vector l = Vector::Zero(k);
  std::vector<bool> swapped(static_cast<std::size_t>(k), false);
  Vector sub = off;
  for (Index i = 0; i + 1 < k; ++i) {
    if (std::abs(sub(i)) > std::abs(d(i))) {
      swapped[static_cast<std::size_t>(i)] = true;
      // swap rows i and i+1
      const double a0 = d(i), a1 = u1(i), a2 = u2(i);
      d(i) = sub(i);
      u1(i) = d(i + 1);
      u2(i) = i + 1 < k - 1 ? u1(i + 1) : 0.0;
      const double f = a0 / d(i);
      l(i) = f;
      d(i + 1) = a1 - f * u1(i);
      if (i + 1 < k - 1) u1(i + 1) = a2 - f * u2(i);
    } else {
      if (d(i) == 0.0) d(i) = tiny;
      const double f = sub(i) / d(i);
      l(i) = f;
      d(i + 1) -= f * u1(i);
      if (i + 1 < k - 1) u1(i + 1) -= f * u2(i);
    }
  }
  for (Index i = 0; i < k; ++i)
    if (std::abs(d(i)) < tiny) d(i) = d(i) < 0.0 ? -tiny : tiny;
  auto solve = [&](Vector x) {
    for (Index i = 0; i + 1 < k; ++i) {
      if (swapped[static_cast<std::size_t>(i)]) std::swap(x(i), x(i + 1));
      x(i + 1) -= l(i) * x(i);
    }
    for (Index i = k - 1; i >= 0; --i) {
      double s = x(i);
      if (i + 1 < k) s -= u1(i) * x(i + 1);
      if (i + 2 < k) s -= u2(i) * x(i + 2);
      x(i) = s / d(i);
    }
    return x;
  };
  Vector x = Vector::Ones(k);
  for (Index i = 0; i < k; ++i) x(i) += 1e-3 * static_cast<double>((i * 7919) % 101);
  x.normalize();
  for (int it = 0; it < 3; ++it) {
    x = solve(x);
    const double nx = x.norm();
    if (!std::isfinite(nx) || nx == 0.0) throw std::runtime_error("tridiagonal_eigenvector: failed");
    x /= nx;
  }
  return x;
}

}  // namespace phsvds
