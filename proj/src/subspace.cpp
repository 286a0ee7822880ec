#include "phsvds/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phsvds {

SubspaceState::SubspaceState(Index dim, bool refined_mode, double shift)
    : v(dim, 0), w(dim, 0), h(0, 0), q(dim, 0), r(0, 0), refined(refined_mode),
      target_shift(shift), deflation(dim, 0) {}

void SubspaceState::append(const Vector& unit, const Vector& image) {
  const Index j = size();
  v.conservativeResize(Eigen::NoChange, j + 1);
  w.conservativeResize(Eigen::NoChange, j + 1);
  v.col(j) = unit;
  w.col(j) = image;
  const Vector hcol = v.transpose() * image;
  h.conservativeResize(j + 1, j + 1);
  h.col(j) = hcol;
  h.row(j) = hcol.transpose();
  if (refined && !qr_full) {
    const Vector col = image - target_shift * unit;
    if (!qr_append_column(q, r, col)) qr_full = true;
  }
}

void SubspaceState::compress(const Matrix& c) {
  v = v * c;
  w = w * c;
  h = v.transpose() * w;
  h = (h + h.transpose()).eval() / 2.0;
  qr_full = true;
}

void SubspaceState::refactor_qr() {
  auto f = qr_factor(w - target_shift * v);
  q = std::move(f.q);
  r = std::move(f.r);
  qr_full = false;
}

void SubspaceState::add_deflation(const Vector& x) {
  Vector y = x;
  // Keep the deflation block orthonormal.
  for (int pass = 0; pass < 2; ++pass) y -= deflation * (deflation.transpose() * y);
  const double n = y.norm();
  if (!(n > 1e-10 * x.norm())) return;
  deflation.conservativeResize(Eigen::NoChange, deflation.cols() + 1);
  deflation.col(deflation.cols() - 1) = y / n;
}

double SubspaceState::orthogonalize(Vector& x) const {
  const double original = x.norm();
  if (original == 0.0) return 0.0;
  double before = original;
  for (int pass = 0; pass < 4; ++pass) {
    if (deflation.cols() > 0) x -= deflation * (deflation.transpose() * x);
    if (v.cols() > 0) x -= v * (v.transpose() * x);
    const double after = x.norm();
    if (after > before / std::sqrt(2.0)) break;
    before = after;
  }
  return x.norm() / original;
}

double SubspaceState::orthogonality_error() const {
  if (size() == 0) return 0.0;
  return (v.transpose() * v - Matrix::Identity(size(), size())).cwiseAbs().maxCoeff();
}

double SubspaceState::projection_error() const {
  if (size() == 0) return 0.0;
  return (h - v.transpose() * w).cwiseAbs().maxCoeff();
}

double SubspaceState::qr_error() const {
  if (size() == 0) return 0.0;
  return (q * r - (w - target_shift * v)).cwiseAbs().maxCoeff();
}

RitzPairs rayleigh_ritz_extract(const SubspaceState& s, Which which, double shift) {
  const auto eig = dense_sym_eig(s.h);
  const Index j = eig.values.size();
  std::vector<Index> order(static_cast<std::size_t>(j));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& th = eig.values;
  switch (which) {
    case Which::smallest_algebraic:
      break;
    case Which::largest_algebraic:
      std::reverse(order.begin(), order.end());
      break;
    case Which::closest_to_shifts:
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double da = std::abs(th(a) - shift);
        const double db = std::abs(th(b) - shift);
        if (da != db) return da < db;
        return th(a) < th(b);
      });
      break;
  }
  RitzPairs out{Vector(j), Matrix(j, j)};
  for (Index i = 0; i < j; ++i) {
    out.values(i) = th(order[i]);
    out.coeffs.col(i) = eig.vectors.col(order[i]);
  }
  return out;
}

RefinedPairs refined_extract(const SubspaceState& s) {
  if (!s.refined) throw std::logic_error("refined_extract: subspace is not in refined mode");
  if (s.qr_full || s.r.cols() != s.size())
    throw std::logic_error("refined_extract: stale QR factors, re-factorization required");
  const auto svd = dense_svd(s.r);
  RefinedPairs out;
  out.coeffs = svd.v;
  out.singular_values = svd.sigma;
  const Vector y = out.coeffs.col(0);
  out.value = y.dot(s.h * y);
  return out;
}

bool lock_and_reintroduce(SubspaceState& s, const LockedPair& pair, const Vector& coeffs,
                          const std::optional<Vector>& next_guess, const LinearOperator& op,
                          std::optional<double> next_shift) {
  s.locked.push_back(pair);
  s.add_deflation(pair.vector);
  if (s.size() > 0) {
    Matrix y = coeffs.normalized();
    s.compress(orthonormal_complement(y));
  }
  if (next_shift) s.target_shift = *next_shift;
  s.qr_full = true;
  if (!next_guess) return true;
  Vector g = *next_guess;
  if (!(s.orthogonalize(g) > 1e-10)) return false;
  g.normalize();
  s.append(g, op.apply(g));
  return true;
}

Vector random_unit_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = dist(rng);
  return x.normalized();
}

}  // namespace phsvds
