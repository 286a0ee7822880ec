#include <cmath>
#include <stdexcept>

#include "phsvds/baselines.hpp"
#include "phsvds/dense.hpp"

namespace phsvds {

Matrix LbdResult::bidiagonal() const {
  const Index k = alpha.size();
  Matrix b = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    b(i, i) = alpha(i);
    if (i + 1 < k) b(i, i + 1) = beta(i);
  }
  return b;
}

LbdResult lbd_unrestarted(const SparseMatrix& a, const Vector& p1, int steps, bool smallest,
                          MatvecCounter* counter,
                          const std::function<bool(const RitzTrace&)>& stop) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (p1.size() != n) throw std::invalid_argument("lbd_unrestarted: wrong seed length");
  const double n0 = p1.norm();
  if (!(n0 > 0.0)) throw std::invalid_argument("lbd_unrestarted: zero seed");
  steps = static_cast<int>(std::min<Index>(steps, std::min(m, n)));
  LbdResult out;
  out.p.resize(n, 0);
  out.q.resize(m, 0);
  Vector pk = p1 / n0;
  Vector qk = spmv(a, pk);
  double norm_est = 0.0;
  for (int k = 0; k < steps; ++k) {
    out.p.conservativeResize(Eigen::NoChange, k + 1);
    out.p.col(k) = pk;
    if (k > 0) qk -= out.beta(k - 1) * out.q.col(k - 1);
    for (int pass = 0; pass < 2; ++pass) qk -= out.q * (out.q.transpose() * qk);
    const double alpha = qk.norm();
    out.alpha.conservativeResize(k + 1);
    out.alpha(k) = alpha;
    if (!(alpha > 0.0)) {
      out.breakdown = true;
      out.p.conservativeResize(Eigen::NoChange, k);
      out.alpha.conservativeResize(k);
      break;
    }
    qk /= alpha;
    out.q.conservativeResize(Eigen::NoChange, k + 1);
    out.q.col(k) = qk;

    Vector r = spmv_t(a, qk) - alpha * pk;
    if (counter) counter->products += 2;
    for (int pass = 0; pass < 2; ++pass) r -= out.p * (out.p.transpose() * r);
    const double beta = r.norm();
    out.beta.conservativeResize(k + 1);
    out.beta(k) = beta;
    out.r = r;

    // Singular values of B_k as the nonnegative eigenvalues of its
    // Golub-Kahan tridiagonal form on the ordering (y_1, x_1, ..., y_k, x_k).
    const Index kk = k + 1;
    Vector gk_off(2 * kk - 1);
    for (Index i = 0; i < kk; ++i) {
      gk_off(2 * i) = out.alpha(i);
      if (i + 1 < kk) gk_off(2 * i + 1) = out.beta(i);
    }
    const Vector gk_diag = Vector::Zero(2 * kk);
    const Vector theta = tridiagonal_eigenvalues(gk_diag, gk_off);
    const Index pick = smallest ? kk : 2 * kk - 1;
    const double sigma = std::max(theta(pick), 0.0);
    norm_est = std::max(norm_est, theta(2 * kk - 1));
    const Vector z = tridiagonal_eigenvector(gk_diag, gk_off, sigma);
    RitzTrace tr{k + 1, sigma, beta * std::sqrt(2.0) * std::abs(z(2 * kk - 1))};
    out.trace.push_back(tr);
    if (!(beta > 1e-14 * norm_est)) {
      out.breakdown = true;
      break;
    }
    if (stop && stop(tr)) break;
    pk = r / beta;
    qk = spmv(a, pk);
  }
  if (out.alpha.size() > 0) {
    const auto svd = dense_svd(out.bidiagonal());
    out.sigma = svd.sigma;
    out.u = out.q * svd.u;
    out.v = out.p * svd.v;
  }
  return out;
}

}  // namespace phsvds
