#include <cmath>
#include <stdexcept>

#include "phsvds/baselines.hpp"
#include "phsvds/dense.hpp"

namespace phsvds {

namespace {

Index pick_ritz(const Vector& theta, LanczosExtraction e, double shift) {
  const Index k = theta.size();
  switch (e) {
    case LanczosExtraction::smallest:
      return 0;
    case LanczosExtraction::largest:
      return k - 1;
    case LanczosExtraction::closest_to_shift: {
      Index best = 0;
      for (Index i = 1; i < k; ++i)
        if (std::abs(theta(i) - shift) < std::abs(theta(best) - shift)) best = i;
      return best;
    }
    case LanczosExtraction::smallest_positive: {
      const double floor = 1e-14 * theta.cwiseAbs().maxCoeff();
      for (Index i = 0; i < k; ++i)
        if (theta(i) > floor) return i;
      return k - 1;
    }
  }
  return 0;
}

}  // namespace

LanczosResult lanczos_unrestarted(const LinearOperator& op, const Vector& v1, int steps,
                                  LanczosExtraction extraction, double shift,
                                  const std::function<bool(const RitzTrace&)>& stop) {
  if (!op.is_symmetric()) throw std::invalid_argument("lanczos_unrestarted: operator must be symmetric");
  if (v1.size() != op.dim_in()) throw std::invalid_argument("lanczos_unrestarted: wrong seed length");
  const double n0 = v1.norm();
  if (!(n0 > 0.0)) throw std::invalid_argument("lanczos_unrestarted: zero seed");
  steps = static_cast<int>(std::min<Index>(steps, op.dim_in()));
  LanczosResult out;
  out.basis.resize(op.dim_in(), 0);
  out.alpha.resize(0);
  out.beta.resize(0);
  Vector x = v1 / n0;
  for (int j = 0; j < steps; ++j) {
    out.basis.conservativeResize(Eigen::NoChange, j + 1);
    out.basis.col(j) = x;
    Vector w = op.apply(x);
    const double a = x.dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= out.basis * (out.basis.transpose() * w);
    const double b = w.norm();
    out.alpha.conservativeResize(j + 1);
    out.beta.conservativeResize(j + 1);
    out.alpha(j) = a;
    out.beta(j) = b;

    const Vector theta = tridiagonal_eigenvalues(out.alpha, out.beta.head(j));
    const Index pick = pick_ritz(theta, extraction, shift);
    const Vector z = tridiagonal_eigenvector(out.alpha, out.beta.head(j), theta(pick));
    RitzTrace tr{j + 1, theta(pick), std::abs(b * z(j))};
    out.trace.push_back(tr);
    out.ritz_vector = out.basis * z;
    const double scale = std::max(theta.cwiseAbs().maxCoeff(), std::abs(a));
    if (!(b > 1e-14 * std::max(scale, 1e-300))) {
      out.breakdown = true;
      break;
    }
    if (stop && stop(tr)) break;
    x = w / b;
  }
  return out;
}

}  // namespace phsvds
