#include "phsvds/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phsvds {

namespace {

class Projector {
 public:
  Projector(const Matrix& deflation, const Vector& u) : x_(deflation), u_(u) {}

  void apply(Vector& y) const {
    if (x_.cols() > 0) y -= x_ * (x_.transpose() * y);
    y -= u_ * u_.dot(y);
  }
  void apply_locked(Vector& y) const {
    if (x_.cols() > 0) y -= x_ * (x_.transpose() * y);
  }

 private:
  const Matrix& x_;
  const Vector& u_;
};

// K~ = P_X (K - K u u^T K / (u^T K u)) P_X, or P K P if u^T K u is too small.
class ProjectedPreconditioner {
 public:
  ProjectedPreconditioner(const Preconditioner* prec, const Projector& proj, const Vector& u)
      : prec_(prec), proj_(proj) {
    if (!prec_) return;
    ku_ = prec_->apply(u);
    const double uku = u.dot(ku_);
    skew_ = std::abs(uku) > 1e-12 * ku_.norm() * u.norm() && std::isfinite(uku);
    if (skew_) uku_ = uku;
  }

  Vector apply(const Vector& g) const {
    Vector y = g;
    if (!prec_) {
      proj_.apply(y);
      return y;
    }
    if (skew_) {
      proj_.apply_locked(y);
      y = prec_->apply(y);
      y -= ku_ * (ku_.dot(g) / uku_);
      proj_.apply_locked(y);
      // Remove rounding residue along u as well.
      proj_.apply(y);
      return y;
    }
    proj_.apply(y);
    y = prec_->apply(y);
    proj_.apply(y);
    return y;
  }

 private:
  const Preconditioner* prec_;
  const Projector& proj_;
  Vector ku_;
  double uku_ = 1.0;
  bool skew_ = false;
};

}  // namespace

InnerResult jd_correction_solve(const LinearOperator& op, const Preconditioner* prec,
                                const Vector& u, double theta, const Vector& r,
                                const Matrix& deflation, const InnerConfig& cfg) {
  const Index n = u.size();
  InnerResult out;
  out.t = Vector::Zero(n);
  const double rnorm = r.norm();
  if (rnorm == 0.0) {
    out.stop_reason = "zero residual";
    return out;
  }
  Projector proj(deflation, u);
  ProjectedPreconditioner kp(prec, proj, u);

  Vector g = -r;
  proj.apply(g);
  if (cfg.max_inner == 0) {
    out.t = kp.apply(g);
    out.residual_ratio = 1.0;
    out.stop_reason = "preconditioner only";
    return out;
  }
  const int max_inner =
      cfg.max_inner < 0 ? static_cast<int>(std::min<Index>(n, 1000)) : cfg.max_inner;
  const double target =
      std::max(std::pow(0.1, std::max(cfg.outer_iteration, 0)), cfg.min_relative_tol) * rnorm;

  Vector d = kp.apply(g);
  double rho_prev = g.dot(d);
  double tau = g.norm();
  double theta_prev = 0.0;
  Vector delta = Vector::Zero(n);
  Vector wdelta = Vector::Zero(n);
  Vector res = g;
  Vector& sol = out.t;
  double prev_eres = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  out.stop_reason = "max inner iterations";

  for (int it = 1; it <= max_inner; ++it) {
    if (rho_prev == 0.0 || !std::isfinite(rho_prev)) {
      out.stop_reason = "breakdown";
      break;
    }
    Vector w = op.apply(d) - theta * d;
    proj.apply(w);
    const double sigma = d.dot(w);
    if (sigma == 0.0 || !std::isfinite(sigma)) {
      out.stop_reason = "breakdown";
      break;
    }
    const double alpha = rho_prev / sigma;
    g -= alpha * w;
    const double theta_q = g.norm() / tau;
    const double c = 1.0 / std::sqrt(1.0 + theta_q * theta_q);
    tau *= theta_q * c;
    const double gamma = c * c * theta_prev * theta_prev;
    const double eta = alpha * c * c;
    delta = gamma * delta + eta * d;
    wdelta = gamma * wdelta + eta * w;
    sol += delta;
    res -= wdelta;
    theta_prev = theta_q;
    out.iterations = it;

    const double res_norm = res.norm();
    out.residual_ratio = res_norm / rnorm;
    // Residual of the eigenproblem at u + t, estimated from the QMR state.
    const double zeta = r.dot(sol);
    const double a2 = res_norm * res_norm + zeta * zeta;
    const double ab = zeta - res.dot(sol);
    const double b2 = 1.0 + sol.squaredNorm();
    const double eres = std::sqrt(std::max(a2 - ab * ab / b2, 0.0) / b2);
    out.eigen_residual = eres;

    if (res_norm <= target) {
      out.stop_reason = "linear tolerance";
      break;
    }
    // A flat estimate only counts once the linear residual no longer bounds it.
    const bool eigen_limited = res_norm / std::sqrt(b2) < 0.5 * eres;
    if (eigen_limited && eres > cfg.stagnation_ratio * prev_eres) {
      if (++stagnant >= cfg.stagnation_steps) {
        out.stop_reason = "eigenresidual stagnation";
        break;
      }
    } else {
      stagnant = 0;
    }
    prev_eres = eres;
    if (tau == 0.0) {
      out.stop_reason = "linear tolerance";
      break;
    }

    const Vector kg = kp.apply(g);
    const double rho = g.dot(kg);
    const double beta = rho / rho_prev;
    d = kg + beta * d;
    rho_prev = rho;
  }
  proj.apply(sol);
  return out;
}

}  // namespace phsvds
