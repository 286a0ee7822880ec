#include <cmath>
#include <stdexcept>
#include <tuple>

#include "phsvds/baselines.hpp"
#include "phsvds/davidson.hpp"
#include "phsvds/operators.hpp"

namespace phsvds {

namespace {

void mark_tol(MethodTrace& m, double tol) {
  for (const auto& t : m.trace) {
    if (t.residual <= tol) {
      m.steps_to_tol = t.step;
      return;
    }
  }
}

// Singular value and triplet residual of x = [v; u] with both halves
// normalized, so a mix of the +sigma and -sigma eigenvectors still scores
// the triplet it carries.
std::pair<double, double> split_triplet(const SparseMatrix& a, const Vector& x) {
  const Index n = a.cols();
  const Index m = a.rows();
  const double nv = x.head(n).norm();
  const double nu = x.tail(m).norm();
  if (!(nv > 1e-8) || !(nu > 1e-8)) return {0.0, INFINITY};
  const Vector v = x.head(n) / nv;
  Vector u = x.tail(m) / nu;
  const Vector av = spmv(a, v);
  double sigma = u.dot(av);
  if (sigma < 0.0) {
    u = -u;
    sigma = -sigma;
  }
  const Vector atu = spmv_t(a, u);
  return {sigma, std::hypot((av - sigma * u).norm(), (atu - sigma * v).norm())};
}

MethodTrace run_gdk(const SparseMatrix& a, const LinearOperator& op, bool on_b,
                    std::vector<Vector> guesses, bool smallest, double tol, double norm_a,
                    int steps) {
  MethodTrace m{on_b ? "gdk-B" : "gdk-C", {}, -1};
  EigConfig cfg;
  cfg.max_iterations = steps;
  cfg.which = on_b ? (smallest ? Which::closest_to_shifts : Which::largest_algebraic)
                   : (smallest ? Which::smallest_algebraic : Which::largest_algebraic);
  if (on_b && smallest) cfg.shifts = {0.0};
  cfg.extraction = on_b && smallest ? Extraction::refined : Extraction::rayleigh_ritz;
  cfg.stage = on_b ? Stage::B : Stage::C;
  int step = 0;
  cfg.converged = [&](const ConvergenceQuery& q) {
    double sigma, res;
    if (on_b) {
      std::tie(sigma, res) = split_triplet(a, q.vector);
      res /= norm_a;
    } else {
      sigma = std::sqrt(std::max(q.value, 0.0));
      res = q.residual_norm / (std::max(sigma, 1e-300) * norm_a);
    }
    m.trace.push_back({++step, sigma, res});
    return res <= tol;
  };
  gd_plus_k_solve(op, nullptr, cfg, guesses, 1);
  return m;
}

}  // namespace

std::vector<MethodTrace> compare_methods(std::shared_ptr<const SparseMatrix> a, int steps,
                                         bool smallest, bool restarted, double tol,
                                         double norm_a) {
  if (!a) throw std::invalid_argument("compare_methods: null matrix");
  if (steps < 1) throw std::invalid_argument("compare_methods: steps must be positive");
  if (!(norm_a > 0.0)) throw std::invalid_argument("compare_methods: norm must be positive");
  if (a->rows() < a->cols()) a = std::make_shared<SparseMatrix>(a->transpose());
  const Index m = a->rows();
  const Index n = a->cols();
  const Vector v1 = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  Vector x1(n + m);
  x1.head(n) = v1;
  x1.tail(m) = spmv(*a, v1);
  x1.tail(m) /= std::max(x1.tail(m).norm(), 1e-300);
  x1 /= std::sqrt(2.0);

  const LinearOperator c = normal_operator(a);
  const LinearOperator b = augmented_operator(a);
  std::vector<MethodTrace> out;
  if (!restarted) {
    auto lc = lanczos_unrestarted(c, v1, steps,
                                  smallest ? LanczosExtraction::smallest : LanczosExtraction::largest);
    MethodTrace mc{"lanczos-C", {}, -1};
    for (const auto& t : lc.trace) {
      const double sigma = std::sqrt(std::max(t.value, 0.0));
      mc.trace.push_back({t.step, sigma, t.residual / (std::max(sigma, 1e-300) * norm_a)});
    }
    Vector b1 = Vector::Zero(n + m);
    b1.head(n) = v1;
    auto lb = lanczos_unrestarted(b, b1, steps,
                                  smallest ? LanczosExtraction::smallest_positive
                                           : LanczosExtraction::largest);
    MethodTrace mb{"lanczos-B", {}, -1};
    for (const auto& t : lb.trace)
      mb.trace.push_back({t.step, std::abs(t.value), std::sqrt(2.0) * t.residual / norm_a});
    auto lbd = lbd_unrestarted(*a, v1, steps, smallest);
    MethodTrace ml{"lbd", {}, -1};
    for (const auto& t : lbd.trace) ml.trace.push_back({t.step, t.value, t.residual / norm_a});
    out = {std::move(mc), std::move(mb), std::move(ml)};
  } else {
    out.push_back(run_gdk(*a, c, false, {v1}, smallest, tol, norm_a, steps));
    out.push_back(run_gdk(*a, b, true, {x1}, smallest, tol, norm_a, steps));
  }
  for (auto& mt : out) mark_tol(mt, tol);
  return out;
}

}  // namespace phsvds
