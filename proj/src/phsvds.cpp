#include "phsvds/phsvds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phsvds/dynamic.hpp"

namespace phsvds {

std::string to_string(SvdTarget t) { return t == SvdTarget::smallest ? "smallest" : "largest"; }
std::string to_string(Stage2Method m) { return m == Stage2Method::gdk ? "gdk" : "jdqmr"; }
std::string to_string(PrecondKind p) {
  switch (p) {
    case PrecondKind::none: return "none";
    case PrecondKind::jacobi: return "jacobi";
    case PrecondKind::ilu0: return "ilu0";
    case PrecondKind::shift_invert_qr: return "shift-invert-qr";
    case PrecondKind::shift_invert_lu: return "shift-invert-lu";
  }
  return "unknown";
}
std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_matvecs: return "max_matvecs";
    case SolveStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

bool SvdResult::fully_converged() const {
  if (static_cast<int>(triplets.size()) < num_requested) return false;
  return std::all_of(triplets.begin(), triplets.end(),
                     [](const auto& t) { return t.flag != TripletFlag::unconverged; });
}

namespace {

Vector swap_halves(const Vector& x, Index first) {
  Vector y(x.size());
  const Index second = x.size() - first;
  y.head(second) = x.tail(second);
  y.tail(first) = x.head(first);
  return y;
}

bool better(SvdTarget which, double a, double b) { return which == SvdTarget::smallest ? a < b : a > b; }

}  // namespace

SvdProblem make_problem(std::shared_ptr<const SparseMatrix> a, const SvdConfig& cfg) {
  if (!a) throw std::invalid_argument("phsvds: null matrix");
  if (a->rows() == 0 || a->cols() == 0) throw std::invalid_argument("phsvds: empty matrix");
  if (cfg.k < 1) throw std::invalid_argument("phsvds: k must be >= 1");
  if (cfg.k > std::min(a->rows(), a->cols()))
    throw std::invalid_argument("phsvds: k exceeds min(m, n)");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("phsvds: tol must be positive");
  SvdProblem p;
  p.counter = std::make_shared<MatvecCounter>();
  p.transposed = a->rows() < a->cols();
  p.a = p.transposed ? std::make_shared<const SparseMatrix>(a->transpose()) : a;
  p.c = normal_operator(p.a, p.counter);
  p.b = augmented_operator(p.a, p.counter);
  p.precond_c = cfg.precond_c;
  if (cfg.precond_b && p.transposed) {
    // Input ordering is [v; u] with v of length a->cols(); the problem
    // ordering swaps the roles of the two halves.
    auto orig = cfg.precond_b;
    const Index n_in = a->cols();
    const Index dim = orig->dim();
    Preconditioner swapped{
        LinearOperator(dim, dim,
                       [orig, n_in](const Vector& x) {
                         const Vector xi = swap_halves(x, x.size() - n_in);
                         return swap_halves(orig->apply(xi), n_in);
                       },
                       true),
        PrecondTarget::for_B, orig->description};
    p.precond_b = std::make_shared<const Preconditioner>(std::move(swapped));
  } else {
    p.precond_b = cfg.precond_b;
  }
  return p;
}

double estimate_norm(const SvdProblem& p, int steps) {
  const Index n = p.cols();
  steps = static_cast<int>(std::min<Index>(steps, n));
  Matrix q(n, steps);
  Vector alpha(steps), beta(steps);
  Vector x = Vector::Ones(n).normalized();
  int j = 0;
  for (; j < steps; ++j) {
    q.col(j) = x;
    Vector w = p.c.apply(x);
    alpha(j) = x.dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    beta(j) = w.norm();
    if (!(beta(j) > 1e-14 * std::abs(alpha(j)))) {
      ++j;
      break;
    }
    x = w / beta(j);
  }
  Matrix t = Matrix::Zero(j, j);
  for (int i = 0; i < j; ++i) {
    t(i, i) = alpha(i);
    if (i + 1 < j) t(i, i + 1) = t(i + 1, i) = beta(i);
  }
  const auto eig = dense_sym_eig(t);
  return std::sqrt(std::max(eig.values(j - 1), 0.0));
}

std::vector<Vector> initial_guesses(const SvdProblem& p, const SvdConfig& cfg) {
  const Index n = p.cols();
  std::vector<Vector> out;
  if (!cfg.initial_guesses.empty()) {
    for (const auto& g : cfg.initial_guesses) {
      if (!p.transposed) {
        if (g.size() != n) throw std::invalid_argument("phsvds: initial guess has wrong length");
        out.push_back(g.normalized());
      } else {
        // Right vectors of A map to right vectors of A^T through A v.
        if (g.size() != p.rows()) throw std::invalid_argument("phsvds: initial guess has wrong length");
        Vector u = spmv(*p.a, g);
        p.counter->products += 1;
        if (u.norm() > 0.0) out.push_back(u.normalized());
      }
    }
    return out;
  }
  if (cfg.random_guess) {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    out.push_back(random_unit_vector(n, rng));
  } else {
    out.push_back(Vector::Ones(n).normalized());
  }
  return out;
}

double normal_tolerance(double tol, double sigma, double sigma_max) {
  return std::max(tol * sigma / std::max(sigma_max, 1e-300), kMachineEpsilon);
}

bool stage1_reaches_tolerance(double tol, double sigma, double sigma_max) {
  return tol * sigma / std::max(sigma_max, 1e-300) >= kMachineEpsilon;
}

Stage1Result stage1_normal(const SvdProblem& p, const SvdConfig& cfg,
                           const std::vector<Vector>& guesses, long max_matvecs,
                           long max_iterations, const std::vector<LockedPair>& preset) {
  const int wanted = cfg.k - static_cast<int>(preset.size());
  EigConfig ec;
  ec.max_basis = cfg.max_basis;
  ec.min_restart = cfg.min_restart;
  ec.k_prev = cfg.k_prev;
  ec.block_size = std::max(1, std::min(cfg.block_size, std::max(wanted, 1)));
  ec.max_matvecs = max_matvecs;
  ec.max_iterations = max_iterations;
  ec.which = cfg.which == SvdTarget::smallest ? Which::smallest_algebraic : Which::largest_algebraic;
  ec.correction = CorrectionMethod::davidson;
  ec.seed = cfg.seed;
  ec.stage = Stage::C;
  ec.preset_locked = preset;
  const double tol = cfg.tol;
  ec.converged = [tol](const ConvergenceQuery& q) {
    const double cnorm = std::max(q.op_norm_estimate, 1e-300);
    const double sigma = std::sqrt(std::max(q.value, 0.0));
    if (stage1_reaches_tolerance(tol, sigma, std::sqrt(cnorm)))
      return q.residual_norm < normal_tolerance(tol, sigma, std::sqrt(cnorm)) * cnorm;
    // Targets whose request lies below working precision in C stop at the
    // floor, or once the residual has clearly stopped improving near it.
    if (q.residual_norm < kMachineEpsilon * cnorm) return true;
    return q.stalled_iterations >= 20 && q.residual_norm < 11.0 * kMachineEpsilon * cnorm;
  };
  ec.history_metric = [](double value, double res) {
    return value > 0.0 ? res / std::sqrt(value) : res;
  };
  if (cfg.observer) ec.observer = [&cfg](const IterationSnapshot& s) { cfg.observer(Stage::C, s); };

  Stage1Result out;
  if (wanted <= 0) return out;
  out.eig = gd_plus_k_solve(p.c, p.precond_c.get(), ec, guesses, wanted);
  out.norm_estimate = std::sqrt(std::max(out.eig.op_norm_estimate, 0.0));
  for (const auto& pr : out.eig.pairs)
    out.fully_converged.push_back(
        stage1_reaches_tolerance(tol, std::sqrt(std::max(pr.value, 0.0)), out.norm_estimate));
  return out;
}

std::vector<SingularTriplet> post_rayleigh_ritz(const SvdProblem& p, const Matrix& v_in,
                                                double norm_estimate, double tol) {
  std::vector<SingularTriplet> out;
  if (v_in.cols() == 0) return out;
  const auto f = qr_factor(v_in);
  const Matrix& v = f.q;
  const Index k = v.cols();
  Matrix av(p.rows(), k);
  for (Index j = 0; j < k; ++j) av.col(j) = spmv(*p.a, v.col(j));
  const auto svd = dense_svd(av);
  std::mt19937_64 rng(0x5eedULL);
  const double zero_level = std::max(norm_estimate, svd.sigma.size() ? svd.sigma(k - 1) : 0.0) *
                            kMachineEpsilon;
  Matrix used_u(p.rows(), 0);
  for (Index i = 0; i < k; ++i) {
    SingularTriplet t;
    t.sigma = svd.sigma(i);
    t.v = v * svd.v.col(i);
    t.v.normalize();
    if (t.sigma > zero_level) {
      t.u = svd.u.col(i).normalized();
    } else {
      Vector u = random_unit_vector(p.rows(), rng);
      for (int pass = 0; pass < 2; ++pass) u -= used_u * (used_u.transpose() * u);
      t.u = u.normalized();
      t.flag = TripletFlag::zero_singular_value;
    }
    used_u.conservativeResize(Eigen::NoChange, used_u.cols() + 1);
    used_u.col(used_u.cols() - 1) = t.u;
    const Vector a_v = spmv(*p.a, t.v);
    const Vector at_u = spmv_t(*p.a, t.u);
    p.counter->products += 2;
    t.r_v = (a_v - t.sigma * t.u).norm();
    t.r_u = (at_u - t.sigma * t.v).norm();
    if (t.flag != TripletFlag::zero_singular_value)
      t.flag = t.residual_norm() < norm_estimate * tol ? TripletFlag::converged : TripletFlag::unconverged;
    out.push_back(std::move(t));
  }
  p.counter->products += k;
  return out;
}

Stage2Inputs build_stage2_inputs(const SvdProblem& p, const std::vector<SingularTriplet>& triplets,
                                 const std::vector<bool>& converged, double norm_estimate,
                                 std::uint64_t seed) {
  Stage2Inputs in;
  const Index n = p.cols();
  const Index m = p.rows();
  std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
  const double floor = std::max(norm_estimate, 1e-300) * kMachineEpsilon;
  const double zero_level = std::max(norm_estimate, 1e-300) * kMachineEpsilon;
  Matrix used_u(m, 0);
  for (const auto& t : triplets) {
    used_u.conservativeResize(Eigen::NoChange, used_u.cols() + 1);
    used_u.col(used_u.cols() - 1) = t.u;
  }
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    Vector u = t.u;
    if (t.sigma <= zero_level && !converged[i]) {
      u = random_unit_vector(m, rng);
      for (int pass = 0; pass < 2; ++pass) u -= used_u * (used_u.transpose() * u);
      u.normalize();
    }
    Vector x(n + m);
    x.head(n) = t.v;
    x.tail(m) = u;
    x /= std::sqrt(2.0);
    if (converged[i]) {
      in.preset.push_back({t.sigma, x, t.residual_norm(), static_cast<int>(i)});
      Vector mirror = x;
      mirror.tail(m) = -mirror.tail(m);
      in.preset.push_back({-t.sigma, mirror, t.residual_norm(), static_cast<int>(i)});
    } else {
      in.guesses.push_back(x);
      in.shifts.push_back(std::max(t.sigma, floor));
      in.target_of_guess.push_back(static_cast<int>(i));
    }
  }
  return in;
}

SingularTriplet triplet_from_augmented(const SvdProblem& p, double value, const Vector& x,
                                       std::mt19937_64& rng) {
  const Index n = p.cols();
  const Index m = p.rows();
  SingularTriplet t;
  t.sigma = std::abs(value);
  t.v = x.head(n);
  t.u = x.tail(m);
  if (value < 0.0) t.u = -t.u;
  const double nv = t.v.norm();
  const double nu = t.u.norm();
  if (!(nv > 0.0)) t.v = random_unit_vector(n, rng);
  else t.v /= nv;
  if (!(nu > 1e-8 * std::max(nv, 1e-300))) {
    t.u = random_unit_vector(m, rng);
    t.flag = TripletFlag::zero_singular_value;
  } else {
    t.u /= nu;
  }
  return t;
}

Stage2Result stage2_augmented(const SvdProblem& p, const SvdConfig& cfg, const Stage2Inputs& in,
                              double norm_estimate, long max_matvecs, long max_iterations) {
  Stage2Result out;
  out.norm_estimate = norm_estimate;
  const int wanted = static_cast<int>(in.guesses.size());
  if (wanted == 0) return out;
  const Index n = p.cols();
  const Index m = p.rows();

  EigConfig ec;
  ec.max_basis = cfg.max_basis;
  ec.min_restart = cfg.min_restart;
  ec.k_prev = cfg.k_prev;
  ec.block_size = 1;  // blocks help stage one separate clusters; stage two refines one target at a time
  ec.max_matvecs = max_matvecs;
  ec.max_iterations = max_iterations;
  ec.which = Which::closest_to_shifts;
  ec.extraction = Extraction::refined;
  ec.shifts = in.shifts;
  ec.correction = cfg.stage2 == Stage2Method::jdqmr ? CorrectionMethod::jacobi_davidson
                                                    : CorrectionMethod::davidson;
  ec.inner.max_inner = cfg.max_inner;
  ec.seed = cfg.seed;
  ec.krylov_fill = true;
  ec.reintroduce_guesses = true;
  ec.stage = Stage::B;
  ec.preset_locked = in.preset;
  const double tol = cfg.tol;
  ec.converged = [tol, norm_estimate, n, m](const ConvergenceQuery& q) {
    const double norm_a = std::max(norm_estimate, q.op_norm_estimate);
    const auto v = q.vector.head(n);
    const auto u = q.vector.tail(m);
    const double nv = v.norm();
    const double nu = u.norm();
    if (!(nv > 1e-8)) return false;
    const double th = q.value;
    double metric;
    if (nu < 1e-8) {
      metric = (q.residual.tail(m) + th * u).norm() / nv;
    } else {
      // Split [v; u] into unit halves and score the triplet with its
      // two-sided Rayleigh quotient u'Av, which stays accurate when x mixes
      // the +sigma and -sigma eigenvectors.
      const double s = th < 0.0 ? -1.0 : 1.0;
      const Vector av = q.residual.tail(m) + th * u;
      const Vector atu = s * (q.residual.head(n) + th * v);
      const double sig = s * u.dot(av) / (nu * nv);
      const double rv = (av / nv - sig * s * u / nu).norm();
      const double ru = (atu / nu - sig * v / nv).norm();
      metric = std::hypot(ru, rv);
    }
    if (metric < tol * norm_a) return true;
    return q.stalled_iterations >= 30 && metric < 100.0 * kMachineEpsilon * norm_a;
  };
  ec.history_metric = [](double, double res) { return std::sqrt(2.0) * res; };
  // Rescale the halves of a converged [v; u] to equal norm so the locked
  // vector and its mirror are orthogonal, and take u'Av as its value.
  ec.polish = [n, m, a = p.a, counter = p.counter](const LockedPair& pr) {
    LockedPair out = pr;
    const double nv = pr.vector.head(n).norm();
    const double nu = pr.vector.tail(m).norm();
    if (!(nv > 1e-8) || !(nu > 1e-8)) return out;
    out.vector.head(n) /= nv * std::sqrt(2.0);
    out.vector.tail(m) /= nu * std::sqrt(2.0);
    const Vector av = spmv(*a, out.vector.head(n));
    counter->products += 1;
    out.value = 2.0 * out.vector.tail(m).dot(av);
    return out;
  };
  ec.companions = [m](const Vector& x, double value) {
    Vector mirror = x;
    mirror.tail(m) = -mirror.tail(m);
    return std::vector<LockedPair>{{-value, mirror, 0.0, 0}};
  };
  if (cfg.observer) ec.observer = [&cfg](const IterationSnapshot& s) { cfg.observer(Stage::B, s); };

  out.eig = gd_plus_k_solve(p.b, p.precond_b.get(), ec, in.guesses, wanted);
  out.norm_estimate = std::max(norm_estimate, out.eig.op_norm_estimate);

  std::mt19937_64 rng(cfg.seed ^ 0x853c49e6748fea9bULL);
  auto convert = [&](const LockedPair& pr, bool found) {
    SingularTriplet t = triplet_from_augmented(p, pr.value, pr.vector, rng);
    if (t.flag != TripletFlag::zero_singular_value) {
      t.sigma = std::max(t.u.dot(spmv(*p.a, t.v)), 0.0);
      p.counter->products += 1;
    }
    const auto b = residual_bundle(*p.a, t.sigma, t.u, t.v, p.counter.get());
    t.r_u = b.r_u;
    t.r_v = b.r_v;
    if (t.flag != TripletFlag::zero_singular_value) {
      if (!found) t.flag = TripletFlag::unconverged;
      else if (convergence_test(b, out.norm_estimate, tol)) t.flag = TripletFlag::converged;
      else t.flag = TripletFlag::floor_converged;
    }
    return t;
  };
  for (const auto& pr : out.eig.pairs) out.triplets.push_back(convert(pr, true));
  for (const auto& pr : out.eig.unconverged) out.triplets.push_back(convert(pr, false));
  return out;
}

SvdResult finalize_result(const SvdProblem& p, const SvdConfig& cfg,
                          std::vector<SingularTriplet> triplets, SolveStatus status,
                          ConvergenceHistory history, std::vector<StageInfo> stages,
                          double norm_estimate) {
  std::stable_sort(triplets.begin(), triplets.end(), [&](const auto& a, const auto& b) {
    const bool ca = a.flag != TripletFlag::unconverged;
    const bool cb = b.flag != TripletFlag::unconverged;
    if (ca != cb) return ca;
    return better(cfg.which, a.sigma, b.sigma);
  });
  if (static_cast<int>(triplets.size()) > cfg.k) triplets.resize(static_cast<std::size_t>(cfg.k));
  std::stable_sort(triplets.begin(), triplets.end(),
                   [&](const auto& a, const auto& b) { return better(cfg.which, a.sigma, b.sigma); });
  SvdResult r;
  r.num_requested = cfg.k;
  for (auto& t : triplets) r.triplets.push_back(to_input_orientation(p, std::move(t)));
  r.transposed = p.transposed;
  r.history = std::move(history);
  r.history.seed = cfg.seed;
  r.stages = std::move(stages);
  r.norm_estimate = norm_estimate;
  r.matvecs = p.counter->matvecs();
  r.status = r.fully_converged() ? SolveStatus::converged
                                 : (status == SolveStatus::converged ? SolveStatus::max_matvecs : status);
  return r;
}

SingularTriplet to_input_orientation(const SvdProblem& p, SingularTriplet t) {
  if (p.transposed) {
    std::swap(t.u, t.v);
    std::swap(t.r_u, t.r_v);
  }
  return t;
}

SvdResult finish_from_normal(const SvdProblem& p, const SvdConfig& cfg, const Matrix& v,
                             double norm_estimate, SolveStatus status, ConvergenceHistory history,
                             std::vector<StageInfo> stages, long remaining) {
  const long mv0 = p.counter->matvecs();
  double norm = norm_estimate;
  std::vector<SingularTriplet> trips = post_rayleigh_ritz(p, v, norm, cfg.tol);
  for (const auto& t : trips) norm = std::max(norm, t.sigma);
  // Keep the k best candidates in the target order.
  std::stable_sort(trips.begin(), trips.end(),
                   [&](const auto& x, const auto& y) { return better(cfg.which, x.sigma, y.sigma); });
  if (static_cast<int>(trips.size()) > cfg.k) trips.resize(static_cast<std::size_t>(cfg.k));

  std::vector<bool> done(trips.size());
  bool all_done = static_cast<int>(trips.size()) == cfg.k;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    done[i] = trips[i].flag == TripletFlag::converged;
    all_done = all_done && done[i];
  }
  remaining -= p.counter->matvecs() - mv0;
  if (all_done || !cfg.run_stage2 || remaining <= 0 || static_cast<int>(trips.size()) < cfg.k) {
    history.annotate(p.counter->matvecs(), all_done ? "stage one met the tolerance" : "stage two skipped");
    return finalize_result(p, cfg, std::move(trips), status, std::move(history), std::move(stages),
                           norm);
  }
  history.annotate(p.counter->matvecs(), "switch to augmented matrix");

  const Stage2Inputs in = build_stage2_inputs(p, trips, done, norm, cfg.seed);
  Stage2Result s2 = stage2_augmented(p, cfg, in, norm, remaining);
  history.append(s2.eig.history);
  stages.push_back({Stage::B, s2.eig.matvecs, s2.eig.iterations, s2.eig.status});

  std::vector<SingularTriplet> final;
  for (std::size_t i = 0; i < trips.size(); ++i)
    if (done[i]) final.push_back(trips[i]);
  for (auto& t : s2.triplets) final.push_back(std::move(t));
  return finalize_result(p, cfg, std::move(final), s2.eig.status, std::move(history),
                         std::move(stages), s2.norm_estimate);
}

SvdResult phsvds_solve(std::shared_ptr<const SparseMatrix> a, const SvdConfig& cfg) {
  SvdProblem p = make_problem(std::move(a), cfg);
  if (cfg.dynamic && !cfg.shift_invert) return dynamic_switch_solve(p, cfg);

  ConvergenceHistory history;
  history.seed = cfg.seed;
  std::vector<StageInfo> stages;

  if (cfg.shift_invert) {
    const bool on_b = *cfg.shift_invert == ShiftInvertMode::lu_of_B;
    const LinearOperator op =
        shift_invert_operator(p.a, *cfg.shift_invert, on_b ? cfg.shift_invert_shift : 0.0, p.counter);
    EigConfig ec;
    ec.max_basis = cfg.max_basis;
    ec.min_restart = cfg.min_restart;
    ec.k_prev = cfg.k_prev;
    ec.block_size = std::max(1, std::min(cfg.block_size, cfg.k));
    ec.max_matvecs = cfg.max_matvecs;
    ec.which = Which::largest_algebraic;
    ec.seed = cfg.seed;
    ec.stage = on_b ? Stage::B : Stage::C;
    const double tol = cfg.tol;
    const double norm = estimate_norm(p, 10);
    // Map the target on A back to the inverse: a residual r on the inverse
    // bounds the residual on C (or B - s) by ||C|| r / |value|.
    const double sh = on_b ? cfg.shift_invert_shift : 0.0;
    ec.converged = [tol, norm, on_b, sh](const ConvergenceQuery& q) {
      const double mu = std::abs(q.value);
      double target;
      if (on_b) {
        target = tol * mu * norm / (norm + std::abs(sh));
      } else {
        const double sigma = mu > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
        target = tol * mu * sigma / std::max(norm, 1e-300);
      }
      return q.residual_norm < std::max(target, kMachineEpsilon * q.op_norm_estimate);
    };
    std::vector<Vector> guesses = initial_guesses(p, cfg);
    if (on_b) {
      for (auto& g : guesses) {
        Vector x = Vector::Zero(p.rows() + p.cols());
        x.head(p.cols()) = g;
        x.tail(p.rows()) = spmv(*p.a, g);
        p.counter->products += 1;
        g = x.normalized();
      }
    }
    auto eig = gd_plus_k_solve(op, nullptr, ec, guesses, cfg.k);
    history.append(eig.history);
    stages.push_back({ec.stage, eig.matvecs, eig.iterations, eig.status});
    std::vector<SingularTriplet> trips;
    if (on_b) {
      std::mt19937_64 rng(cfg.seed);
      for (const auto* list : {&eig.pairs, &eig.unconverged}) {
        const bool found = list == &eig.pairs;
        for (const auto& pr : *list) {
          const double sigma = singular_value_from_spectral(op, pr.value);
          SingularTriplet t = triplet_from_augmented(p, sigma, pr.vector, rng);
          const auto b = residual_bundle(*p.a, t.sigma, t.u, t.v, p.counter.get());
          t.r_u = b.r_u;
          t.r_v = b.r_v;
          if (t.flag != TripletFlag::zero_singular_value)
            t.flag = !found ? TripletFlag::unconverged
                            : (convergence_test(b, norm, tol) ? TripletFlag::converged
                                                              : TripletFlag::floor_converged);
          trips.push_back(std::move(t));
        }
      }
    } else {
      Matrix v(p.cols(), 0);
      for (const auto* list : {&eig.pairs, &eig.unconverged})
        for (const auto& pr : *list) {
          v.conservativeResize(Eigen::NoChange, v.cols() + 1);
          v.col(v.cols() - 1) = pr.vector;
        }
      trips = post_rayleigh_ritz(p, v, norm, cfg.tol);
    }
    SvdConfig order = cfg;
    order.which = on_b ? SvdTarget::largest : SvdTarget::smallest;
    SvdResult r = finalize_result(p, order, std::move(trips), eig.status, std::move(history),
                                  std::move(stages), norm);
    if (on_b) {
      // Report the pairs by distance to the shift.
      const double sh = cfg.shift_invert_shift;
      std::stable_sort(r.triplets.begin(), r.triplets.end(), [sh](const auto& x, const auto& y) {
        return std::abs(x.sigma - sh) < std::abs(y.sigma - sh);
      });
    }
    return r;
  }

  const long budget = cfg.max_matvecs;
  const long mv0 = p.counter->matvecs();
  Stage1Result s1 = stage1_normal(p, cfg, initial_guesses(p, cfg), budget);
  history.append(s1.eig.history);
  stages.push_back({Stage::C, s1.eig.matvecs, s1.eig.iterations, s1.eig.status});

  Matrix v(p.cols(), 0);
  for (const auto* list : {&s1.eig.pairs, &s1.eig.unconverged})
    for (const auto& pr : *list) {
      v.conservativeResize(Eigen::NoChange, v.cols() + 1);
      v.col(v.cols() - 1) = pr.vector;
    }
  const long remaining = budget - (p.counter->matvecs() - mv0);
  return finish_from_normal(p, cfg, v, s1.norm_estimate, s1.eig.status, std::move(history),
                            std::move(stages), remaining);
}

}  // namespace phsvds
