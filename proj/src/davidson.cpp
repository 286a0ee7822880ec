#include "phsvds/davidson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace phsvds {

namespace {

void validate(const EigConfig& cfg, int num_wanted) {
  if (num_wanted < 0) throw std::invalid_argument("gd_plus_k_solve: negative number of targets");
  if (cfg.block_size < 1) throw std::invalid_argument("gd_plus_k_solve: block_size must be >= 1");
  if (cfg.max_basis < 2) throw std::invalid_argument("gd_plus_k_solve: max_basis must be >= 2");
  if (cfg.min_restart < 1 || cfg.min_restart >= cfg.max_basis)
    throw std::invalid_argument("gd_plus_k_solve: need 1 <= min_restart < max_basis");
  if (cfg.k_prev < 0) throw std::invalid_argument("gd_plus_k_solve: k_prev must be >= 0");
  if (cfg.min_restart + cfg.k_prev + cfg.block_size > cfg.max_basis)
    throw std::invalid_argument("gd_plus_k_solve: min_restart + k_prev + block_size exceeds max_basis");
  if (cfg.which == Which::closest_to_shifts && cfg.shifts.empty())
    throw std::invalid_argument("gd_plus_k_solve: closest_to_shifts needs at least one shift");
}

double shift_for(const EigConfig& cfg, int target) {
  if (cfg.shifts.empty()) return 0.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(target), cfg.shifts.size() - 1);
  return cfg.shifts[i];
}

struct Approximation {
  int target = 0;
  double value = 0.0;
  Vector coeffs;
  Vector x;
  Vector r;
  double residual = 0.0;
};

// Removes directions that are not in span(V) from the basis. Images of the
// removed directions are taken as value * vector, which is accurate to the
// residual of the deflated pair.
void deflate_outside(SubspaceState& s, const std::vector<LockedPair>& extra) {
  if (extra.empty() || s.size() == 0) return;
  // Orthonormal basis of the new directions, with their images carried
  // along. Directions already covered are skipped.
  Matrix d(s.dim(), 0);
  Matrix dl(s.dim(), 0);
  for (const auto& e : extra) {
    Vector y = e.vector;
    Vector yl = e.value * e.vector;
    const double original = y.norm();
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = d.transpose() * y;
      y -= d * c;
      yl -= dl * c;
    }
    const double norm = y.norm();
    if (!(norm > 1e-8 * original)) continue;
    d.conservativeResize(Eigen::NoChange, d.cols() + 1);
    dl.conservativeResize(Eigen::NoChange, dl.cols() + 1);
    d.col(d.cols() - 1) = y / norm;
    dl.col(dl.cols() - 1) = yl / norm;
  }
  const Matrix p = d.transpose() * s.v;
  Matrix v1 = s.v - d * p;
  Matrix w1 = s.w - dl * p;
  const Matrix gram = v1.transpose() * v1;
  const auto eig = dense_sym_eig(gram);
  std::vector<Index> keep;
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > 1e-4) keep.push_back(i);
  Matrix c(s.size(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    c.col(static_cast<Index>(i)) = eig.vectors.col(keep[i]) / std::sqrt(eig.values(keep[i]));
  s.v = v1 * c;
  s.w = w1 * c;
  // One more orthogonalization sweep to clean up rounding in V.
  auto qr = qr_factor(s.v);
  const Matrix rinv = qr.r.triangularView<Eigen::Upper>().solve(
      Matrix::Identity(qr.r.rows(), qr.r.cols()));
  s.v = qr.q;
  s.w = s.w * rinv;
  s.h = s.v.transpose() * s.w;
  s.h = (s.h + s.h.transpose()).eval() / 2.0;
  s.qr_full = true;
}

}  // namespace

EigResult gd_plus_k_solve(const LinearOperator& op_in, const Preconditioner* prec,
                          const EigConfig& cfg, const std::vector<Vector>& guesses,
                          int num_wanted) {
  validate(cfg, num_wanted);
  // Operators without accounting count one matvec per apply.
  LinearOperator op = op_in;
  if (!op.counter() || op.matvec_cost() == 0)
    op = LinearOperator(op_in.dim_in(), op_in.dim_out(),
                        [&op_in](const Vector& x) { return op_in.apply(x); }, op_in.is_symmetric(), 2,
                        std::make_shared<MatvecCounter>());
  if (!op.is_symmetric()) throw std::invalid_argument("gd_plus_k_solve: operator must be symmetric");
  const Index dim = op.dim_in();
  for (const auto& g : guesses)
    if (g.size() != dim) throw std::invalid_argument("gd_plus_k_solve: guess has wrong dimension");
  if (prec && prec->dim() != dim)
    throw std::invalid_argument("gd_plus_k_solve: preconditioner has wrong dimension");

  EigResult out;
  out.history.seed = cfg.seed;
  std::mt19937_64 rng(cfg.seed);
  const long mv_start = op.matvecs();
  auto used = [&] { return op.matvecs() - mv_start; };
  const bool refined = cfg.extraction == Extraction::refined;

  SubspaceState s(dim, refined, shift_for(cfg, 0));
  for (const auto& p : cfg.preset_locked) s.add_deflation(p.vector);
  if (num_wanted > dim - s.deflation.cols())
    throw std::invalid_argument("gd_plus_k_solve: more targets than available dimensions");
  if (num_wanted == 0) return out;

  std::vector<int> pending(static_cast<std::size_t>(num_wanted));
  for (int i = 0; i < num_wanted; ++i) pending[static_cast<std::size_t>(i)] = i;

  auto available = [&] { return dim - s.deflation.cols(); };
  auto max_basis = [&] { return std::min<Index>(cfg.max_basis, available()); };

  auto expand = [&](Vector t, bool allow_random) -> bool {
    if (s.size() >= available()) return false;
    double ratio = s.orthogonalize(t);
    if (!(ratio > 1e-10) || !t.allFinite()) {
      if (!allow_random) return false;
      out.history.annotate(op.matvecs(), "degenerate expansion replaced by random vector");
      for (int attempt = 0; attempt < 5 && !(ratio > 1e-10); ++attempt) {
        t = random_unit_vector(dim, rng);
        ratio = s.orthogonalize(t);
      }
      if (!(ratio > 1e-10)) return false;
    }
    t.normalize();
    s.append(t, op.apply(t));
    return true;
  };

  auto guess_for = [&](int target) -> std::optional<Vector> {
    if (static_cast<std::size_t>(target) < guesses.size()) return guesses[static_cast<std::size_t>(target)];
    return std::nullopt;
  };

  // Initial basis.
  const Index init_cap = std::max<Index>(1, max_basis() - cfg.block_size);
  for (const auto& g : guesses) {
    if (s.size() >= init_cap) break;
    expand(g, false);
  }
  // A block needs as many independent starting directions as its size.
  while (s.size() < std::min<Index>(cfg.block_size, available()))
    if (!expand(random_unit_vector(dim, rng), true)) break;
  if (cfg.krylov_fill) {
    Index last = 0;
    const Index fill = std::min<Index>(cfg.min_restart, init_cap);
    while (s.size() < fill && used() < cfg.max_matvecs) {
      if (!expand(s.w.col(last), false)) break;
      last = s.size() - 1;
    }
  }

  std::map<int, std::pair<double, int>> stall;  // target -> (best residual, iterations since)
  std::map<int, int> since_target;              // outer iterations on a target
  Matrix prev_coeffs;
  bool restarted = false;
  bool locked_flag = false;
  long iteration = 0;
  double op_norm = 0.0;
  std::vector<Approximation> block;

  auto metric = [&](double value, double res) {
    return cfg.history_metric ? cfg.history_metric(value, res) : res;
  };

  auto extract = [&](std::size_t want) {
    if (refined) {
      s.target_shift = shift_for(cfg, pending.front());
      if (s.qr_full || s.r.cols() != s.size()) s.refactor_qr();
    }
    const double order_shift = shift_for(cfg, pending.front());
    RitzPairs ritz = rayleigh_ritz_extract(s, cfg.which, order_shift);
    for (Index i = 0; i < ritz.values.size(); ++i) op_norm = std::max(op_norm, std::abs(ritz.values(i)));
    const int b = static_cast<int>(std::min<std::size_t>(
        std::min<std::size_t>(want, pending.size()), static_cast<std::size_t>(s.size())));
    block.clear();
    std::vector<bool> taken(static_cast<std::size_t>(ritz.values.size()), false);
    for (int t = 0; t < b; ++t) {
      Approximation a;
      a.target = pending[static_cast<std::size_t>(t)];
      Index pick = t;
      if (cfg.which == Which::closest_to_shifts) {
        const double sh = shift_for(cfg, a.target);
        pick = -1;
        for (Index i = 0; i < ritz.values.size(); ++i) {
          if (taken[static_cast<std::size_t>(i)]) continue;
          if (pick < 0) { pick = i; continue; }
          const double di = std::abs(ritz.values(i) - sh);
          const double dp = std::abs(ritz.values(pick) - sh);
          if (di < dp || (di == dp && ritz.values(i) < ritz.values(pick))) pick = i;
        }
      }
      taken[static_cast<std::size_t>(pick)] = true;
      a.coeffs = ritz.coeffs.col(pick);
      a.value = ritz.values(pick);
      block.push_back(std::move(a));
    }
    double refined_res = 0.0;
    double ritz_res = 0.0;
    if (refined) {
      const RefinedPairs rf = refined_extract(s);
      block.front().coeffs = rf.coeffs.col(0);
      block.front().value = rf.value;
      refined_res = rf.singular_values(0);
      ritz_res = (s.r * ritz.coeffs.col(0)).norm();
    }
    for (auto& a : block) {
      a.x = s.v * a.coeffs;
      a.r = s.w * a.coeffs - a.value * a.x;
      a.residual = a.r.norm();
    }
    return std::make_tuple(std::move(ritz), refined_res, ritz_res);
  };

  while (true) {
    if (s.size() == 0) expand(random_unit_vector(dim, rng), true);
    auto [ritz, refined_res, ritz_res] = extract(static_cast<std::size_t>(cfg.block_size));

    const auto& first = block.front();
    out.target_residuals.push_back(first.residual);
    if (cfg.observer) {
      cfg.observer(IterationSnapshot{s, static_cast<int>(iteration), used(), first.target, first.value,
                                     first.residual, refined_res, ritz_res, restarted, locked_flag});
    }
    const bool had_restart = restarted;
    restarted = false;
    locked_flag = false;

    // Convergence checks.
    const bool space_exhausted = s.size() >= available();
    std::vector<std::size_t> conv;
    for (std::size_t t = 0; t < block.size(); ++t) {
      auto& a = block[t];
      auto& st = stall.try_emplace(a.target, std::numeric_limits<double>::infinity(), 0).first->second;
      if (a.residual < 0.5 * st.first) {
        st.first = a.residual;
        st.second = 0;
      } else {
        ++st.second;
      }
      const Vector xu = a.x.normalized();
      const ConvergenceQuery q{a.target, a.value, a.residual, xu, a.r, op_norm, st.second};
      const bool ok = cfg.converged ? cfg.converged(q)
                                    : a.residual <= cfg.tol * std::max(op_norm, 1e-300);
      if (ok || space_exhausted) conv.push_back(t);
    }
    // Blocks lock in order: a later target never locks before an earlier
    // one in smallest/largest mode, which keeps the deflation consistent.
    if (cfg.which != Which::closest_to_shifts && !conv.empty()) {
      std::size_t prefix = 0;
      while (prefix < conv.size() && conv[prefix] == prefix) ++prefix;
      conv.resize(prefix);
    }

    HistoryEntry entry{used(), cfg.stage, first.target, first.value,
                       metric(first.value, first.residual), !conv.empty(), had_restart};
    out.history.entries.push_back(entry);

    if (!conv.empty()) {
      Matrix y(s.size(), static_cast<Index>(conv.size()));
      std::vector<LockedPair> companions;
      for (std::size_t i = 0; i < conv.size(); ++i) {
        const auto& a = block[conv[i]];
        LockedPair p{a.value, a.x.normalized(), a.residual, a.target};
        if (cfg.polish) p = cfg.polish(p);
        if (cfg.companions) {
          auto extra = cfg.companions(p.vector, p.value);
          companions.insert(companions.end(), extra.begin(), extra.end());
        }
        if (cfg.polish) companions.insert(companions.begin(), p);
        s.locked.push_back(p);
        out.pairs.push_back(p);
        y.col(static_cast<Index>(i)) = a.coeffs;
        pending.erase(std::find(pending.begin(), pending.end(), a.target));
        stall.erase(a.target);
        since_target.erase(a.target);
      }
      for (std::size_t i = 0; i < conv.size(); ++i)
        s.add_deflation(cfg.polish ? s.locked[s.locked.size() - conv.size() + i].vector
                                   : block[conv[i]].x.normalized());
      orthonormalize_columns(y);
      if (y.cols() < s.size()) s.compress(orthonormal_complement(y));
      else s.compress(Matrix(s.size(), 0));
      for (auto& c : companions) {
        s.add_deflation(c.vector);
      }
      deflate_outside(s, companions);
      prev_coeffs.resize(0, 0);
      locked_flag = true;
      ++iteration;
      if (pending.empty()) break;
      if (cfg.reintroduce_guesses) {
        const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(cfg.block_size), pending.size());
        const std::size_t from = b > conv.size() ? b - conv.size() : 0;
        for (std::size_t i = from; i < b; ++i)
          if (auto g = guess_for(pending[i])) expand(*g, false);
      }
      if (cfg.max_iterations >= 0 && iteration >= cfg.max_iterations) {
        out.status = SolveStatus::max_iterations;
        break;
      }
      continue;
    }

    if (used() + static_cast<long>(block.size()) > cfg.max_matvecs) {
      out.status = SolveStatus::max_matvecs;
      break;
    }
    if (cfg.max_iterations >= 0 && iteration >= cfg.max_iterations) {
      out.status = SolveStatus::max_iterations;
      break;
    }

    // Corrections.
    std::vector<Vector> corrections;
    for (auto& a : block) {
      if (cfg.correction == CorrectionMethod::jacobi_davidson) {
        InnerConfig ic = cfg.inner;
        ic.outer_iteration = since_target[a.target]++;
        const Vector u = a.x.normalized();
        corrections.push_back(jd_correction_solve(op, prec, u, a.value, a.r, s.deflation, ic).t);
      } else {
        corrections.push_back(prec ? prec->apply(a.r) : a.r);
      }
    }

    // Restart.
    const Index b = static_cast<Index>(block.size());
    if (s.size() + b > max_basis()) {
      const Index keep_ritz = std::max<Index>(
          1, std::min<Index>(cfg.min_restart, max_basis() - b - cfg.k_prev));
      Matrix c(s.size(), 0);
      auto add_col = [&](const Vector& col) {
        c.conservativeResize(Eigen::NoChange, c.cols() + 1);
        c.col(c.cols() - 1) = col;
      };
      for (const auto& a : block) add_col(a.coeffs);
      for (Index i = 0; i < ritz.values.size() && c.cols() < keep_ritz; ++i) add_col(ritz.coeffs.col(i));
      orthonormalize_columns(c);
      while (c.cols() > keep_ritz) c.conservativeResize(Eigen::NoChange, c.cols() - 1);
      if (prev_coeffs.cols() > 0 && prev_coeffs.rows() == s.size()) {
        for (Index i = 0; i < std::min<Index>(cfg.k_prev, prev_coeffs.cols()); ++i)
          add_col(prev_coeffs.col(i));
      }
      orthonormalize_columns(c);
      s.compress(c);
      for (auto& a : block) a.coeffs = c.transpose() * a.coeffs;
      restarted = true;
    }
    prev_coeffs.resize(s.size(), b);
    for (Index i = 0; i < b; ++i) prev_coeffs.col(i) = block[static_cast<std::size_t>(i)].coeffs;

    for (auto& t : corrections) {
      if (!expand(std::move(t), true)) break;
    }
    const Index old_rows = prev_coeffs.rows();
    prev_coeffs.conservativeResize(s.size(), Eigen::NoChange);
    prev_coeffs.bottomRows(s.size() - old_rows).setZero();
    ++iteration;
  }

  // Current approximations for the targets that did not converge.
  if (!pending.empty() && s.size() > 0) {
    extract(pending.size());
    for (const auto& a : block)
      out.unconverged.push_back({a.value, a.x.normalized(), a.residual, a.target});
  }

  switch (cfg.which) {
    case Which::smallest_algebraic:
      std::sort(out.pairs.begin(), out.pairs.end(),
                [](const auto& a, const auto& b) { return a.value < b.value; });
      break;
    case Which::largest_algebraic:
      std::sort(out.pairs.begin(), out.pairs.end(),
                [](const auto& a, const auto& b) { return a.value > b.value; });
      break;
    case Which::closest_to_shifts:
      std::sort(out.pairs.begin(), out.pairs.end(),
                [](const auto& a, const auto& b) { return a.target < b.target; });
      break;
  }
  out.matvecs = used();
  out.iterations = iteration;
  out.op_norm_estimate = op_norm;
  return out;
}

}  // namespace phsvds
