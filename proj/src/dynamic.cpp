#include "phsvds/dynamic.hpp"

#include <algorithm>
#include <cmath>

namespace phsvds {

double convergence_rate(const std::vector<double>& residuals, int window) {
  const std::size_t n = residuals.size();
  if (n < 2) return 1.0;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), n - 1);
  double log_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = n - w; i < n; ++i) {
    const double a = residuals[i - 1];
    const double b = residuals[i];
    if (!(a > 0.0) || !(b > 0.0)) continue;
    log_sum += std::log(b / a);
    ++used;
  }
  return used == 0 ? 1.0 : std::exp(log_sum / static_cast<double>(used));
}

namespace {

struct Approx {
  Vector v;
  double sigma = -1.0;   // unknown until a run has produced an estimate
  bool found = false;
  Stage found_on = Stage::C;
};

class Switcher {
 public:
  Switcher(const SvdProblem& p, const SvdConfig& cfg) : p_(p), cfg_(cfg) {
    history_.seed = cfg.seed;
    for (auto& g : initial_guesses(p, cfg)) approx_.push_back({g, -1.0, false, Stage::C});
  }

  SvdResult run();

 private:
  long remaining() const { return cfg_.max_matvecs - (p_.counter->matvecs() - mv0_); }
  int num_found() const {
    return static_cast<int>(std::count_if(approx_.begin(), approx_.end(), [](const auto& a) { return a.found; }));
  }
  bool all_found() const { return num_found() >= cfg_.k; }
  int window(long iterations) const {
    return std::max(cfg_.dynamic_config.min_rate_window, static_cast<int>(iterations / 2));
  }

  int run_c(long max_iterations);
  int run_b(long max_iterations, Stage2Method method);
  std::vector<SingularTriplet> current_triplets();
  double norm() {
    if (norm_ <= 0.0) norm_ = estimate_norm(p_);
    return norm_;
  }

  const SvdProblem& p_;
  const SvdConfig& cfg_;
  long mv0_ = p_.counter->matvecs();
  std::vector<Approx> approx_;
  ConvergenceHistory history_;
  std::vector<StageInfo> stages_;
  double norm_ = 0.0;
  double rate_c_ = 1.0;
  double rate_b_ = 1.0;
  SolveStatus status_ = SolveStatus::converged;
  std::vector<SingularTriplet> b_found_;
};

int Switcher::run_c(long max_iterations) {
  std::vector<LockedPair> preset;
  std::vector<Vector> guesses;
  for (const auto& a : approx_) {
    if (a.found) preset.push_back({a.sigma * a.sigma, a.v, 0.0, 0});
    else guesses.push_back(a.v);
  }
  if (remaining() <= 0) {
    status_ = SolveStatus::max_matvecs;
    return 0;
  }
  Stage1Result r = stage1_normal(p_, cfg_, guesses, remaining(), max_iterations, preset);
  history_.append(r.eig.history);
  stages_.push_back({Stage::C, r.eig.matvecs, r.eig.iterations, r.eig.status});
  norm_ = std::max(norm_, r.norm_estimate);
  if (r.eig.status == SolveStatus::max_matvecs) status_ = SolveStatus::max_matvecs;
  rate_c_ = convergence_rate(r.eig.target_residuals, window(r.eig.iterations));

  std::vector<Approx> next;
  for (const auto& a : approx_)
    if (a.found) next.push_back(a);
  for (const auto& pr : r.eig.pairs)
    next.push_back({pr.vector, std::sqrt(std::max(pr.value, 0.0)), true, Stage::C});
  for (const auto& pr : r.eig.unconverged)
    next.push_back({pr.vector, std::sqrt(std::max(pr.value, 0.0)), false, Stage::C});
  approx_ = std::move(next);
  return static_cast<int>(r.eig.pairs.size());
}

std::vector<SingularTriplet> Switcher::current_triplets() {
  std::vector<SingularTriplet> out;
  for (const auto& a : approx_) {
    SingularTriplet t;
    t.v = a.v.normalized();
    Vector av = spmv(*p_.a, t.v);
    p_.counter->products += 1;
    t.sigma = av.norm();
    t.u = t.sigma > 0.0 ? Vector(av / t.sigma) : Vector(Vector::Zero(p_.rows()));
    if (t.sigma > 0.0) {
      t.r_u = (spmv_t(*p_.a, t.u) - t.sigma * t.v).norm();
      p_.counter->products += 1;
    }
    t.flag = a.found ? TripletFlag::converged : TripletFlag::unconverged;
    out.push_back(std::move(t));
  }
  return out;
}

int Switcher::run_b(long max_iterations, Stage2Method method) {
  if (remaining() <= 0) {
    status_ = SolveStatus::max_matvecs;
    return 0;
  }
  const double nrm = norm();
  std::vector<SingularTriplet> trips = current_triplets();
  // Only pairs already accurate on B are deflated there; pairs found on C
  // are refined again.
  std::vector<bool> done(trips.size());
  for (std::size_t i = 0; i < trips.size(); ++i)
    done[i] = approx_[i].found && approx_[i].found_on == Stage::B;
  Stage2Inputs in = build_stage2_inputs(p_, trips, done, nrm, cfg_.seed);
  // Probe estimates can be far from converged; aim below them by the
  // residual so a smaller singular value within reach is not skipped.
  for (std::size_t i = 0; i < in.shifts.size(); ++i) {
    const auto& t = trips[static_cast<std::size_t>(in.target_of_guess[i])];
    in.shifts[i] = std::max(t.sigma - t.residual_norm(), nrm * kMachineEpsilon);
  }
  SvdConfig c = cfg_;
  c.stage2 = method;
  Stage2Result r = stage2_augmented(p_, c, in, nrm, remaining(), max_iterations);
  history_.append(r.eig.history);
  stages_.push_back({Stage::B, r.eig.matvecs, r.eig.iterations, r.eig.status});
  norm_ = std::max(norm_, r.norm_estimate);
  if (r.eig.status == SolveStatus::max_matvecs) status_ = SolveStatus::max_matvecs;
  rate_b_ = convergence_rate(r.eig.target_residuals, window(r.eig.iterations));

  std::vector<Approx> next;
  for (std::size_t i = 0; i < approx_.size(); ++i)
    if (done[i]) next.push_back(approx_[i]);
  int newly = 0;
  for (const auto& t : r.triplets) {
    const bool ok = t.flag != TripletFlag::unconverged;
    if (ok) {
      ++newly;
      b_found_.push_back(t);
    }
    next.push_back({t.v, t.sigma, ok, Stage::B});
  }
  // Targets the run did not report keep their previous approximation.
  for (std::size_t i = 0; i < approx_.size() && static_cast<int>(next.size()) < cfg_.k; ++i)
    if (!done[i]) next.push_back(approx_[i]);
  approx_ = std::move(next);
  return newly;
}

SvdResult Switcher::run() {
  const DynamicConfig& dc = cfg_.dynamic_config;
  int num_switch = 0;
  int num_converged = 0;
  int j = 0;
  long max_iter = dc.init_iter;
  bool undecided = true;

  num_converged += run_c(dc.init_iter);
  history_.annotate(p_.counter->matvecs(), "initial probe on C done");
  Stage last = Stage::C;
  if (!all_found() && status_ == SolveStatus::converged) {
    num_converged += run_b(dc.init_iter, Stage2Method::gdk);
    history_.annotate(p_.counter->matvecs(), "initial probe on B done");
    last = Stage::B;
  }
  Stage faster = rate_c_ <= rate_b_ ? Stage::C : Stage::B;

  while (num_switch < dc.max_switch && undecided && !all_found() &&
         status_ == SolveStatus::converged) {
    faster = rate_c_ <= rate_b_ ? Stage::C : Stage::B;
    if ((num_switch == 0 && num_converged > 0) || num_converged > 1) {
      undecided = false;
    } else if (faster == last) {
      ++j;
      max_iter = dc.init_iter * (1L << j);
    } else {
      j /= 2;
      max_iter = dc.init_iter * (1L << j);
    }
    history_.switches.push_back({num_switch + 1, faster, static_cast<int>(max_iter), rate_c_, rate_b_,
                                 num_converged, !undecided});
    ++num_switch;
    if (!undecided) break;
    history_.annotate(p_.counter->matvecs(),
                      std::string("dynamic run on ") + to_string(faster));
    num_converged += faster == Stage::C ? run_c(max_iter) : run_b(max_iter, Stage2Method::gdk);
    last = faster;
  }
  faster = rate_c_ <= rate_b_ ? Stage::C : Stage::B;
  if (undecided && !all_found())
    history_.annotate(p_.counter->matvecs(),
                      std::string("switch limit reached, continuing on ") + to_string(faster));

  const bool all_on_b =
      all_found() && std::all_of(approx_.begin(), approx_.end(),
                                 [](const auto& a) { return a.found_on == Stage::B; });
  if (all_on_b) {
    history_.annotate(p_.counter->matvecs(), "all triplets found on B");
    return finalize_result(p_, cfg_, b_found_, status_, std::move(history_), std::move(stages_), norm());
  }
  if (!all_found() && faster == Stage::B && status_ == SolveStatus::converged) {
    history_.annotate(p_.counter->matvecs(), "continuing with the augmented approach only");
    run_b(-1, cfg_.stage2);
    std::vector<SingularTriplet> trips = b_found_;
    if (!all_found()) {
      for (auto t : current_triplets())
        if (t.flag == TripletFlag::unconverged) trips.push_back(std::move(t));
    }
    return finalize_result(p_, cfg_, std::move(trips), status_, std::move(history_), std::move(stages_),
                           norm());
  }
  if (!all_found() && status_ == SolveStatus::converged) {
    history_.annotate(p_.counter->matvecs(), "continuing with the two-stage approach");
    run_c(-1);
  } else if (all_found()) {
    history_.annotate(p_.counter->matvecs(), "all triplets found, refining on B");
  }
  Matrix v(p_.cols(), static_cast<Index>(approx_.size()));
  for (std::size_t i = 0; i < approx_.size(); ++i) v.col(static_cast<Index>(i)) = approx_[i].v;
  return finish_from_normal(p_, cfg_, v, norm(), status_, std::move(history_), std::move(stages_),
                            remaining());
}

}  // namespace

SvdResult dynamic_switch_solve(const SvdProblem& p, const SvdConfig& cfg) {
  return Switcher(p, cfg).run();
}

}  // namespace phsvds
