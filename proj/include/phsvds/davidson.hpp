#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "phsvds/correction.hpp"
#include "phsvds/history.hpp"
#include "phsvds/subspace.hpp"

namespace phsvds {

enum class CorrectionMethod { davidson, jacobi_davidson };

struct ConvergenceQuery {
  int target = 0;
  double value = 0.0;
  double residual_norm = 0.0;
  const Vector& vector;        // unit norm approximate eigenvector
  const Vector& residual;      // Op x - value x
  double op_norm_estimate = 0.0;
  int stalled_iterations = 0;  // iterations since the residual last halved
};
using ConvergenceTest = std::function<bool(const ConvergenceQuery&)>;

struct IterationSnapshot {
  const SubspaceState& state;
  int iteration = 0;
  long matvecs = 0;
  int target = 0;
  double value = 0.0;
  double residual_norm = 0.0;
  double refined_residual = 0.0;  // smallest singular value of R (refined mode)
  double ritz_residual = 0.0;     // residual of the Ritz vector closest to the shift
  bool restarted = false;         // a restart happened since the previous snapshot
  bool locked = false;            // a lock happened since the previous snapshot
};

struct EigConfig {
  int max_basis = 35;
  int min_restart = 21;
  int k_prev = 1;
  int block_size = 1;
  long max_matvecs = 1'000'000;
  long max_iterations = -1;        // outer iterations, -1 for no cap
  double tol = 1e-10;              // default test: ||r|| <= tol * ||Op||_est
  Which which = Which::smallest_algebraic;
  Extraction extraction = Extraction::rayleigh_ritz;
  std::vector<double> shifts;      // per target for closest_to_shifts; the last one repeats
  CorrectionMethod correction = CorrectionMethod::davidson;
  InnerConfig inner;
  std::uint64_t seed = 0;
  bool krylov_fill = false;
  bool reintroduce_guesses = false;
  Stage stage = Stage::other;
  std::vector<LockedPair> preset_locked;  // deflated from the start, not counted as found

  ConvergenceTest converged;
  std::function<double(double value, double residual)> history_metric;
  // Applied to a converged pair before it is locked.
  std::function<LockedPair(const LockedPair&)> polish;
  // Extra directions to deflate along with a locked vector.
  std::function<std::vector<LockedPair>(const Vector&, double)> companions;
  std::function<void(const IterationSnapshot&)> observer;
};

enum class SolveStatus { converged, max_matvecs, max_iterations };

struct EigResult {
  std::vector<LockedPair> pairs;        // converged, ordered per the target criterion
  std::vector<LockedPair> unconverged;  // current approximations for missing targets
  SolveStatus status = SolveStatus::converged;
  ConvergenceHistory history;
  long matvecs = 0;
  long iterations = 0;
  double op_norm_estimate = 0.0;
  // Residual norm of the first unconverged target per outer iteration, used
  // for convergence-rate estimates.
  std::vector<double> target_residuals;
};

// GD+k (or JD with symmetric QMR inner solves) for the extreme or
// shift-nearest eigenpairs of a symmetric operator. guesses[i] seeds target
// i; missing guesses are replaced by random vectors.
EigResult gd_plus_k_solve(const LinearOperator& op, const Preconditioner* prec,
                          const EigConfig& cfg, const std::vector<Vector>& guesses,
                          int num_wanted);

}  // namespace phsvds
