#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phsvds/davidson.hpp"
#include "phsvds/history.hpp"
#include "phsvds/operators.hpp"
#include "phsvds/residuals.hpp"
#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

enum class SvdTarget { smallest, largest };
enum class Stage2Method { gdk, jdqmr };
enum class PrecondKind { none, jacobi, ilu0, shift_invert_qr, shift_invert_lu };

std::string to_string(SvdTarget t);
std::string to_string(Stage2Method m);
std::string to_string(PrecondKind p);
std::string to_string(SolveStatus s);

struct DynamicConfig {
  int init_iter = 50;
  int max_switch = 6;
  int min_rate_window = 10;
};

struct SvdConfig {
  int k = 1;
  SvdTarget which = SvdTarget::smallest;
  double tol = 1e-10;
  Stage2Method stage2 = Stage2Method::jdqmr;
  int block_size = 1;
  int max_basis = 35;
  int min_restart = 21;
  int k_prev = 1;
  int max_inner = -1;
  long max_matvecs = 10'000'000;
  std::uint64_t seed = 0;
  bool run_stage2 = true;
  bool dynamic = false;
  DynamicConfig dynamic_config;

  // Right singular vector guesses (length n). Empty: ones(n) normalized for
  // the first target, random vectors for the rest.
  std::vector<Vector> initial_guesses;
  bool random_guess = false;

  // Preconditioners for the two stages, in the orientation of the matrix as
  // given. Null entries mean no preconditioning.
  std::shared_ptr<const Preconditioner> precond_c;
  std::shared_ptr<const Preconditioner> precond_b;
  // Shift-invert mode: the solver factors A (qr_of_A, smallest singular
  // values) or B - shift I (lu_of_B, singular values nearest the shift) and
  // runs GD+k on the inverse without a second stage.
  std::optional<ShiftInvertMode> shift_invert;
  double shift_invert_shift = 0.0;

  std::function<void(Stage, const IterationSnapshot&)> observer;
};

struct StageInfo {
  Stage stage = Stage::C;
  long matvecs = 0;
  long iterations = 0;
  SolveStatus status = SolveStatus::converged;
};

struct SvdResult {
  std::vector<SingularTriplet> triplets;  // ordered per the target
  SolveStatus status = SolveStatus::converged;
  long matvecs = 0;
  double norm_estimate = 0.0;
  ConvergenceHistory history;
  std::vector<StageInfo> stages;
  bool transposed = false;  // A was replaced by A^T internally
  int num_requested = 0;

  bool fully_converged() const;
};

// Problem data in the orientation used internally: rows >= cols.
struct SvdProblem {
  std::shared_ptr<const SparseMatrix> a;  // possibly A^T of the input
  bool transposed = false;
  std::shared_ptr<MatvecCounter> counter;
  LinearOperator c;
  LinearOperator b;
  std::shared_ptr<const Preconditioner> precond_c;
  std::shared_ptr<const Preconditioner> precond_b;

  Index rows() const { return a->rows(); }
  Index cols() const { return a->cols(); }
};

SvdProblem make_problem(std::shared_ptr<const SparseMatrix> a, const SvdConfig& cfg);

struct Stage1Result {
  std::vector<SingularTriplet> triplets;   // found pairs, then unconverged approximations
  std::vector<bool> fully_converged;       // per found pair: user tolerance reachable in stage one
  EigResult eig;
  double norm_estimate = 0.0;
};

// Dynamic tolerance max(tol * sigma / sigma_max, eps) of the first stage, and
// whether the user tolerance is reachable there (tol * sigma / sigma_max >= eps).
double normal_tolerance(double tol, double sigma, double sigma_max);
bool stage1_reaches_tolerance(double tol, double sigma, double sigma_max);

// GD+k on C = A^T A with the dynamic tolerance max(tol * sigma_i / sigma_max, eps).
Stage1Result stage1_normal(const SvdProblem& p, const SvdConfig& cfg,
                           const std::vector<Vector>& guesses, long max_matvecs,
                           long max_iterations = -1,
                           const std::vector<LockedPair>& preset = {});

// Rayleigh-Ritz of A on span(V): SVD of A V gives sigma, u = A v / sigma and
// refreshed residuals. Costs one matvec per column plus the residual audit.
std::vector<SingularTriplet> post_rayleigh_ritz(const SvdProblem& p, const Matrix& v,
                                                double norm_estimate, double tol);

struct Stage2Inputs {
  std::vector<Vector> guesses;        // [v; u] / sqrt(2) for each unconverged target
  std::vector<double> shifts;         // strictly positive
  std::vector<LockedPair> preset;     // converged targets and their mirrors
  std::vector<int> target_of_guess;   // index into the stage-one triplet list
};

Stage2Inputs build_stage2_inputs(const SvdProblem& p, const std::vector<SingularTriplet>& triplets,
                                 const std::vector<bool>& converged, double norm_estimate,
                                 std::uint64_t seed);

struct Stage2Result {
  std::vector<SingularTriplet> triplets;
  EigResult eig;
  double norm_estimate = 0.0;
};

// Refined GD+k or JDQMR on B targeting the given shifts.
Stage2Result stage2_augmented(const SvdProblem& p, const SvdConfig& cfg, const Stage2Inputs& in,
                              double norm_estimate, long max_matvecs,
                              long max_iterations = -1);

// Largest eigenvalue of C by a short Lanczos run, as an estimate of ||A||.
double estimate_norm(const SvdProblem& p, int steps = 20);

// Splits a unit eigenvector of B into a singular triplet in the problem
// orientation; a negative value flips u.
SingularTriplet triplet_from_augmented(const SvdProblem& p, double value, const Vector& x,
                                       std::mt19937_64& rng);

// Orients a triplet back to the input matrix (swaps u and v if transposed).
SingularTriplet to_input_orientation(const SvdProblem& p, SingularTriplet t);

// Initial right-vector guesses in the problem orientation.
std::vector<Vector> initial_guesses(const SvdProblem& p, const SvdConfig& cfg);

// Orders triplets per the target, maps them to the input orientation and
// sets the overall status.
SvdResult finalize_result(const SvdProblem& p, const SvdConfig& cfg,
                          std::vector<SingularTriplet> triplets, SolveStatus status,
                          ConvergenceHistory history, std::vector<StageInfo> stages,
                          double norm_estimate);

// Rayleigh-Ritz post-processing of the stage-one vectors v followed, when
// the user tolerance is not met yet, by stage two within `remaining` matvecs.
SvdResult finish_from_normal(const SvdProblem& p, const SvdConfig& cfg, const Matrix& v,
                             double norm_estimate, SolveStatus status, ConvergenceHistory history,
                             std::vector<StageInfo> stages, long remaining);

SvdResult phsvds_solve(std::shared_ptr<const SparseMatrix> a, const SvdConfig& cfg);

}  // namespace phsvds
