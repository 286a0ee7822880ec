#pragma once

#include <memory>
#include <string>
#include <vector>

#include "phsvds/linear_operator.hpp"
#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

enum class LanczosExtraction { smallest, largest, closest_to_shift, smallest_positive };

struct RitzTrace {
  int step = 0;
  double value = 0.0;
  double residual = 0.0;  // ||Op y - value y|| for the targeted Ritz pair
};

struct LanczosResult {
  std::vector<RitzTrace> trace;  // one entry per step
  Matrix basis;                  // Lanczos vectors, one column per step
  Vector alpha;
  Vector beta;                   // beta(j) couples steps j and j+1
  bool breakdown = false;
  Vector ritz_vector;            // targeted Ritz vector at the last step
};

// Lanczos with full reorthogonalization and no restarts. Stops after `steps`
// steps, on breakdown, or once stop(trace_entry) returns true.
LanczosResult lanczos_unrestarted(const LinearOperator& op, const Vector& v1, int steps,
                                  LanczosExtraction extraction, double shift = 0.0,
                                  const std::function<bool(const RitzTrace&)>& stop = {});

struct LbdResult {
  Matrix p;       // right basis, n x k
  Matrix q;       // left basis, m x k
  Vector alpha;   // diagonal of B_k
  Vector beta;    // beta(j) is the superdiagonal entry (j, j+1); beta(k-1) = ||r_k||
  Vector r;       // residual of the second recurrence
  std::vector<RitzTrace> trace;  // value = sigma estimate, residual = ||r_k|| |e_k^T x|
  bool breakdown = false;
  Vector sigma;   // singular values of B_k at the last step, ascending
  Matrix u;       // Ritz left vectors Q_k X
  Matrix v;       // Ritz right vectors P_k Y

  Matrix bidiagonal() const;
};

// Lanczos bidiagonalization A P_k = Q_k B_k, A^T Q_k = P_k B_k^T + r_k e_k^T
// with full reorthogonalization of both bases.
LbdResult lbd_unrestarted(const SparseMatrix& a, const Vector& p1, int steps, bool smallest,
                          MatvecCounter* counter = nullptr,
                          const std::function<bool(const RitzTrace&)>& stop = {});

}  // namespace phsvds

namespace phsvds {

// Residual traces of several eigenmethods for one extreme singular value,
// all measured as a singular-triplet residual relative to norm_a:
//   lanczos-C, gdk-C: ||C v - theta v|| / (sqrt(theta) norm_a)
//   lanczos-B:        sqrt(2) ||B x - theta x|| / norm_a
//   gdk-B:            ||[A^T u - s v; A v - s u]|| / norm_a on the unit halves
//   lbd:              ||A^T u - sigma v|| / norm_a
// Unrestarted runs give the three Lanczos-type methods (Lanczos on B starts
// from [v1; 0]); restarted runs give GD+k on C and on B, the latter from
// [v1; A v1 / ||A v1||] / sqrt(2).
struct MethodTrace {
  std::string method;
  std::vector<RitzTrace> trace;  // value is the singular value estimate
  int steps_to_tol = -1;         // first step at or below tol, -1 if never
};

std::vector<MethodTrace> compare_methods(std::shared_ptr<const SparseMatrix> a, int steps,
                                         bool smallest, bool restarted, double tol,
                                         double norm_a);

}  // namespace phsvds
