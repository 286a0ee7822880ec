#pragma once

#include <string>

#include "phsvds/linear_operator.hpp"
#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

enum class TripletFlag { converged, floor_converged, unconverged, zero_singular_value };
std::string to_string(TripletFlag f);

struct SingularTriplet {
  double sigma = 0.0;
  Vector u;  // length m, unit norm
  Vector v;  // length n, unit norm
  double r_u = 0.0;
  double r_v = 0.0;
  TripletFlag flag = TripletFlag::unconverged;

  double residual_norm() const;  // sqrt(r_u^2 + r_v^2)
};

// Residual norms of an approximate triplet:
//   r_v = ||A v - sigma u||, r_u = ||A^T u - sigma v||,
//   r_C = ||A^T A v - sigma^2 v||, r_B = ||B [v; u] - sigma [v; u]|| / ||[v; u]||.
// u and v are used as given (not normalized).
struct ResidualBundle {
  double r_v = 0.0;
  double r_u = 0.0;
  double r_c = 0.0;
  double r_b = 0.0;

  double combined() const;  // sqrt(r_u^2 + r_v^2)
};

// Evaluates the bundle with one product by A and two by A^T. When a counter
// is given it is charged for the three products.
ResidualBundle residual_bundle(const SparseMatrix& a, double sigma, const Vector& u,
                               const Vector& v, MatvecCounter* counter = nullptr);

// Residual of the normal equations rebuilt from r_u and r_v through
//   A^T A v - sigma^2 v = sigma (A^T u - sigma v) + A^T (A v - sigma u).
double normal_residual_from_parts(const SparseMatrix& a, double sigma, const Vector& u,
                                  const Vector& v, MatvecCounter* counter = nullptr);

// The user-level stopping rule sqrt(r_u^2 + r_v^2) < ||A|| tol.
bool convergence_test(const ResidualBundle& b, double norm_a, double tol);

}  // namespace phsvds
