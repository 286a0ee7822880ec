#pragma once

#include <string>

#include "phsvds/linear_operator.hpp"

namespace phsvds {

struct InnerConfig {
  int max_inner = -1;          // -1: min(dim, 1000); 0: projected preconditioner only
  int outer_iteration = 0;     // outer iterations spent on the current target
  double stagnation_ratio = 0.99;
  int stagnation_steps = 3;
  double min_relative_tol = 1e-14;
};

struct InnerResult {
  Vector t;
  int iterations = 0;
  double residual_ratio = 0.0;      // final ||linear residual|| / ||r||
  double eigen_residual = 0.0;      // estimated eigenresidual of u + t
  std::string stop_reason;
};

// Approximately solves the Jacobi-Davidson correction equation
//   (I - QQ^T)(Op - theta I)(I - QQ^T) t = -r,  t orthogonal to Q,
// with Q = [deflation, u], by symmetric QMR preconditioned with the
// skew projection of prec. deflation may have zero columns.
InnerResult jd_correction_solve(const LinearOperator& op, const Preconditioner* prec,
                                const Vector& u, double theta, const Vector& r,
                                const Matrix& deflation, const InnerConfig& cfg);

}  // namespace phsvds
