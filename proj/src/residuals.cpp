#include "phsvds/residuals.hpp"

#include <cmath>

namespace phsvds {

std::string to_string(TripletFlag f) {
  switch (f) {
    case TripletFlag::converged: return "converged";
    case TripletFlag::floor_converged: return "floor_converged";
    case TripletFlag::unconverged: return "unconverged";
    case TripletFlag::zero_singular_value: return "zero_singular_value";
  }
  return "unknown";
}

double SingularTriplet::residual_norm() const { return std::hypot(r_u, r_v); }

double ResidualBundle::combined() const { return std::hypot(r_u, r_v); }

ResidualBundle residual_bundle(const SparseMatrix& a, double sigma, const Vector& u,
                               const Vector& v, MatvecCounter* counter) {
  const Vector av = spmv(a, v);
  const Vector atu = spmv_t(a, u);
  const Vector rv = av - sigma * u;
  const Vector ru = atu - sigma * v;
  const Vector ata_v = spmv_t(a, av);
  if (counter) counter->products += 3;
  ResidualBundle b;
  b.r_v = rv.norm();
  b.r_u = ru.norm();
  b.r_c = (ata_v - sigma * sigma * v).norm();
  const double xnorm = std::sqrt(u.squaredNorm() + v.squaredNorm());
  b.r_b = xnorm > 0.0 ? std::hypot(b.r_u, b.r_v) / xnorm : 0.0;
  return b;
}

double normal_residual_from_parts(const SparseMatrix& a, double sigma, const Vector& u,
                                  const Vector& v, MatvecCounter* counter) {
  const Vector rv = spmv(a, v) - sigma * u;
  const Vector ru = spmv_t(a, u) - sigma * v;
  const Vector at_rv = spmv_t(a, rv);
  if (counter) counter->products += 3;
  return (sigma * ru + at_rv).norm();
}

bool convergence_test(const ResidualBundle& b, double norm_a, double tol) {
  return b.combined() < norm_a * tol;
}

}  // namespace phsvds
