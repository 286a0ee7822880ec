#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>

#include "phsvds/operators.hpp"

namespace phsvds {

LinearOperator shift_invert_operator(std::shared_ptr<const SparseMatrix> a, ShiftInvertMode mode,
                                     double shift, std::shared_ptr<MatvecCounter> counter,
                                     Index dense_limit) {
  const Index m = a->rows();
  const Index n = a->cols();
  if (std::max(m, n) > dense_limit)
    throw std::invalid_argument(
        "shift_invert_operator: matrix exceeds the dense factorization limit; supply a "
        "user-provided inverse operator instead");

  if (mode == ShiftInvertMode::qr_of_A) {
    if (shift != 0.0) throw std::invalid_argument("shift_invert_operator: qr_of_A requires shift 0");
    // Same orientation as normal_operator: factor the tall one of A, A^T.
    const Matrix dense = m >= n ? a->to_dense() : Matrix(a->to_dense().transpose());
    const Index k = dense.cols();
    Eigen::HouseholderQR<Matrix> qr(dense);
    auto r = std::make_shared<Matrix>(qr.matrixQR().topRows(k).triangularView<Eigen::Upper>());
    const double rmax = r->diagonal().cwiseAbs().maxCoeff();
    for (Index i = 0; i < k; ++i)
      if (!(std::abs((*r)(i, i)) > static_cast<double>(k) * kMachineEpsilon * rmax))
        throw FactorizationError("shift_invert_operator: A is rank deficient (zero diagonal in R)");
    LinearOperator op(
        k, k,
        [r](const Vector& x) {
          // (R^T R)^{-1} x
          Vector y = r->transpose().triangularView<Eigen::Lower>().solve(x);
          return Vector(r->triangularView<Eigen::Upper>().solve(y));
        },
        true, 2, std::move(counter));
    op.set_spectral_map(LinearOperator::SpectralMap::inverse_square_root);
    return op;
  }

  Matrix b = Matrix::Zero(m + n, m + n);
  const Matrix dense = a->to_dense();
  b.block(0, n, n, m) = dense.transpose();
  b.block(n, 0, m, n) = dense;
  b.diagonal().array() -= shift;
  const double bnorm = b.cwiseAbs().rowwise().sum().maxCoeff();
  auto lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(b);
  const Matrix& packed = lu->matrixLU();
  for (Index i = 0; i < m + n; ++i)
    if (!(std::abs(packed(i, i)) > static_cast<double>(m + n) * kMachineEpsilon * bnorm))
      throw FactorizationError("shift_invert_operator: B - shift I is singular");
  LinearOperator op(
      m + n, m + n, [lu](const Vector& x) { return Vector(lu->solve(x)); }, true, 2,
      std::move(counter));
  op.set_spectral_map(LinearOperator::SpectralMap::inverse_plus_shift, shift);
  return op;
}

double singular_value_from_spectral(const LinearOperator& op, double lambda) {
  switch (op.spectral_map()) {
    case LinearOperator::SpectralMap::inverse_square_root:
      return lambda > 0.0 ? 1.0 / std::sqrt(lambda) : std::numeric_limits<double>::infinity();
    case LinearOperator::SpectralMap::inverse_plus_shift:
      return 1.0 / lambda + op.shift();
    case LinearOperator::SpectralMap::none:
      break;
  }
  return lambda;
}

}  // namespace phsvds
