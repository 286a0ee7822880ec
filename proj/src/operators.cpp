#include "phsvds/operators.hpp"

namespace phsvds {

Vector LinearOperator::apply(const Vector& x) const {
  if (x.size() != dim_in_) throw std::invalid_argument("LinearOperator: dimension mismatch");
  if (counter_) counter_->products += matvec_cost_;
  return apply_(x);
}

LinearOperator identity_operator(Index n) {
  return LinearOperator(n, n, [](const Vector& x) { return x; }, true);
}

LinearOperator normal_operator(std::shared_ptr<const SparseMatrix> a,
                               std::shared_ptr<MatvecCounter> counter) {
  if (a->rows() >= a->cols()) {
    const Index n = a->cols();
    return LinearOperator(
        n, n, [a](const Vector& x) { return spmv_t(*a, spmv(*a, x)); }, true, 2, std::move(counter));
  }
  const Index m = a->rows();
  return LinearOperator(
      m, m, [a](const Vector& x) { return spmv(*a, spmv_t(*a, x)); }, true, 2, std::move(counter));
}

LinearOperator augmented_operator(std::shared_ptr<const SparseMatrix> a,
                                  std::shared_ptr<MatvecCounter> counter) {
  const Index m = a->rows();
  const Index n = a->cols();
  return LinearOperator(
      m + n, m + n,
      [a, m, n](const Vector& x) {
        Vector y(m + n);
        y.head(n) = spmv_t(*a, x.tail(m));
        y.tail(m) = spmv(*a, x.head(n));
        return y;
      },
      true, 2, std::move(counter));
}

Preconditioner precond_for_C_from_M(const LinearOperator& m_inv, const LinearOperator& m_inv_t) {
  if (m_inv.dim_in() != m_inv.dim_out() || m_inv_t.dim_in() != m_inv.dim_in() ||
      m_inv_t.dim_out() != m_inv.dim_in())
    throw std::invalid_argument("precond_for_C_from_M: dimension mismatch");
  const Index n = m_inv.dim_in();
  LinearOperator op(
      n, n, [m_inv, m_inv_t](const Vector& x) { return m_inv.apply(m_inv_t.apply(x)); }, true);
  return {std::move(op), PrecondTarget::for_C, "M^-1 M^-T"};
}

Preconditioner precond_for_B_from_M(const LinearOperator& m_inv, const LinearOperator& m_inv_t) {
  if (m_inv.dim_in() != m_inv.dim_out() || m_inv_t.dim_in() != m_inv.dim_in() ||
      m_inv_t.dim_out() != m_inv.dim_in())
    throw std::invalid_argument("precond_for_B_from_M: dimension mismatch");
  const Index n = m_inv.dim_in();
  LinearOperator op(
      2 * n, 2 * n,
      [m_inv, m_inv_t, n](const Vector& x) {
        Vector y(2 * n);
        y.head(n) = m_inv.apply(x.tail(n));
        y.tail(n) = m_inv_t.apply(x.head(n));
        return y;
      },
      true);
  return {std::move(op), PrecondTarget::for_B, "[0 M^-1; M^-T 0]"};
}

Preconditioner precond_for_B_from_C_approx(const LinearOperator& m_c,
                                           std::shared_ptr<const SparseMatrix> a) {
  const Index m = a->rows();
  const Index n = a->cols();
  if (m_c.dim_in() != n || m_c.dim_out() != n)
    throw std::invalid_argument("precond_for_B_from_C_approx: dimension mismatch");
  LinearOperator op(
      m + n, m + n,
      [m_c, a, m, n](const Vector& x) {
        Vector y(m + n);
        y.head(n) = m_c.apply(spmv_t(*a, x.tail(m)));
        y.tail(m) = spmv(*a, m_c.apply(x.head(n)));
        return y;
      },
      true);
  return {std::move(op), PrecondTarget::for_B, "[0 A M_C; M_C A^T 0]"};
}

PreconditionerPair jacobi_preconditioners(std::shared_ptr<const SparseMatrix> a) {
  if (a->rows() == a->cols()) {
    const Vector d = a->diagonal_entries();
    if ((d.array() != 0.0).all()) {
      const Vector dinv = d.cwiseInverse();
      const Index n = d.size();
      LinearOperator m_inv(n, n, [dinv](const Vector& x) { return Vector(x.cwiseProduct(dinv)); }, true);
      PreconditionerPair out{precond_for_C_from_M(m_inv, m_inv), precond_for_B_from_M(m_inv, m_inv)};
      out.for_c.description = "jacobi diag(A)^-2";
      out.for_b.description = "jacobi [0 diag(A)^-1; diag(A)^-1 0]";
      return out;
    }
  }
  // Rectangular or zero diagonal: precondition C with diag(A^T A)^{-1}.
  const bool tall = a->rows() >= a->cols();
  const Vector norms = tall ? a->column_norms_squared() : a->transpose().column_norms_squared();
  Vector inv = norms;
  for (Index i = 0; i < inv.size(); ++i) inv(i) = norms(i) > 0.0 ? 1.0 / norms(i) : 1.0;
  const Index n = inv.size();
  LinearOperator m_c(n, n, [inv](const Vector& x) { return Vector(x.cwiseProduct(inv)); }, true);
  PreconditionerPair out;
  out.for_c = {m_c, PrecondTarget::for_C, "jacobi diag(A^T A)^-1"};
  if (tall) {
    out.for_b = precond_for_B_from_C_approx(m_c, a);
  } else {
    // Orientation of B follows A itself; derive from the column norms of A.
    const Vector col = a->column_norms_squared();
    Vector cinv = col;
    for (Index i = 0; i < cinv.size(); ++i) cinv(i) = col(i) > 0.0 ? 1.0 / col(i) : 1.0;
    LinearOperator m_c2(cinv.size(), cinv.size(),
                        [cinv](const Vector& x) { return Vector(x.cwiseProduct(cinv)); }, true);
    out.for_b = precond_for_B_from_C_approx(m_c2, a);
  }
  out.for_b.description = "jacobi [0 A M_C; M_C A^T 0]";
  return out;
}

}  // namespace phsvds
