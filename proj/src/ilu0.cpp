#include <vector>

#include "phsvds/operators.hpp"

namespace phsvds {

Ilu0 ilu0(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ilu0: matrix must be square");
  const Index n = a.rows();
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  std::vector<double> lu = a.values();

  std::vector<Index> diag(n, -1);
  for (Index i = 0; i < n; ++i)
    for (Index p = off[i]; p < off[i + 1]; ++p)
      if (col[p] == i) diag[i] = p;

  std::vector<Index> pos(n, -1);
  for (Index i = 0; i < n; ++i) {
    if (diag[i] < 0) throw ZeroPivotError(i);
    for (Index p = off[i]; p < off[i + 1]; ++p) pos[col[p]] = p;
    for (Index p = off[i]; p < off[i + 1] && col[p] < i; ++p) {
      const Index k = col[p];
      lu[p] /= lu[diag[k]];
      const double lik = lu[p];
      for (Index q = diag[k] + 1; q < off[k + 1]; ++q) {
        const Index target = pos[col[q]];
        if (target >= 0) lu[target] -= lik * lu[q];
      }
    }
    for (Index p = off[i]; p < off[i + 1]; ++p) pos[col[p]] = -1;
    if (lu[diag[i]] == 0.0) throw ZeroPivotError(i);
  }

  std::vector<Triplet> lower;
  std::vector<Triplet> upper;
  for (Index i = 0; i < n; ++i) {
    lower.push_back({i, i, 1.0});
    for (Index p = off[i]; p < off[i + 1]; ++p) {
      if (col[p] < i)
        lower.push_back({i, col[p], lu[p]});
      else
        upper.push_back({i, col[p], lu[p]});
    }
  }
  return {SparseMatrix::from_triplets(n, n, std::move(lower)),
          SparseMatrix::from_triplets(n, n, std::move(upper))};
}

Vector Ilu0::solve(const Vector& b) const {
  const Index n = lower.rows();
  Vector y = b;
  {
    const auto& off = lower.row_offsets();
    const auto& col = lower.col_indices();
    const auto& val = lower.values();
    for (Index i = 0; i < n; ++i)
      for (Index p = off[i]; p < off[i + 1] && col[p] < i; ++p) y(i) -= val[p] * y(col[p]);
  }
  const auto& off = upper.row_offsets();
  const auto& col = upper.col_indices();
  const auto& val = upper.values();
  for (Index i = n - 1; i >= 0; --i) {
    // Diagonal is the first stored entry of each U row.
    for (Index p = off[i] + 1; p < off[i + 1]; ++p) y(i) -= val[p] * y(col[p]);
    y(i) /= val[off[i]];
  }
  return y;
}

Vector Ilu0::solve_transpose(const Vector& b) const {
  const Index n = lower.rows();
  Vector y = b;
  {
    const auto& off = upper.row_offsets();
    const auto& col = upper.col_indices();
    const auto& val = upper.values();
    for (Index i = 0; i < n; ++i) {
      y(i) /= val[off[i]];
      for (Index p = off[i] + 1; p < off[i + 1]; ++p) y(col[p]) -= val[p] * y(i);
    }
  }
  const auto& off = lower.row_offsets();
  const auto& col = lower.col_indices();
  const auto& val = lower.values();
  for (Index i = n - 1; i >= 0; --i)
    for (Index p = off[i]; p < off[i + 1] && col[p] < i; ++p) y(col[p]) -= val[p] * y(i);
  return y;
}

LinearOperator Ilu0::inverse_operator() const {
  auto self = std::make_shared<const Ilu0>(*this);
  const Index n = lower.rows();
  return LinearOperator(n, n, [self](const Vector& x) { return self->solve(x); }, false);
}

LinearOperator Ilu0::inverse_transpose_operator() const {
  auto self = std::make_shared<const Ilu0>(*this);
  const Index n = lower.rows();
  return LinearOperator(n, n, [self](const Vector& x) { return self->solve_transpose(x); }, false);
}

PreconditionerPair ilu0_preconditioners(std::shared_ptr<const SparseMatrix> a) {
  const Ilu0 f = ilu0(*a);
  const LinearOperator m_inv = f.inverse_operator();
  const LinearOperator m_inv_t = f.inverse_transpose_operator();
  PreconditionerPair out{precond_for_C_from_M(m_inv, m_inv_t), precond_for_B_from_M(m_inv, m_inv_t)};
  out.for_c.description = "ilu0 M^-1 M^-T";
  out.for_b.description = "ilu0 [0 M^-1; M^-T 0]";
  return out;
}

}  // namespace phsvds
