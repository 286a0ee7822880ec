#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "phsvds/linear_operator.hpp"
#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

// C = A^T A applied as two sparse products, never formed. When A has fewer
// rows than columns the operator works with A A^T instead so that its
// dimension is min(m, n). Each apply counts as one matvec.
LinearOperator normal_operator(std::shared_ptr<const SparseMatrix> a,
                               std::shared_ptr<MatvecCounter> counter = nullptr);

// B = [0 A^T; A 0] acting on vectors ordered [v; u] (v has length n, u has
// length m). Each apply counts as one matvec.
LinearOperator augmented_operator(std::shared_ptr<const SparseMatrix> a,
                                  std::shared_ptr<MatvecCounter> counter = nullptr);

// M^{-1} M^{-T} for the normal equations, given the actions of M^{-1} and
// M^{-T} for some M ~ A.
Preconditioner precond_for_C_from_M(const LinearOperator& m_inv, const LinearOperator& m_inv_t);
// [0 M^{-1}; M^{-T} 0] for the augmented matrix, in [v; u] ordering.
Preconditioner precond_for_B_from_M(const LinearOperator& m_inv, const LinearOperator& m_inv_t);
// [0 A M_C; M_C A^T 0] from an approximation M_C of C^{-1}.
Preconditioner precond_for_B_from_C_approx(const LinearOperator& m_c,
                                           std::shared_ptr<const SparseMatrix> a);

// Diagonal (Jacobi) preconditioners for both stages. Square matrices with a
// full nonzero diagonal use M = diag(A); otherwise C is preconditioned by the
// inverse column norms and B is derived from it.
struct PreconditionerPair {
  Preconditioner for_c;
  Preconditioner for_b;
};
PreconditionerPair jacobi_preconditioners(std::shared_ptr<const SparseMatrix> a);

class ZeroPivotError : public std::runtime_error {
 public:
  explicit ZeroPivotError(Index row)
      : std::runtime_error("ilu0: zero pivot in row " + std::to_string(row)), row_(row) {}
  Index row() const { return row_; }

 private:
  Index row_;
};

// Incomplete LU with zero fill on the sparsity pattern of A. L is unit lower
// triangular (diagonal stored), U is upper triangular.
struct Ilu0 {
  SparseMatrix lower;
  SparseMatrix upper;

  Vector solve(const Vector& b) const;            // (LU)^{-1} b
  Vector solve_transpose(const Vector& b) const;  // (LU)^{-T} b
  LinearOperator inverse_operator() const;
  LinearOperator inverse_transpose_operator() const;
};

Ilu0 ilu0(const SparseMatrix& a);

PreconditionerPair ilu0_preconditioners(std::shared_ptr<const SparseMatrix> a);

enum class ShiftInvertMode { qr_of_A, lu_of_B };

inline constexpr Index kDenseShiftInvertLimit = 5000;

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense factorization based inverse operators for desk-scale problems.
// qr_of_A applies (A^T A)^{-1} (the normal-equations orientation follows
// normal_operator); lu_of_B applies (B - shift I)^{-1}. The returned operator
// carries the map from its eigenvalues back to singular values.
LinearOperator shift_invert_operator(std::shared_ptr<const SparseMatrix> a, ShiftInvertMode mode,
                                     double shift, std::shared_ptr<MatvecCounter> counter = nullptr,
                                     Index dense_limit = kDenseShiftInvertLimit);

// Maps an eigenvalue of a shift-invert operator back to a singular value.
double singular_value_from_spectral(const LinearOperator& op, double lambda);

}  // namespace phsvds
