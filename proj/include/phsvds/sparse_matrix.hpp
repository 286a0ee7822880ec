#pragma once

#include <cstdint>
#include <vector>

#include "phsvds/types.hpp"

namespace phsvds {

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed-row storage. Column indices are strictly increasing within a row
// and no explicit zeros are stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  // Duplicates are summed; entries that end up zero are dropped.
  static SparseMatrix from_triplets(Index nrows, Index ncols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const Matrix& dense);
  static SparseMatrix diagonal(const Vector& diag);
  static SparseMatrix identity(Index n);

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  Index nonzeros() const { return static_cast<Index>(values_.size()); }

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  // Returns 0 when (i, j) is not stored.
  double coeff(Index i, Index j) const;

  SparseMatrix transpose() const;
  Matrix to_dense() const;
  Vector diagonal_entries() const;
  // Squared Euclidean norms of the columns.
  Vector column_norms_squared() const;
  double frobenius_norm() const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

 private:
  void validate() const;

  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

// y = A x.
Vector spmv(const SparseMatrix& a, const Vector& x);
// y = A^T x.
Vector spmv_t(const SparseMatrix& a, const Vector& x);

// Process-wide call counters, used by tests to audit matvec bookkeeping.
namespace instrumentation {
std::uint64_t spmv_calls();
std::uint64_t spmv_t_calls();
void reset_counters();
}  // namespace instrumentation

}  // namespace phsvds
