#include "phsvds/sparse_matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace phsvds {

namespace {

std::atomic<std::uint64_t> g_spmv_calls{0};
std::atomic<std::uint64_t> g_spmv_t_calls{0};

}  // namespace

namespace instrumentation {

std::uint64_t spmv_calls() { return g_spmv_calls.load(); }
std::uint64_t spmv_t_calls() { return g_spmv_t_calls.load(); }
void reset_counters() {
  g_spmv_calls = 0;
  g_spmv_t_calls = 0;
}

}  // namespace instrumentation

SparseMatrix::SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (nrows_ < 0 || ncols_ < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
  if (static_cast<Index>(row_offsets_.size()) != nrows_ + 1)
    throw std::invalid_argument("SparseMatrix: row_offsets must have nrows+1 entries");
  if (row_offsets_.front() != 0) throw std::invalid_argument("SparseMatrix: row_offsets[0] != 0");
  if (col_indices_.size() != values_.size() ||
      row_offsets_.back() != static_cast<Index>(values_.size()))
    throw std::invalid_argument("SparseMatrix: inconsistent storage lengths");
  for (Index i = 0; i < nrows_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i])
      throw std::invalid_argument("SparseMatrix: row_offsets not non-decreasing");
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const Index c = col_indices_[p];
      if (c < 0 || c >= ncols_)
        throw std::invalid_argument("SparseMatrix: column index out of range in row " +
                                    std::to_string(i));
      if (p > row_offsets_[i] && col_indices_[p - 1] >= c)
        throw std::invalid_argument("SparseMatrix: column indices not increasing in row " +
                                    std::to_string(i));
      if (values_[p] == 0.0)
        throw std::invalid_argument("SparseMatrix: explicit zero stored in row " +
                                    std::to_string(i));
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index nrows, Index ncols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
      throw std::invalid_argument("SparseMatrix::from_triplets: index out of bounds");
  }
  // Stable sort keeps duplicate summation in input order.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Index> offsets(nrows + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());

  std::size_t k = 0;
  for (Index i = 0; i < nrows; ++i) {
    while (k < triplets.size() && triplets[k].row == i) {
      const Index c = triplets[k].col;
      double sum = 0.0;
      while (k < triplets.size() && triplets[k].row == i && triplets[k].col == c) {
        sum += triplets[k].value;
        ++k;
      }
      if (sum != 0.0) {
        cols.push_back(c);
        vals.push_back(sum);
      }
    }
    offsets[i + 1] = static_cast<Index>(vals.size());
  }
  return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
  return from_triplets(dense.rows(), dense.cols(), std::move(t));
}

SparseMatrix SparseMatrix::diagonal(const Vector& diag) {
  std::vector<Triplet> t;
  t.reserve(diag.size());
  for (Index i = 0; i < diag.size(); ++i) t.push_back({i, i, diag(i)});
  return from_triplets(diag.size(), diag.size(), std::move(t));
}

SparseMatrix SparseMatrix::identity(Index n) { return diagonal(Vector::Ones(n)); }

double SparseMatrix::coeff(Index i, Index j) const {
  const auto first = col_indices_.begin() + row_offsets_[i];
  const auto last = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Index> offsets(ncols_ + 1, 0);
  for (Index c : col_indices_) ++offsets[c + 1];
  for (Index j = 0; j < ncols_; ++j) offsets[j + 1] += offsets[j];
  std::vector<Index> cols(values_.size());
  std::vector<double> vals(values_.size());
  std::vector<Index> next(offsets.begin(), offsets.end() - 1);
  for (Index i = 0; i < nrows_; ++i) {
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      const Index dst = next[col_indices_[p]]++;
      cols[dst] = i;
      vals[dst] = values_[p];
    }
  }
  return SparseMatrix(ncols_, nrows_, std::move(offsets), std::move(cols), std::move(vals));
}

Matrix SparseMatrix::to_dense() const {
  Matrix d = Matrix::Zero(nrows_, ncols_);
  for (Index i = 0; i < nrows_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) d(i, col_indices_[p]) = values_[p];
  return d;
}

Vector SparseMatrix::diagonal_entries() const {
  const Index n = std::min(nrows_, ncols_);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = coeff(i, i);
  return d;
}

Vector SparseMatrix::column_norms_squared() const {
  Vector s = Vector::Zero(ncols_);
  for (std::size_t p = 0; p < values_.size(); ++p) s(col_indices_[p]) += values_[p] * values_[p];
  return s;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  return a.nrows_ == b.nrows_ && a.ncols_ == b.ncols_ && a.row_offsets_ == b.row_offsets_ &&
         a.col_indices_ == b.col_indices_ && a.values_ == b.values_;
}

Vector spmv(const SparseMatrix& a, const Vector& x) {
  if (x.size() != a.cols()) throw std::invalid_argument("spmv: dimension mismatch");
  ++g_spmv_calls;
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  Vector y(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Index p = off[i]; p < off[i + 1]; ++p) s += val[p] * x(col[p]);
    y(i) = s;
  }
  return y;
}

Vector spmv_t(const SparseMatrix& a, const Vector& x) {
  if (x.size() != a.rows()) throw std::invalid_argument("spmv_t: dimension mismatch");
  ++g_spmv_t_calls;
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  Vector y = Vector::Zero(a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const double xi = x(i);
    for (Index p = off[i]; p < off[i + 1]; ++p) y(col[p]) += val[p] * xi;
  }
  return y;
}

}  // namespace phsvds
