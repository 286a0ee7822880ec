#include "phsvds/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/QR>

namespace phsvds {

std::vector<double> table1_spectrum() {
  std::vector<double> s{1e-14, 1e-12};
  for (int i = 1; i <= 4; ++i) s.push_back(1e-8 * i);
  for (int i = 1; i <= 1000; ++i) s.push_back(1e-3 * i);
  return s;
}

std::vector<double> fig3_spectrum() {
  std::vector<double> s;
  for (int i = 1; i <= 10; ++i) s.push_back(i);
  for (int v = 1000; v <= 1000000; v += 100) s.push_back(v);
  return s;
}

std::vector<double> log_spaced_spectrum(Index n, double condition, double norm) {
  if (n < 1 || !(condition >= 1.0) || !(norm > 0.0))
    throw std::invalid_argument("log_spaced_spectrum: bad arguments");
  std::vector<double> s(static_cast<std::size_t>(n));
  const double lo = std::log10(norm / condition);
  const double hi = std::log10(norm);
  for (Index i = 0; i < n; ++i) {
    const double t = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s[static_cast<std::size_t>(i)] = std::pow(10.0, lo + t * (hi - lo));
  }
  s.front() = norm / condition;
  s.back() = norm;
  return s;
}

SparseMatrix diagonal_matrix(const std::vector<double>& values) {
  return SparseMatrix::diagonal(Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
}

SparseMatrix perturbed_diagonal(const std::vector<double>& values, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(values);
  for (auto& x : d) x += u(rng) * scale;
  return diagonal_matrix(d);
}

namespace {

Matrix haar_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

SparseMatrix random_orthogonal_with_spectrum(const std::vector<double>& sigma, std::uint64_t seed) {
  const Index n = static_cast<Index>(sigma.size());
  std::mt19937_64 rng(seed);
  const Matrix u = haar_orthogonal(n, rng);
  const Matrix v = haar_orthogonal(n, rng);
  const Vector s = Eigen::Map<const Vector>(sigma.data(), n);
  return SparseMatrix::from_dense(u * s.asDiagonal() * v.transpose());
}

SparseMatrix random_sparse(Index m, Index n, double density, std::uint64_t seed) {
  if (m < 1 || n < 1 || density < 0.0 || density > 1.0)
    throw std::invalid_argument("random_sparse: bad arguments");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<Index> row(0, m - 1), col(0, n - 1);
  std::vector<Triplet> t;
  std::vector<bool> row_hit(static_cast<std::size_t>(m)), col_hit(static_cast<std::size_t>(n));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (u(rng) < density) {
        t.push_back({i, j, g(rng)});
        row_hit[static_cast<std::size_t>(i)] = col_hit[static_cast<std::size_t>(j)] = true;
      }
  if (density > 0.0) {
    for (Index i = 0; i < m; ++i)
      if (!row_hit[static_cast<std::size_t>(i)]) t.push_back({i, col(rng), g(rng)});
    for (Index j = 0; j < n; ++j)
      if (!col_hit[static_cast<std::size_t>(j)]) t.push_back({row(rng), j, g(rng)});
  }
  return SparseMatrix::from_triplets(m, n, t);
}

}  // namespace phsvds
