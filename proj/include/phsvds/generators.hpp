#pragma once

#include <cstdint>
#include <vector>

#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

// diag([1e-14, 1e-12, 1e-8:1e-8:4e-8, 1e-3:1e-3:1]), n = 1006.
std::vector<double> table1_spectrum();
// diag([1:10, 1000:100:1e6]), n = 10001.
std::vector<double> fig3_spectrum();
// n values log-spaced from norm / condition to norm.
std::vector<double> log_spaced_spectrum(Index n, double condition, double norm);

SparseMatrix diagonal_matrix(const std::vector<double>& values);

// A + diag(uniform(0, 1) * scale): the perturbed diagonal preconditioner
// used with the Fig. 3 matrix.
SparseMatrix perturbed_diagonal(const std::vector<double>& values, double scale, std::uint64_t seed);

// Dense n x n matrix U diag(sigma) V^T with Haar-random orthogonal U, V.
SparseMatrix random_orthogonal_with_spectrum(const std::vector<double>& sigma, std::uint64_t seed);

// m x n matrix with each entry nonzero with probability `density`, values
// standard normal. Empty rows or columns are avoided unless density is 0.
SparseMatrix random_sparse(Index m, Index n, double density, std::uint64_t seed);

}  // namespace phsvds
