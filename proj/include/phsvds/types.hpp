#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace phsvds {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// Unit roundoff used by every tolerance in the library.
inline constexpr double kMachineEpsilon = 2.22e-16;

}  // namespace phsvds
