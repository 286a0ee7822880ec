#pragma once

#include <functional>
#include <memory>
#include <string>

#include "phsvds/types.hpp"

namespace phsvds {

// Shared tally of sparse products with A or A^T. One product with A plus one
// with A^T counts as a single matvec.
struct MatvecCounter {
  long products = 0;
  long matvecs() const { return (products + 1) / 2; }
};

class LinearOperator {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  LinearOperator() = default;
  LinearOperator(Index dim_in, Index dim_out, ApplyFn apply, bool symmetric,
                 int matvec_cost = 0, std::shared_ptr<MatvecCounter> counter = nullptr)
      : dim_in_(dim_in),
        dim_out_(dim_out),
        apply_(std::move(apply)),
        symmetric_(symmetric),
        matvec_cost_(matvec_cost),
        counter_(std::move(counter)) {}

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  bool is_symmetric() const { return symmetric_; }
  // Sparse products charged per apply.
  int matvec_cost() const { return matvec_cost_; }
  explicit operator bool() const { return static_cast<bool>(apply_); }

  const std::shared_ptr<MatvecCounter>& counter() const { return counter_; }
  void set_counter(std::shared_ptr<MatvecCounter> counter) { counter_ = std::move(counter); }
  long matvecs() const { return counter_ ? counter_->matvecs() : 0; }

  Vector apply(const Vector& x) const;
  Vector operator*(const Vector& x) const { return apply(x); }

  // Spectral transformation bookkeeping: how eigenvalues of this operator map
  // back to singular values of the underlying matrix.
  enum class SpectralMap { none, inverse_square_root, inverse_plus_shift };
  SpectralMap spectral_map() const { return map_; }
  double shift() const { return shift_; }
  void set_spectral_map(SpectralMap map, double shift = 0.0) {
    map_ = map;
    shift_ = shift;
  }

 private:
  Index dim_in_ = 0;
  Index dim_out_ = 0;
  ApplyFn apply_;
  bool symmetric_ = false;
  int matvec_cost_ = 0;
  std::shared_ptr<MatvecCounter> counter_;
  SpectralMap map_ = SpectralMap::none;
  double shift_ = 0.0;
};

LinearOperator identity_operator(Index n);

enum class PrecondTarget { for_C, for_B };

struct Preconditioner {
  LinearOperator op;
  PrecondTarget target = PrecondTarget::for_C;
  std::string description;

  Vector apply(const Vector& x) const { return op.apply(x); }
  Index dim() const { return op.dim_in(); }
};

}  // namespace phsvds
