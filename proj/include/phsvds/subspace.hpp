#pragma once

#include <optional>
#include <random>
#include <vector>

#include "phsvds/dense.hpp"
#include "phsvds/linear_operator.hpp"

namespace phsvds {

enum class Which { smallest_algebraic, largest_algebraic, closest_to_shifts };
enum class Extraction { rayleigh_ritz, refined };

struct LockedPair {
  double value = 0.0;
  Vector vector;
  double residual_norm = 0.0;
  int target = 0;
};

// Working set of the Davidson iteration: orthonormal basis V, its image
// W = Op V, the projection H = V^T W and, in refined mode, the thin QR
// factors of W - shift V. Deflated directions (locked vectors and anything
// registered alongside them) are kept in `deflation`; V stays orthogonal to
// them.
struct SubspaceState {
  Matrix v;
  Matrix w;
  Matrix h;
  Matrix q;
  Matrix r;
  bool refined = false;
  bool qr_full = true;
  double target_shift = 0.0;
  Matrix deflation;
  std::vector<LockedPair> locked;

  SubspaceState() = default;
  SubspaceState(Index dim, bool refined_mode, double shift);

  Index dim() const { return v.rows(); }
  Index size() const { return v.cols(); }

  // Appends a unit vector orthogonal to the current basis and deflation
  // space together with its image under the operator.
  void append(const Vector& unit, const Vector& image);
  // Replaces the basis by V c (c has orthonormal columns).
  void compress(const Matrix& c);
  void refactor_qr();
  void add_deflation(const Vector& x);

  // Orthogonalizes x against deflation and basis (classical Gram-Schmidt,
  // repeated while the norm drops below 1/sqrt(2)). Returns the norm of the
  // remainder relative to the original norm; x is left unnormalized.
  double orthogonalize(Vector& x) const;

  double orthogonality_error() const;    // max |V^T V - I|
  double projection_error() const;       // max |H - V^T W|
  double qr_error() const;               // max |Q R - (W - shift V)|
};

struct RitzPairs {
  Vector values;   // ordered per the requested criterion
  Matrix coeffs;   // coefficient vectors in the basis V, same order
};

// Rayleigh-Ritz on H, ordered ascending, descending, or by distance to the
// shift (ties resolved toward the smaller value).
RitzPairs rayleigh_ritz_extract(const SubspaceState& s, Which which, double shift = 0.0);

struct RefinedPairs {
  Matrix coeffs;        // right singular vectors of R, ascending singular values
  Vector singular_values;
  double value = 0.0;   // Rayleigh quotient of the first refined vector
};

// Refined extraction for the current target shift. The residual
// ||(W - shift V) y|| of coefficient vector y equals ||R y||.
RefinedPairs refined_extract(const SubspaceState& s);

// Locks the pair whose coefficient vector (in the basis V, unit norm) is
// `coeffs`, removes that direction from V and, when given, inserts the next
// guess after orthogonalizing it. The refined QR is flagged for a full
// re-factorization. Returns false if the guess was numerically dependent.
bool lock_and_reintroduce(SubspaceState& s, const LockedPair& pair, const Vector& coeffs,
                          const std::optional<Vector>& next_guess, const LinearOperator& op,
                          std::optional<double> next_shift = std::nullopt);

// Gaussian random unit vector.
Vector random_unit_vector(Index n, std::mt19937_64& rng);

}  // namespace phsvds
