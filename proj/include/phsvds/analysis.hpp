#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phsvds/history.hpp"
#include "phsvds/types.hpp"

namespace phsvds {

class DegenerateSpectrum : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Gap ratios of the largest singular value on B and on C.
//   gamma_B = (s_n - s_{n-1}) / (s_{n-1} + s_n)
//   gamma_C = (s_n^2 - s_{n-1}^2) / (s_{n-1}^2 - s_1^2)
struct GapRatios {
  double gamma_b = 0.0;
  double gamma_c = 0.0;
  double sqrt_ratio = 0.0;   // sqrt(gamma_C) / sqrt(gamma_B)
  bool faster_on_c = false;  // sqrt_ratio > 2
};
GapRatios gap_ratios_largest(const std::vector<double>& sigma);

// Gap ratio of the smallest singular value on C:
//   gamma = (s_2^2 - s_1^2) / (s_n^2 - s_2^2)
double smallest_gap_ratio(const std::vector<double>& sigma);

// Asymptotic rate bound for any Krylov method on B targeting s_1, in the
// gamma-factored form and through the interval endpoints
// a = s_n + s_1, b = 2 s_1, c = s_2 - s_1, d = s_n - s_1.
struct AugmentedBound {
  double rho = 0.0;
  double rho_interval = 0.0;  // 1 - sqrt(bc / (ad))
  double gamma = 0.0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};
AugmentedBound rate_bound_augmented(const std::vector<double>& sigma);

// First-order rate of Lanczos on C for s_1: q = 1 - 2 sqrt(gamma), valid for
// gamma < 1/4; q_exp = exp(-2 sqrt(gamma)).
struct NormalBound {
  double q = 0.0;
  double q_exp = 0.0;
  double gamma = 0.0;
  bool valid = false;
};
NormalBound rate_bound_normal(const std::vector<double>& sigma);
NormalBound rate_bound_normal_from_gamma(double gamma);

// tau = rho / q; throws when the normal-equations bound is not valid.
double speedup_tau(const std::vector<double>& sigma);

// gamma_m(k) = min_{i <= k} min_{j != i} |s_i - s_j|.
struct GapStatistic {
  double value = 0.0;
  bool multiplicity = false;  // a repeated value within eps made the gap zero
};
GapStatistic spectrum_gaps(const std::vector<double>& sigma, int k);

// Geometric mean of successive residual ratios over the last `window`
// entries; ratios touching an entry flagged as a lock are skipped. A zero
// residual gives rate 0.
double empirical_rate(const ConvergenceHistory& history, int window);
double empirical_rate(const std::vector<double>& residuals, int window);

// Cosines c_i = u^T basis_i and, when eigenvalues are given, the expansion
// term sum_{i>=2} (c_i / c_1)^2 lambda_i.
struct EigvecAngles {
  std::vector<double> cosines;
  std::optional<double> rq_expansion;
};
EigvecAngles eigvec_angles(const Vector& u, const Matrix& basis,
                           const std::vector<double>& eigenvalues = {});

struct Rated {
  std::optional<double> value;
  std::string reason;  // why value is missing
};

struct SpectrumSummary {
  std::vector<double> sigma;  // ascending
  double norm = 0.0;
  double condition = 0.0;
  GapStatistic gap_1, gap_5, gap_10;
  Rated gamma_b, gamma_c, gamma, rho, q, tau;
};

SpectrumSummary summarize_spectrum(std::vector<double> sigma);

}  // namespace phsvds
