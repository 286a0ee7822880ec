#include "phsvds/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phsvds {

namespace {

void check_sorted(const std::vector<double>& s, std::size_t min_size) {
  if (s.size() < min_size)
    throw std::invalid_argument("analysis: need at least " + std::to_string(min_size) + " values");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0)) throw std::invalid_argument("analysis: singular values must be nonnegative");
    if (i > 0 && s[i] < s[i - 1]) throw std::invalid_argument("analysis: values must be ascending");
  }
}

double sq(double x) { return x * x; }

}  // namespace

GapRatios gap_ratios_largest(const std::vector<double>& s) {
  check_sorted(s, 3);
  const std::size_t n = s.size();
  const double sn = s[n - 1], sm = s[n - 2], s1 = s[0];
  if (sm == s1) throw DegenerateSpectrum("gap_ratios_largest: s_{n-1} equals s_1");
  GapRatios g;
  g.gamma_b = (sn - sm) / (sm + sn);
  // Factored forms keep precision when s_{n-1} approaches s_n.
  g.gamma_c = (sn - sm) * (sn + sm) / ((sm - s1) * (sm + s1));
  g.sqrt_ratio = g.gamma_b > 0.0 ? std::sqrt(g.gamma_c / g.gamma_b)
                                 : std::sqrt((sn + sm) * (sn + sm) / ((sm - s1) * (sm + s1)));
  g.faster_on_c = g.sqrt_ratio > 2.0;
  return g;
}

double smallest_gap_ratio(const std::vector<double>& s) {
  check_sorted(s, 3);
  const double s1 = s[0], s2 = s[1], sn = s.back();
  if (sn == s2) return std::numeric_limits<double>::infinity();
  return (s2 - s1) * (s2 + s1) / ((sn - s2) * (sn + s2));
}

AugmentedBound rate_bound_augmented(const std::vector<double>& s) {
  check_sorted(s, 3);
  const double s1 = s[0], s2 = s[1], sn = s.back();
  if (s1 == 0.0) throw DegenerateSpectrum("rate_bound_augmented: s_1 is zero");
  if (!(s2 > s1)) throw DegenerateSpectrum("rate_bound_augmented: s_2 must exceed s_1");
  AugmentedBound r;
  r.a = sn + s1;
  r.b = 2.0 * s1;
  r.c = s2 - s1;
  r.d = sn - s1;
  r.rho_interval = 1.0 - std::sqrt(r.b * r.c / (r.a * r.d));
  if (sn == s2) {
    // gamma is infinite but its product with (s_n^2 - s_2^2) is finite.
    r.gamma = std::numeric_limits<double>::infinity();
    r.rho = 1.0 - std::sqrt((s2 - s1) * (s2 + s1) * 2.0 * s1 / ((s2 + s1) * (sn - s1) * (sn + s1)));
    return r;
  }
  r.gamma = smallest_gap_ratio(s);
  const double inner = r.gamma * (2.0 * s1 / (s2 + s1)) * ((sn - s2) * (sn + s2)) /
                       ((sn - s1) * (sn + s1));
  r.rho = 1.0 - std::sqrt(inner);
  return r;
}

NormalBound rate_bound_normal_from_gamma(double gamma) {
  NormalBound r;
  r.gamma = gamma;
  r.valid = gamma >= 0.0 && gamma < 0.25;
  r.q = 1.0 - 2.0 * std::sqrt(gamma);
  r.q_exp = std::exp(-2.0 * std::sqrt(gamma));
  return r;
}

NormalBound rate_bound_normal(const std::vector<double>& s) {
  return rate_bound_normal_from_gamma(smallest_gap_ratio(s));
}

double speedup_tau(const std::vector<double>& s) {
  const NormalBound q = rate_bound_normal(s);
  if (!q.valid) throw DegenerateSpectrum("speedup_tau: gamma >= 1/4, first-order rate not valid");
  return rate_bound_augmented(s).rho / q.q;
}

GapStatistic spectrum_gaps(const std::vector<double>& s, int k) {
  check_sorted(s, 2);
  if (k < 1 || static_cast<std::size_t>(k) > s.size())
    throw std::invalid_argument("spectrum_gaps: need 1 <= k <= n");
  GapStatistic g;
  g.value = std::numeric_limits<double>::infinity();
  const double scale = s.back();
  for (int i = 0; i < k; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    double gi = std::numeric_limits<double>::infinity();
    if (ii > 0) gi = std::min(gi, s[ii] - s[ii - 1]);
    if (ii + 1 < s.size()) gi = std::min(gi, s[ii + 1] - s[ii]);
    if (gi <= kMachineEpsilon * scale) {
      g.multiplicity = true;
      gi = 0.0;
    }
    g.value = std::min(g.value, gi);
  }
  return g;
}

double empirical_rate(const std::vector<double>& r, int window) {
  if (r.size() < 2) throw std::invalid_argument("empirical_rate: need at least two residuals");
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), r.size() - 1);
  double log_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = r.size() - w; i < r.size(); ++i) {
    if (r[i] == 0.0 || r[i - 1] == 0.0) return 0.0;
    log_sum += std::log(r[i] / r[i - 1]);
    ++used;
  }
  return std::exp(log_sum / static_cast<double>(used));
}

double empirical_rate(const ConvergenceHistory& h, int window) {
  const auto& e = h.entries;
  if (e.size() < 2) throw std::invalid_argument("empirical_rate: need at least two entries");
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), e.size() - 1);
  double log_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = e.size() - w; i < e.size(); ++i) {
    if (e[i].locked || e[i - 1].locked) continue;
    if (e[i].residual_norm == 0.0 || e[i - 1].residual_norm == 0.0) return 0.0;
    log_sum += std::log(e[i].residual_norm / e[i - 1].residual_norm);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("empirical_rate: no usable ratios in the window");
  return std::exp(log_sum / static_cast<double>(used));
}

EigvecAngles eigvec_angles(const Vector& u, const Matrix& basis, const std::vector<double>& lambda) {
  if (basis.rows() != u.size()) throw std::invalid_argument("eigvec_angles: dimension mismatch");
  EigvecAngles out;
  const Vector c = basis.transpose() * u;
  out.cosines.assign(c.data(), c.data() + c.size());
  if (!lambda.empty() && c.size() > 0) {
    if (lambda.size() != static_cast<std::size_t>(c.size()))
      throw std::invalid_argument("eigvec_angles: eigenvalue count mismatch");
    double sum = 0.0;
    for (Index i = 1; i < c.size(); ++i) sum += sq(c(i) / c(0)) * lambda[static_cast<std::size_t>(i)];
    out.rq_expansion = sum;
  }
  return out;
}

SpectrumSummary summarize_spectrum(std::vector<double> sigma) {
  std::sort(sigma.begin(), sigma.end());
  SpectrumSummary s;
  s.sigma = sigma;
  if (sigma.empty()) return s;
  s.norm = sigma.back();
  s.condition = sigma.front() > 0.0 ? sigma.back() / sigma.front() : std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(sigma.size());
  if (n >= 2) {
    s.gap_1 = spectrum_gaps(sigma, 1);
    s.gap_5 = spectrum_gaps(sigma, std::min(5, n));
    s.gap_10 = spectrum_gaps(sigma, std::min(10, n));
  }
  auto attempt = [](Rated& out, auto&& fn) {
    try {
      out.value = fn();
    } catch (const std::exception& e) {
      out.value.reset();
      out.reason = e.what();
    }
  };
  attempt(s.gamma_b, [&] { return gap_ratios_largest(sigma).gamma_b; });
  attempt(s.gamma_c, [&] { return gap_ratios_largest(sigma).gamma_c; });
  attempt(s.gamma, [&] { return smallest_gap_ratio(sigma); });
  attempt(s.rho, [&] { return rate_bound_augmented(sigma).rho; });
  attempt(s.q, [&] {
    const auto q = rate_bound_normal(sigma);
    if (!q.valid) throw DegenerateSpectrum("gamma >= 1/4, first-order rate not valid");
    return q.q;
  });
  attempt(s.tau, [&] { return speedup_tau(sigma); });
  return s;
}

}  // namespace phsvds
