#pragma once

#include "phsvds/phsvds.hpp"

namespace phsvds {

// Alternates short GD+k runs on C and B, compares their convergence rates
// and commits to the faster approach once enough evidence is in.
SvdResult dynamic_switch_solve(const SvdProblem& p, const SvdConfig& cfg);

// Geometric mean of successive residual ratios over the last `window`
// entries of a residual sequence.
double convergence_rate(const std::vector<double>& residuals, int window);

}  // namespace phsvds
