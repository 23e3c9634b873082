#pragma once

#include "drokit/problems.hpp"
#include "drokit/sampling.hpp"

namespace drokit::harness::oracles {

/// argmin over { x in simplex : x_i >= lower } of
///   gamma <grad, x> + KL[x || pi] + gamma tau KL[x || prior]
/// for c in {2, 3}, by bisection on the first-order conditions along the
/// edges e_i - e_{c-1} (nested for c = 3). Uses no closed form.
Vector prox_argmin(const Vector& pi, const Vector& prior, const Vector& grad, double gamma, double tau,
                   double lower = 0.0);

/// argmax over the 2-simplex of <losses, x> - tau KL[x || prior]: a
/// 10001-point grid followed by bisection of the derivative inside the best
/// grid cell.
Vector inner_max_grid(const Vector& losses, const Vector& prior, double tau);

/// Expectation of a one-pair estimate over every (group, item) outcome,
/// weighted by the sampling probability of the strategy (1/n, 1/(c n_i),
/// pi_i / n_i). full_batch returns the full-batch estimate itself.
StochasticEstimate exhaustive_expectation(SamplingStrategy strategy, const DroProblem& problem,
                                          const SimplexWeights& pi, const ParameterVector& theta);

/// Moreau prox of Phi for a quadratic problem whose groups all hold the same
/// items (so Phi is the common group loss plus tau_theta/2 |theta|^2):
/// solves (H + (tau_theta + 2L) I) w = A^T b - q + 2L theta, where H is the
/// per-group sum of (c/n) A^T A.
ParameterVector quadratic_moreau_prox(const std::vector<QuadraticItem>& items, double group_scale,
                                      double tau_theta, const ParameterVector& theta, double L);

}  // namespace drokit::harness::oracles
