#pragma once

#include <string>
#include <vector>

#include "drokit/problems.hpp"
#include "drokit/rng.hpp"
#include "drokit/simplex.hpp"

namespace drokit {

/// How the B (group, item) pairs of a stochastic step are drawn.
///
/// | strategy             | P(i, j)        | theta scale        | loss scale        |
/// |----------------------|----------------|--------------------|-------------------|
/// | uniform_all          | 1 / n          | c pi_i             | c                 |
/// | two_stage            | 1 / (c n_i)    | c^2 n_i / n * pi_i | c^2 n_i / n       |
/// | probability_weighted | pi_i / n_i     | c n_i / n          | c n_i / (n pi_i)  |
/// | full_batch           | every pair once| c pi_i             | c                 |
///
/// full_batch is the enumeration of uniform_all (B = n) and yields the exact
/// gradients.
enum class SamplingStrategy { uniform_all, two_stage, probability_weighted, full_batch };

std::string to_string(SamplingStrategy s);
SamplingStrategy parse_sampling_strategy(const std::string& name);

struct SampledPair {
  ItemAddress address;
  double theta_scale = 0.0;  // multiplies grad f_{i,j}
  double loss_scale = 0.0;   // multiplies f_{i,j} e_i
};

struct SampleBatch {
  std::vector<SampledPair> pairs;
  SamplingStrategy strategy = SamplingStrategy::uniform_all;
};

/// Stochastic estimates of the theta-gradient and of the pi-block of the VI
/// operator. `p` carries the negated group losses.
struct StochasticEstimate {
  Vector g;
  Vector p;
};

/// Scale factors for one address under a strategy.
SampledPair scaled_pair(SamplingStrategy strategy, const DroProblem& problem,
                        const SimplexWeights& pi, ItemAddress at);

/// Draws B pairs (ignored for full_batch). Throws InvalidArgument for B = 0
/// and for probability_weighted when some pi_i is not strictly positive.
SampleBatch draw_batch(SamplingStrategy strategy, const DroProblem& problem,
                       const SimplexWeights& pi, std::size_t batch, Rng& rng);

/// g = (1/B) sum theta_scale grad f, p = -(1/B) sum loss_scale f e_i.
StochasticEstimate estimate_from_batch(const DroProblem& problem, const ParameterVector& theta,
                                       const SampleBatch& batch);

StochasticEstimate sample_estimate(SamplingStrategy strategy, const DroProblem& problem,
                                   const SimplexWeights& pi, const ParameterVector& theta,
                                   std::size_t batch, Rng& rng);

StochasticEstimate sample_uniform_all(const DroProblem& problem, const SimplexWeights& pi,
                                      const ParameterVector& theta, std::size_t batch, Rng& rng);
StochasticEstimate sample_two_stage(const DroProblem& problem, const SimplexWeights& pi,
                                    const ParameterVector& theta, std::size_t batch, Rng& rng);
StochasticEstimate sample_probability_weighted(const DroProblem& problem, const SimplexWeights& pi,
                                               const ParameterVector& theta, std::size_t batch,
                                               Rng& rng);

/// Exact estimate: (grad_theta_full, -group_losses).
StochasticEstimate exact_estimate(const DroProblem& problem, const SimplexWeights& pi,
                                  const ParameterVector& theta);

struct VarianceEstimate {
  double g = 0.0;  // mean |g - grad_theta h|^2
  double p = 0.0;  // mean |p - grad_pi|^2 (VI sign)
};

/// Empirical mean-squared deviation of `trials` independent B-batches from the
/// exact gradients. Throws InvalidArgument when trials < 2.
VarianceEstimate estimate_variance(SamplingStrategy strategy, const DroProblem& problem,
                                   const ParameterVector& theta, const SimplexWeights& pi,
                                   std::size_t batch, std::size_t trials, Rng& rng);

}  // namespace drokit
