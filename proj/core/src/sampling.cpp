#include "drokit/sampling.hpp"

#include "drokit/error.hpp"

namespace drokit {

std::string to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::uniform_all: return "uniform_all";
    case SamplingStrategy::two_stage: return "two_stage";
    case SamplingStrategy::probability_weighted: return "probability_weighted";
    case SamplingStrategy::full_batch: return "full_batch";
  }
  return "unknown";
}

SamplingStrategy parse_sampling_strategy(const std::string& name) {
  if (name == "uniform_all") return SamplingStrategy::uniform_all;
  if (name == "two_stage") return SamplingStrategy::two_stage;
  if (name == "probability_weighted") return SamplingStrategy::probability_weighted;
  if (name == "full_batch") return SamplingStrategy::full_batch;
  throw InvalidArgument("unknown sampling strategy '" + name + "'");
}

SampledPair scaled_pair(SamplingStrategy strategy, const DroProblem& problem,
                        const SimplexWeights& pi, ItemAddress at) {
  const double c = static_cast<double>(problem.groups());
  const double n = static_cast<double>(problem.total_count());
  const double ni = static_cast<double>(problem.dataset().group_sizes.at(at.group));
  const double pi_i = pi[static_cast<Eigen::Index>(at.group)];
  switch (strategy) {
    case SamplingStrategy::uniform_all:
    case SamplingStrategy::full_batch:
      return {at, c * pi_i, c};
    case SamplingStrategy::two_stage: {
      const double factor = c * c * ni / n;
      return {at, factor * pi_i, factor};
    }
    case SamplingStrategy::probability_weighted:
      if (!(pi_i > 0.0)) throw InvalidArgument("probability_weighted sampling needs pi_i > 0");
      // (c n_i / (n pi_i)) * pi_i: the weight cancels.
      return {at, c * ni / n, c * ni / (n * pi_i)};
  }
  throw InvalidArgument("scaled_pair: unknown strategy");
}

SampleBatch draw_batch(SamplingStrategy strategy, const DroProblem& problem,
                       const SimplexWeights& pi, std::size_t batch, Rng& rng) {
  if (static_cast<std::size_t>(pi.size()) != problem.groups()) {
    throw DimensionMismatch("draw_batch: weight vector length differs from group count");
  }
  const auto& sizes = problem.dataset().group_sizes;
  if (problem.total_count() == 0) throw InvalidArgument("draw_batch: empty dataset");
  SampleBatch out;
  out.strategy = strategy;
  if (strategy == SamplingStrategy::full_batch) {
    out.pairs.reserve(problem.total_count());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      for (std::size_t j = 0; j < sizes[i]; ++j) out.pairs.push_back(scaled_pair(strategy, problem, pi, {i, j}));
    }
    return out;
  }
  if (batch == 0) throw InvalidArgument("draw_batch: batch size must be >= 1");
  if (strategy == SamplingStrategy::probability_weighted && !(pi.weights().minCoeff() > 0.0)) {
    throw InvalidArgument("probability_weighted sampling needs pi_i > 0");
  }
  out.pairs.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    ItemAddress at;
    switch (strategy) {
      case SamplingStrategy::uniform_all: {
        std::size_t flat = rng.below(problem.total_count());
        while (flat >= sizes[at.group]) flat -= sizes[at.group++];
        at.item = flat;
        break;
      }
      case SamplingStrategy::two_stage:
        at.group = rng.below(sizes.size());
        at.item = rng.below(sizes[at.group]);
        break;
      case SamplingStrategy::probability_weighted:
        at.group = rng.categorical({pi.weights().data(), static_cast<std::size_t>(pi.size())});
        at.item = rng.below(sizes[at.group]);
        break;
      case SamplingStrategy::full_batch:
        break;
    }
    out.pairs.push_back(scaled_pair(strategy, problem, pi, at));
  }
  return out;
}

StochasticEstimate estimate_from_batch(const DroProblem& problem, const ParameterVector& theta,
                                       const SampleBatch& batch) {
  if (batch.pairs.empty()) throw InvalidArgument("estimate_from_batch: empty batch");
  StochasticEstimate est{Vector::Zero(static_cast<Eigen::Index>(problem.dim())),
                         Vector::Zero(static_cast<Eigen::Index>(problem.groups()))};
  const double inv_b = 1.0 / static_cast<double>(batch.pairs.size());
  for (const auto& pair : batch.pairs) {
    const double f = problem.model().accumulate_gradient(theta, pair.address, pair.theta_scale * inv_b, est.g);
    est.p[static_cast<Eigen::Index>(pair.address.group)] -= pair.loss_scale * inv_b * f;
  }
  if (!est.g.allFinite() || !est.p.allFinite()) throw NonFiniteValue("stochastic estimate is not finite");
  return est;
}

StochasticEstimate sample_estimate(SamplingStrategy strategy, const DroProblem& problem,
                                   const SimplexWeights& pi, const ParameterVector& theta,
                                   std::size_t batch, Rng& rng) {
  return estimate_from_batch(problem, theta, draw_batch(strategy, problem, pi, batch, rng));
}

StochasticEstimate sample_uniform_all(const DroProblem& problem, const SimplexWeights& pi,
                                      const ParameterVector& theta, std::size_t batch, Rng& rng) {
  return sample_estimate(SamplingStrategy::uniform_all, problem, pi, theta, batch, rng);
}

StochasticEstimate sample_two_stage(const DroProblem& problem, const SimplexWeights& pi,
                                    const ParameterVector& theta, std::size_t batch, Rng& rng) {
  return sample_estimate(SamplingStrategy::two_stage, problem, pi, theta, batch, rng);
}

StochasticEstimate sample_probability_weighted(const DroProblem& problem, const SimplexWeights& pi,
                                               const ParameterVector& theta, std::size_t batch,
                                               Rng& rng) {
  return sample_estimate(SamplingStrategy::probability_weighted, problem, pi, theta, batch, rng);
}

StochasticEstimate exact_estimate(const DroProblem& problem, const SimplexWeights& pi,
                                  const ParameterVector& theta) {
  return {grad_theta_full(problem, theta, pi), -group_losses(problem, theta)};
}

VarianceEstimate estimate_variance(SamplingStrategy strategy, const DroProblem& problem,
                                   const ParameterVector& theta, const SimplexWeights& pi,
                                   std::size_t batch, std::size_t trials, Rng& rng) {
  if (trials < 2) throw InvalidArgument("estimate_variance: need at least two trials");
  const StochasticEstimate exact = exact_estimate(problem, pi, theta);
  VarianceEstimate v;
  for (std::size_t t = 0; t < trials; ++t) {
    const StochasticEstimate est = sample_estimate(strategy, problem, pi, theta, batch, rng);
    v.g += (est.g - exact.g).squaredNorm();
    v.p += (est.p - exact.p).squaredNorm();
  }
  v.g /= static_cast<double>(trials);
  v.p /= static_cast<double>(trials);
  return v;
}

}  // namespace drokit
