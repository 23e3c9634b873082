#include "drokit/harness/oracles.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "drokit/error.hpp"

namespace drokit::harness::oracles {

namespace {

// Root of an increasing function on [lo, hi]; clamps to the ends when the
// sign does not change.
template <typename F>
double bisect_increasing(F f, double lo, double hi) {
  if (!(f(lo) < 0.0)) return lo;
  if (!(f(hi) > 0.0)) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Vector prox_argmin(const Vector& pi, const Vector& prior, const Vector& grad, double gamma, double tau,
                   double lower) {
  const Eigen::Index c = pi.size();
  if (c != 2 && c != 3) throw InvalidArgument("prox_argmin: c must be 2 or 3");
  if (prior.size() != c || grad.size() != c) throw DimensionMismatch("prox_argmin: length mismatch");
  if (lower * static_cast<double>(c) >= 1.0) throw InvalidArgument("prox_argmin: lower bound too large");

  // Partial derivative of the objective without the constant 1 + gamma tau.
  auto partial = [&](Eigen::Index i, double x) {
    return gamma * grad[i] + std::log(x / pi[i]) + gamma * tau * std::log(x / prior[i]);
  };

  if (c == 2) {
    const double t = bisect_increasing(
        [&](double t) { return partial(0, t) - partial(1, 1.0 - t); }, lower, 1.0 - lower);
    Vector x(2);
    x << t, 1.0 - t;
    return x;
  }

  auto inner = [&](double t) {
    return bisect_increasing([&](double s) { return partial(1, s) - partial(2, 1.0 - t - s); }, lower,
                             1.0 - t - lower);
  };
  const double t = bisect_increasing(
      [&](double t) {
        const double s = inner(t);
        return partial(0, t) - partial(2, 1.0 - t - s);
      },
      lower, 1.0 - 2.0 * lower);
  const double s = inner(t);
  Vector x(3);
  x << t, s, 1.0 - t - s;
  return x;
}

Vector inner_max_grid(const Vector& losses, const Vector& prior, double tau) {
  if (losses.size() != 2 || prior.size() != 2) throw InvalidArgument("inner_max_grid: c must be 2");
  auto value = [&](double t) {
    double kl = 0.0;
    if (t > 0.0) kl += t * std::log(t / prior[0]);
    if (t < 1.0) kl += (1.0 - t) * std::log((1.0 - t) / prior[1]);
    return t * losses[0] + (1.0 - t) * losses[1] - tau * kl;
  };
  constexpr int kPoints = 10001;
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPoints; ++i) {
    const double v = value(static_cast<double>(i) / (kPoints - 1));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = static_cast<double>(std::max(best - 1, 0)) / (kPoints - 1);
  const double hi = static_cast<double>(std::min(best + 1, kPoints - 1)) / (kPoints - 1);
  // Negated derivative is increasing in t.
  const double t = bisect_increasing(
      [&](double t) {
        return -(losses[0] - losses[1] - tau * (std::log(t / prior[0]) - std::log((1.0 - t) / prior[1])));
      },
      lo, hi);
  Vector x(2);
  x << t, 1.0 - t;
  return x;
}

StochasticEstimate exhaustive_expectation(SamplingStrategy strategy, const DroProblem& problem,
                                          const SimplexWeights& pi, const ParameterVector& theta) {
  const auto& sizes = problem.dataset().group_sizes;
  const double c = static_cast<double>(problem.groups());
  const double n = static_cast<double>(problem.total_count());
  if (strategy == SamplingStrategy::full_batch) {
    Rng unused(0);
    return estimate_from_batch(problem, theta, draw_batch(strategy, problem, pi, 1, unused));
  }
  StochasticEstimate e{Vector::Zero(theta.size()), Vector::Zero(static_cast<Eigen::Index>(problem.groups()))};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto gi = static_cast<Eigen::Index>(i);
    const double ni = static_cast<double>(sizes[i]);
    double prob = 0.0;
    switch (strategy) {
      case SamplingStrategy::uniform_all: prob = 1.0 / n; break;
      case SamplingStrategy::two_stage: prob = 1.0 / (c * ni); break;
      case SamplingStrategy::probability_weighted: prob = pi[gi] / ni; break;
      case SamplingStrategy::full_batch: break;
    }
    for (std::size_t j = 0; j < sizes[i]; ++j) {
      const SampledPair pair = scaled_pair(strategy, problem, pi, {i, j});
      Vector grad = Vector::Zero(theta.size());
      const double f = problem.model().accumulate_gradient(theta, {i, j}, 1.0, grad);
      e.g += prob * pair.theta_scale * grad;
      e.p[gi] -= prob * pair.loss_scale * f;
    }
  }
  return e;
}

ParameterVector quadratic_moreau_prox(const std::vector<QuadraticItem>& items, double group_scale,
                                      double tau_theta, const ParameterVector& theta, double L) {
  const auto d = theta.size();
  Matrix h = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (const auto& it : items) {
    h += group_scale * it.a.transpose() * it.a;
    rhs += group_scale * (it.a.transpose() * it.b - it.q);
  }
  h.diagonal().array() += tau_theta + 2.0 * L;
  rhs += 2.0 * L * theta;
  return h.partialPivLu().solve(rhs);
}

}  // namespace drokit::harness::oracles
