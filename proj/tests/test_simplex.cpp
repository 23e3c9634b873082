#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drokit/error.hpp"
#include "drokit/rng.hpp"
#include "drokit/simplex.hpp"

namespace drokit {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector random_point(Rng& rng, Eigen::Index c) {
  Vector w(c);
  for (Eigen::Index i = 0; i < c; ++i) w[i] = std::exp(rng.normal());
  return w / w.sum();
}

// Brute-force minimizer on a segment: dense grid on f, then bisection of the
// derivative df inside the best cell (endpoints when df keeps its sign).
template <typename F, typename D>
double argmin_segment(F f, D df, double lo, double hi) {
  const int n = 100000;
  int best = 0;
  double bv = INFINITY;
  for (int i = 0; i <= n; ++i) {
    const double v = f(lo + (hi - lo) * i / n);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / n;
  double b = lo + (hi - lo) * std::min(best + 1, n) / n;
  if (df(a) >= 0) return a;
  if (df(b) <= 0) return b;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    (df(m) < 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

// <gamma grad, x> + KL[x || pi] + gamma tau KL[x || prior] on x = (t, 1 - t).
double prox_objective(double t, const Vector& pi, const Vector& prior, const Vector& grad, double gamma,
                      double tau) {
  const Vector x = vec({t, 1.0 - t});
  double v = gamma * grad.dot(x);
  for (int i = 0; i < 2; ++i) {
    if (x[i] > 0) v += x[i] * std::log(x[i] / pi[i]) + gamma * tau * x[i] * std::log(x[i] / prior[i]);
  }
  return v;
}

double prox_derivative(double t, const Vector& pi, const Vector& prior, const Vector& grad, double gamma,
                       double tau) {
  return gamma * (grad[0] - grad[1]) + std::log(t / pi[0]) - std::log((1 - t) / pi[1]) +
         gamma * tau * (std::log(t / prior[0]) - std::log((1 - t) / prior[1]));
}

TEST(KlDivergence, SpecExamples) {
  const Vector q = Vector::Constant(4, 0.25);
  EXPECT_EQ(kl_divergence(q, q), 0.0);
  EXPECT_NEAR(kl_divergence(vec({0.5, 0.5}), vec({0.25, 0.75})), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0),
              1e-15);
  EXPECT_NEAR(kl_divergence(vec({1.0, 0.0}), vec({0.5, 0.5})), std::log(2.0), 1e-15);
}

TEST(KlDivergence, Errors) {
  EXPECT_THROW(kl_divergence(vec({0.5, 0.5}), vec({1.0, 0.0})), InfiniteDivergence);
  EXPECT_THROW(kl_divergence(vec({0.5, 0.5}), vec({1.0})), DimensionMismatch);
  EXPECT_NO_THROW(kl_divergence(vec({1.0, 0.0}), vec({1.0, 0.0})));
}

TEST(KlDivergence, PropertiesOnRandomPairs) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index c = 2 + static_cast<Eigen::Index>(rng.below(9));
    const Vector p = random_point(rng, c);
    const Vector q = random_point(rng, c);
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    const double kl = kl_divergence(p, q);
    EXPECT_GE(kl, 0.0);
    EXPECT_GE(kl + 1e-15, 0.5 * (p - q).squaredNorm());
    // Reverse-order summation.
    double rev = 0.0;
    for (Eigen::Index i = c - 1; i >= 0; --i) rev += p[i] * std::log(p[i] / q[i]);
    EXPECT_NEAR(kl, rev, 1e-13);
  }
}

TEST(Softmax, SpecExamples) {
  const Vector u = softmax(vec({0, 0, 0}));
  for (int i = 0; i < 3; ++i) EXPECT_EQ(u[i], 1.0 / 3.0);
  const Vector s = softmax(vec({std::log(0.2), std::log(0.8)}));
  EXPECT_NEAR(s[0], 0.2, 1e-15);
  EXPECT_NEAR(s[1], 0.8, 1e-15);
  const Vector e = softmax(vec({1, 0}));
  EXPECT_NEAR(e[0], std::numbers::e / (1 + std::numbers::e), 1e-15);
  EXPECT_NEAR(e[1], 1 / (1 + std::numbers::e), 1e-15);
}

TEST(Softmax, ShiftInvariantForRandomLogits) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    Vector z(5);
    for (Eigen::Index i = 0; i < 5; ++i) z[i] = 3.0 * rng.normal();
    const double shift = std::ldexp(1.0, static_cast<int>(rng.below(8)));
    const Vector a = softmax(z);
    const Vector b = softmax(Vector((z.array() + shift).matrix()));
    EXPECT_NEAR((a - b).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_NEAR(a.sum(), 1.0, 1e-15);
  }
}

TEST(Softmax, RejectsNonFinite) {
  EXPECT_THROW(softmax(vec({0.0, INFINITY})), NonFiniteValue);
  EXPECT_THROW(softmax(vec({0.0, NAN})), NonFiniteValue);
}

TEST(SimplexWeights, ValidatesInvariants) {
  EXPECT_THROW(SimplexWeights(vec({0.6, 0.6}), vec({0.5, 0.5})), InvalidArgument);
  EXPECT_THROW(SimplexWeights(vec({1.0, 0.0}), vec({0.5, 0.5}), 1e-6), InvalidArgument);
  EXPECT_THROW(SimplexWeights(vec({0.5, 0.5}), vec({0.3, 0.3, 0.4})), DimensionMismatch);
  EXPECT_NO_THROW(SimplexWeights(vec({0.5, 0.5}), vec({0.5, 0.5})));
  EXPECT_EQ(SimplexWeights::uniform(4).size(), 4);
}

TEST(ClampToFloor, UntouchedWhenFeasible) {
  const Vector w = vec({0.1, 0.2, 0.7});
  const Vector out = clamp_to_floor(w, 0.05);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(out[i], w[i]);
}

TEST(ClampToFloor, KktStructure) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    Vector w = random_point(rng, 6);
    w = w.array().pow(4.0).matrix();
    w /= w.sum();
    const double floor = 0.02 + 0.1 * rng.uniform();
    const Vector out = clamp_to_floor(w, floor);
    EXPECT_NEAR(out.sum(), 1.0, 1e-12);
    EXPECT_GE(out.minCoeff(), floor);
    // Free coordinates share a common ratio to w.
    double ratio = -1.0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (out[i] > floor * (1 + 1e-12)) {
        if (ratio < 0) ratio = out[i] / w[i];
        EXPECT_NEAR(out[i] / w[i], ratio, 1e-10 * ratio);
      } else {
        // Clamped coordinates would fall below the floor at the common ratio.
        if (ratio > 0) { EXPECT_LE(w[i] * ratio, floor * (1 + 1e-10)); }
      }
    }
  }
  EXPECT_THROW(clamp_to_floor(vec({0.5, 0.5}), 0.6), InvalidArgument);
}

TEST(EntropicProxStep, FixedPointAtPrior) {
  const SimplexWeights pi = SimplexWeights::at_prior(vec({0.2, 0.3, 0.5}));
  const Vector out = entropic_prox_step(pi, Vector::Zero(3), 0.7, 1.3).weights();
  EXPECT_NEAR((out - pi.prior()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(EntropicProxStep, MatchesGridOracleSpecExample) {
  const SimplexWeights pi = SimplexWeights::uniform(2);
  const Vector grad = vec({-1.0, 0.0});
  const Vector out = entropic_prox_step(pi, grad, 0.5, 1.0).weights();
  const double t = argmin_segment(
      [&](double t) { return prox_objective(t, pi.weights(), pi.prior(), grad, 0.5, 1.0); },
      [&](double t) { return prox_derivative(t, pi.weights(), pi.prior(), grad, 0.5, 1.0); }, 0.0, 1.0);
  EXPECT_NEAR(out[0], t, 1e-8);
  EXPECT_GT(out[0], 0.5);  // higher loss, more weight
}

TEST(EntropicProxStep, MatchesGridOracleOnRandomTwoGroupInputs) {
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vector p = random_point(rng, 2), prior = random_point(rng, 2);
    const Vector grad = vec({2 * rng.normal(), 2 * rng.normal()});
    const double gamma = 0.05 + rng.uniform(), tau = 2 * rng.uniform();
    const Vector out = entropic_prox_step(SimplexWeights(p, prior), grad, gamma, tau).weights();
    const double t = argmin_segment([&](double t) { return prox_objective(t, p, prior, grad, gamma, tau); },
                                    [&](double t) { return prox_derivative(t, p, prior, grad, gamma, tau); }, 0.0, 1.0);
    EXPECT_NEAR(out[0], t, 1e-8);
  }
}

TEST(EntropicProxStep, UnregularizedIsPlainMirrorStep) {
  const SimplexWeights pi(vec({0.2, 0.3, 0.5}), vec({0.6, 0.2, 0.2}));
  const Vector grad = vec({0.3, -1.0, 0.4});
  const Vector out = entropic_prox_step(pi, grad, 0.8, 0.0).weights();
  const Vector expected = softmax(Vector((pi.weights().array().log() - 0.8 * grad.array()).matrix()));
  EXPECT_NEAR((out - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(EntropicProxStep, MonotoneInOwnLoss) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const SimplexWeights pi(random_point(rng, 4), random_point(rng, 4));
    Vector grad(4);
    for (int i = 0; i < 4; ++i) grad[i] = rng.normal();
    const Vector base = entropic_prox_step(pi, grad, 0.5, 0.7).weights();
    Vector raised = grad;
    raised[2] -= rng.uniform();  // more loss on group 2
    const Vector after = entropic_prox_step(pi, raised, 0.5, 0.7).weights();
    EXPECT_GE(after[2], base[2]);
  }
}

TEST(ConstrainedProxStep, ZeroFloorMatchesEntropicStep) {
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const SimplexWeights pi(random_point(rng, 3), random_point(rng, 3));
    const Vector grad = vec({rng.normal(), rng.normal(), rng.normal()});
    const Vector a = constrained_prox_step(pi, grad, 0.4, 0.9, 0.0).weights();
    const Vector b = entropic_prox_step(pi, grad, 0.4, 0.9).weights();
    EXPECT_NEAR((a - b).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  }
}

TEST(ConstrainedProxStep, ClampsToFloorSpecExample) {
  // With gamma = tau = 1 and uniform pi = prior the step is SM[-phat / 2];
  // choose phat so the unconstrained solution is (0.9, 0.1).
  const SimplexWeights pi = SimplexWeights::uniform(2);
  const Vector phat = vec({-std::log(9.0), 0.0}) * 2.0;
  const Vector free = constrained_prox_step(pi, phat, 0.0).weights();
  EXPECT_NEAR(free[0], 0.9, 1e-14);
  const Vector out = constrained_prox_step(pi, phat, 0.3).weights();
  EXPECT_NEAR(out[0], 0.7, 1e-14);
  EXPECT_NEAR(out[1], 0.3, 1e-14);
}

TEST(ConstrainedProxStep, MatchesGridOracleOnFeasibleSegment) {
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    const Vector p = random_point(rng, 2), prior = random_point(rng, 2);
    const Vector grad = vec({3 * rng.normal(), 3 * rng.normal()});
    const double floor = 0.05 + 0.35 * rng.uniform();
    const Vector out = constrained_prox_step(SimplexWeights(p, prior), grad, 1.0, 1.0, floor).weights();
    const double t = argmin_segment([&](double t) { return prox_objective(t, p, prior, grad, 1.0, 1.0); },
                                    [&](double t) { return prox_derivative(t, p, prior, grad, 1.0, 1.0); }, floor,
                                    1.0 - floor);
    EXPECT_NEAR(out[0], t, 1e-8);
  }
}

TEST(ConstrainedProxStep, StationaryAtFeasiblePrior) {
  const SimplexWeights pi = SimplexWeights::at_prior(vec({0.25, 0.25, 0.5}));
  const Vector out = constrained_prox_step(pi, Vector::Zero(3), 0.1).weights();
  EXPECT_NEAR((out - pi.prior()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_THROW(constrained_prox_step(pi, Vector::Zero(3), 0.4), InvalidArgument);
}

TEST(MirrorStep, RespectsFloorAndSum) {
  const SimplexWeights pi(vec({0.5, 0.5}), vec({0.5, 0.5}), 1e-3);
  const Vector out = mirror_step(pi, vec({-100.0, 100.0}), 1.0, 0.0).weights();
  EXPECT_NEAR(out.sum(), 1.0, 1e-12);
  EXPECT_GE(out.minCoeff(), 1e-3);
}

}  // namespace
}  // namespace drokit
