#pragma once

#include <Eigen/Core>

namespace drokit {

using Vector = Eigen::VectorXd;

/// Default truncation level applied after every simplex step.
inline constexpr double kDefaultFloor = 1e-12;
/// Tolerance on |sum - 1| accepted by SimplexWeights.
inline constexpr double kSimplexSumTolerance = 1e-12;

/// Adversarial weights over c groups, with the prior they are regularized
/// toward and the truncation level that defines the feasible set
/// U = { pi : pi_i >= floor }.
class SimplexWeights {
 public:
  SimplexWeights(Vector weights, Vector prior, double floor = kDefaultFloor);

  /// Weights equal to the prior.
  static SimplexWeights at_prior(const Vector& prior, double floor = kDefaultFloor);
  static SimplexWeights uniform(Eigen::Index c, double floor = kDefaultFloor);

  const Vector& weights() const { return weights_; }
  const Vector& prior() const { return prior_; }
  double floor() const { return floor_; }
  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

  /// Same prior and floor, new weights (validated).
  SimplexWeights with_weights(Vector weights) const;

 private:
  Vector weights_;
  Vector prior_;
  double floor_;
};

/// Unnormalized log-weights.
struct Logits {
  Vector values;
};

/// Throws unless every entry is >= floor and the entries sum to one.
void check_simplex(const Vector& w, double floor, const char* what);

/// sum_i p_i log(p_i / q_i) with 0 log 0 = 0.
///
/// Throws DimensionMismatch on length mismatch and InfiniteDivergence when
/// q_i = 0 while p_i > 0.
double kl_divergence(const Vector& p, const Vector& q);

/// Max-shifted softmax. Throws NonFiniteValue on non-finite logits.
Vector softmax(const Logits& logits);
inline Vector softmax(const Vector& logits) { return softmax(Logits{logits}); }

/// KL projection onto { pi in simplex : pi_i >= floor } of a probability
/// vector: pi_i = max(floor, t * w_i) with t chosen so the result sums to one.
/// Entries are left untouched (bit for bit) when no coordinate is clamped.
/// Throws InvalidArgument when c * floor > 1.
Vector clamp_to_floor(const Vector& w, double floor);

/// SM[log pi - step * (grad + tau * log(pi / prior))], floored to pi.floor().
/// This is the raw mirror step used by the optimistic solvers; `step` is
/// applied as given.
SimplexWeights mirror_step(const SimplexWeights& pi, const Vector& grad, double step, double tau);

/// Closed-form minimizer over the simplex of
///   <gamma * grad, x> + KL[x || pi] + gamma * tau * KL[x || prior],
/// i.e. SM[log pi - gamma / (1 + gamma tau) * (grad + tau log(pi / prior))].
/// `grad` is the pi-block of the VI operator (negated group losses), so a
/// larger loss moves weight toward that group.
SimplexWeights entropic_prox_step(const SimplexWeights& pi, const Vector& grad, double gamma,
                                  double tau);

/// Same objective as entropic_prox_step restricted to
/// U = { x : x_i >= set_floor }. The closed form is tried first; when it
/// violates the floor the KKT system (violated coordinates clamped, free
/// coordinates proportional to the closed form) is solved exactly.
SimplexWeights constrained_prox_step(const SimplexWeights& pi, const Vector& grad, double gamma,
                                     double tau, double set_floor);

/// The unit-step form: argmin over U of <phat + log(x / prior), x> + KL[x || pi].
SimplexWeights constrained_prox_step(const SimplexWeights& pi, const Vector& phat,
                                     double set_floor);

}  // namespace drokit
