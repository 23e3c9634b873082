#include "drokit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "drokit/error.hpp"

namespace drokit {

void check_simplex(const Vector& w, double floor, const char* what) {
  if (w.size() < 1) throw InvalidArgument(std::string(what) + ": empty simplex vector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) throw NonFiniteValue(std::string(what) + ": non-finite weight");
    if (w[i] < floor) {
      throw InvalidArgument(std::string(what) + ": entry " + std::to_string(i) + " = " +
                            std::to_string(w[i]) + " below floor");
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > kSimplexSumTolerance) {
    throw InvalidArgument(std::string(what) + ": entries sum to " + std::to_string(sum));
  }
}

SimplexWeights::SimplexWeights(Vector weights, Vector prior, double floor)
    : weights_(std::move(weights)), prior_(std::move(prior)), floor_(floor) {
  if (!(floor_ >= 0.0)) throw InvalidArgument("SimplexWeights: negative floor");
  if (weights_.size() != prior_.size()) {
    throw DimensionMismatch("SimplexWeights: weights and prior differ in length");
  }
  if (static_cast<double>(weights_.size()) * floor_ > 1.0) {
    throw InvalidArgument("SimplexWeights: infeasible floor");
  }
  check_simplex(weights_, floor_, "SimplexWeights.weights");
  check_simplex(prior_, floor_, "SimplexWeights.prior");
}

SimplexWeights SimplexWeights::at_prior(const Vector& prior, double floor) {
  return SimplexWeights(prior, prior, floor);
}

SimplexWeights SimplexWeights::uniform(Eigen::Index c, double floor) {
  if (c < 1) throw InvalidArgument("SimplexWeights::uniform: c must be >= 1");
  Vector u = Vector::Constant(c, 1.0 / static_cast<double>(c));
  return SimplexWeights(u, u, floor);
}

SimplexWeights SimplexWeights::with_weights(Vector weights) const {
  return SimplexWeights(std::move(weights), prior_, floor_);
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw DimensionMismatch("kl_divergence: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw InvalidArgument("kl_divergence: negative entry");
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw InfiniteDivergence("kl_divergence: q[" + std::to_string(i) + "] = 0 with p > 0");
    }
    total += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave tiny negative totals for p ~ q.
  return std::max(total, 0.0);
}

Vector softmax(const Logits& logits) {
  const Vector& z = logits.values;
  if (z.size() < 1) throw InvalidArgument("softmax: empty logits");
  if (!z.allFinite()) throw NonFiniteValue("softmax: non-finite logit");
  const double shift = z.maxCoeff();
  Vector e = (z.array() - shift).exp().matrix();
  return e / e.sum();
}

Vector clamp_to_floor(const Vector& w, double floor) {
  const Eigen::Index c = w.size();
  if (static_cast<double>(c) * floor > 1.0) {
    throw InvalidArgument("clamp_to_floor: infeasible floor (c * floor > 1)");
  }
  if (floor <= 0.0 || w.minCoeff() >= floor) return w;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] > w[b]; });

  // Free set = the k largest entries; the rest sit at the floor.
  double top_sum = w.sum();
  double scale = 1.0;
  for (Eigen::Index k = c; k >= 1; --k) {
    if (k < c) top_sum -= w[order[static_cast<std::size_t>(k)]];
    if (top_sum <= 0.0) continue;
    scale = (1.0 - static_cast<double>(c - k) * floor) / top_sum;
    const double smallest_free = w[order[static_cast<std::size_t>(k - 1)]] * scale;
    if (smallest_free >= floor) break;
  }
  Vector out(c);
  for (Eigen::Index i = 0; i < c; ++i) out[i] = std::max(floor, w[i] * scale);
  return out;
}

namespace {

Vector step_logits(const SimplexWeights& pi, const Vector& grad, double step, double tau) {
  if (grad.size() != pi.size()) throw DimensionMismatch("simplex step: gradient length mismatch");
  if (!grad.allFinite()) throw NonFiniteValue("simplex step: non-finite gradient");
  if (pi.weights().minCoeff() <= 0.0) {
    throw InvalidArgument("simplex step: current weights have a zero entry");
  }
  const Vector log_pi = pi.weights().array().log().matrix();
  if (tau == 0.0) return log_pi - step * grad;
  const Vector log_ratio = log_pi - pi.prior().array().log().matrix();
  return log_pi - step * (grad + tau * log_ratio);
}

}  // namespace

SimplexWeights mirror_step(const SimplexWeights& pi, const Vector& grad, double step, double tau) {
  if (!(step >= 0.0)) throw InvalidArgument("mirror_step: negative step");
  if (!(tau >= 0.0)) throw InvalidArgument("mirror_step: negative tau");
  Vector w = softmax(step_logits(pi, grad, step, tau));
  return pi.with_weights(clamp_to_floor(w, pi.floor()));
}

SimplexWeights entropic_prox_step(const SimplexWeights& pi, const Vector& grad, double gamma,
                                  double tau) {
  if (!(gamma >= 0.0)) throw InvalidArgument("entropic_prox_step: negative gamma");
  if (!(tau >= 0.0)) throw InvalidArgument("entropic_prox_step: negative tau");
  return mirror_step(pi, grad, gamma / (1.0 + gamma * tau), tau);
}

SimplexWeights constrained_prox_step(const SimplexWeights& pi, const Vector& grad, double gamma,
                                     double tau, double set_floor) {
  if (!(set_floor >= 0.0)) throw InvalidArgument("constrained_prox_step: negative floor");
  if (static_cast<double>(pi.size()) * set_floor > 1.0) {
    throw InvalidArgument("constrained_prox_step: infeasible floor (c * floor > 1)");
  }
  if (!(gamma >= 0.0) || !(tau >= 0.0)) {
    throw InvalidArgument("constrained_prox_step: negative gamma or tau");
  }
  const Vector candidate = softmax(step_logits(pi, grad, gamma / (1.0 + gamma * tau), tau));
  const double floor = std::max(set_floor, pi.floor());
  return pi.with_weights(clamp_to_floor(candidate, floor));
}

SimplexWeights constrained_prox_step(const SimplexWeights& pi, const Vector& phat,
                                     double set_floor) {
  return constrained_prox_step(pi, phat, 1.0, 1.0, set_floor);
}

}  // namespace drokit
