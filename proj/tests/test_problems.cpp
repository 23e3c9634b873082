#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "drokit/error.hpp"
#include "drokit/problems.hpp"
#include "drokit/rng.hpp"

namespace drokit {
namespace {

QuadraticItem constant_item(std::size_t d, double r) {
  return QuadraticItem{Matrix::Zero(1, static_cast<Eigen::Index>(d)), Vector::Zero(1),
                       Vector::Zero(static_cast<Eigen::Index>(d)), r};
}

// Problem whose group losses are the given constants (A = 0, q = 0, r = value).
DroProblem constant_losses(const std::vector<double>& values, double tau_pi, double tau_theta = 0.0) {
  std::vector<std::vector<QuadraticItem>> groups;
  for (double v : values) groups.push_back({constant_item(1, v)});
  return make_quadratic_from_items(std::move(groups), tau_theta, tau_pi);
}

Vector random_simplex(Rng& rng, Eigen::Index c) {
  Vector w(c);
  for (Eigen::Index i = 0; i < c; ++i) w[i] = std::exp(rng.normal());
  return w / w.sum();
}

TEST(GroupLoss, SingleItemScaling) {
  QuadraticItem it{Matrix::Identity(1, 1), Vector::Zero(1), Vector::Zero(1), 0.0};
  const DroProblem p = make_quadratic_from_items({{it}}, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(group_loss(p, Vector::Constant(1, 2.0), 0), 2.0);
}

TEST(GroupLoss, ScalesByGroupsOverItems) {
  const DroProblem p = make_quadratic_from_items(
      {{constant_item(1, 1.0), constant_item(1, 3.0)}, {constant_item(1, 0.0), constant_item(1, 0.0)}}, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(group_loss(p, Vector::Zero(1), 0), 2.0);
  EXPECT_THROW(group_loss(p, Vector::Zero(1), 2), InvalidArgument);
}

TEST(GroupLoss, LogisticAtZeroIsLogTwo) {
  auto model = std::make_shared<LogisticModel>(std::vector<std::vector<LogisticItem>>{
      {{Vector::Ones(3), 1.0}, {Vector::Ones(3), -1.0}}, {{Vector::Ones(3), 1.0}}});
  const DroProblem p(model, 0.0, 1.0, Vector::Constant(2, 0.5));
  EXPECT_NEAR(group_loss(p, Vector::Zero(3), 0), (2.0 / 3.0) * 2 * std::log(2.0), 1e-15);
  EXPECT_NEAR(group_loss(p, Vector::Zero(3), 1), (2.0 / 3.0) * std::log(2.0), 1e-15);
}

TEST(ObjectiveH, UniformWeightsGiveErm) {
  const DroProblem p = make_quadratic_problem(5, 3, 4, 3, {0.0, 1.0});
  Rng rng(1);
  ParameterVector theta(3);
  for (int i = 0; i < 3; ++i) theta[i] = rng.normal();
  double erm = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) erm += p.model().value(theta, {i, j});
  }
  erm /= 12.0;
  EXPECT_NEAR(objective_h(p, theta, p.initial_weights()), erm, 1e-14);
}

TEST(ObjectiveH, ConstantsAtPrior) {
  const DroProblem p = constant_losses({1.0, 2.0, 4.0}, 0.5);
  const Vector prior = p.prior();
  EXPECT_NEAR(objective_h(p, Vector::Zero(1), p.initial_weights()), prior.dot(Vector((Vector(3) << 1, 2, 4).finished())),
              1e-15);
}

TEST(ObjectiveH, MatchesShuffledRecomputation) {
  QuadraticOptions o;
  o.tau_theta = 0.3;
  o.tau_pi = 0.7;
  const DroProblem p = make_quadratic_problem(9, 4, 3, 5, o);
  const auto& model = static_cast<const QuadraticModel&>(p.model());
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    ParameterVector theta(4);
    for (int i = 0; i < 4; ++i) theta[i] = rng.normal();
    const SimplexWeights pi(random_simplex(rng, 3), p.prior());
    std::vector<ItemAddress> order;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 5; ++j) order.push_back({i, j});
    }
    for (std::size_t k = order.size() - 1; k > 0; --k) std::swap(order[k], order[rng.below(k + 1)]);
    double total = 0.0;
    for (const auto& at : order) {
      const QuadraticItem& it = model.item(at);
      const Vector r = it.a * theta - it.b;
      total += pi[static_cast<Eigen::Index>(at.group)] * (3.0 / 15.0) * (0.5 * r.squaredNorm() + it.q.dot(theta) + it.r);
    }
    double kl = 0.0;
    for (int i = 2; i >= 0; --i) kl += pi[i] * std::log(pi[i] / p.prior()[i]);
    total += 0.15 * theta.squaredNorm() - 0.7 * kl;
    EXPECT_NEAR(objective_h(p, theta, pi), total, 1e-12);
  }
}

TEST(ObjectiveH, LossPartIsLinearInPi) {
  const DroProblem p = make_quadratic_problem(3, 3, 4, 2, {0.0, 0.0});
  Rng rng(3);
  const ParameterVector theta = ParameterVector::Random(3);
  for (int t = 0; t < 50; ++t) {
    const Vector a = random_simplex(rng, 4), b = random_simplex(rng, 4);
    const double lambda = rng.uniform();
    const Vector mix = lambda * a + (1 - lambda) * b;
    const double lhs = objective_h(p, theta, SimplexWeights(mix / mix.sum(), p.prior()));
    const double rhs = lambda * objective_h(p, theta, SimplexWeights(a, p.prior())) +
                       (1 - lambda) * objective_h(p, theta, SimplexWeights(b, p.prior()));
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(GradThetaFull, QuadraticSingleGroup) {
  const Vector b = (Vector(2) << 1.0, -2.0).finished();
  QuadraticItem it{Matrix::Identity(2, 2), b, Vector::Zero(2), 0.0};
  const DroProblem p = make_quadratic_from_items({{it}}, 5.0, 1.0);
  const ParameterVector theta = (Vector(2) << 0.5, 0.25).finished();
  EXPECT_NEAR((grad_theta_full(p, theta, p.initial_weights()) - (theta - b)).norm(), 0.0, 1e-15);
}

TEST(GradThetaFull, MatchesFiniteDifferencesOfLossPart) {
  for (const DroProblem& p : {make_quadratic_problem(4, 3, 3, 2), make_tiny_mlp(4, 2, 4)}) {
    const DroProblem loss_only = p.with_regularization(0.0, p.tau_pi());
    Rng rng(4);
    ParameterVector theta(static_cast<Eigen::Index>(p.dim()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.5 * rng.normal();
    const SimplexWeights pi(random_simplex(rng, static_cast<Eigen::Index>(p.groups())), p.prior());
    const Vector g = grad_theta_full(loss_only, theta, pi);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      ParameterVector up = theta, down = theta;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (objective_h(loss_only, up, pi) - objective_h(loss_only, down, pi)) / 2e-6;
      EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(GradThetaFull, ConcentratedWeightsApproachOneGroup) {
  const DroProblem p = make_quadratic_problem(6, 2, 3, 2);
  const ParameterVector theta = ParameterVector::Ones(2);
  const Vector w = (Vector(3) << 1e-9, 1 - 2e-9, 1e-9).finished();
  const Vector g = grad_theta_full(p, theta, SimplexWeights(w, p.prior()));
  Vector only = Vector::Zero(2);
  for (std::size_t j = 0; j < 2; ++j) p.model().accumulate_gradient(theta, {1, j}, p.group_scale(), only);
  EXPECT_NEAR((g - only).norm(), 0.0, 1e-7);
}

TEST(InnerMax, EqualLossesGivePrior) {
  std::vector<std::vector<QuadraticItem>> groups = {{constant_item(1, 2.0)}, {constant_item(1, 2.0)}};
  auto model = std::make_shared<QuadraticModel>(groups, 1.0);
  const Vector prior = (Vector(2) << 0.3, 0.7).finished();
  const DroProblem p(model, 0.0, 0.4, prior);
  const InnerMax m = inner_max_closed_form(p, Vector::Zero(1));
  EXPECT_NEAR((m.pi.weights() - prior).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(InnerMax, TwoGroupClosedFormAgainstGrid) {
  const DroProblem p = constant_losses({1.0, 0.0}, 1.0);
  const InnerMax m = inner_max_closed_form(p, Vector::Zero(1));
  const double e = std::numbers::e;
  EXPECT_NEAR(m.pi[0], e / (1 + e), 1e-15);
  // Grid maximization of h over the 1-simplex.
  double best_t = 0, best = -INFINITY;
  for (int i = 1; i < 1000000; ++i) {
    const double t = i / 1e6;
    const double v = objective_h(p, Vector::Zero(1), SimplexWeights((Vector(2) << t, 1 - t).finished(), p.prior(), 0.0));
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  EXPECT_NEAR(m.pi[0], best_t, 1e-6);
  EXPECT_NEAR(m.value, best, 1e-10);
}

TEST(InnerMax, LargeTauStaysAtPrior) {
  const DroProblem p = constant_losses({3.0, 0.0, 1.0}, 1e6);
  const InnerMax m = inner_max_closed_form(p, Vector::Zero(1));
  EXPECT_NEAR((m.pi.weights() - p.prior()).cwiseAbs().maxCoeff(), 0.0, 1e-4);
}

TEST(InnerMax, DominatesRandomWeightsAndMatchesObjective) {
  QuadraticOptions o;
  o.tau_pi = 0.3;
  o.tau_theta = 0.2;
  const DroProblem p = make_quadratic_problem(12, 3, 5, 2, o);
  Rng rng(5);
  const ParameterVector theta = ParameterVector::Random(3);
  const InnerMax m = inner_max_closed_form(p, theta);
  EXPECT_NEAR(objective_h(p, theta, m.pi), m.value, 1e-10);
  for (int t = 0; t < 1000; ++t) {
    EXPECT_LE(objective_h(p, theta, SimplexWeights(random_simplex(rng, 5), p.prior())), m.value + 1e-10);
  }
  EXPECT_THROW(inner_max_closed_form(p.with_regularization(0.2, 0.0), theta), InvalidArgument);
}

TEST(MaxValue, GradientMatchesFiniteDifferences) {
  const DroProblem p = make_quadratic_problem(13, 3, 4, 2, {0.5, 0.4});
  const ParameterVector theta = ParameterVector::Random(3);
  const MaxValue mv = max_value_and_gradient(p, theta);
  EXPECT_NEAR(mv.value, inner_max_closed_form(p, theta).value, 1e-12);
  for (Eigen::Index i = 0; i < 3; ++i) {
    ParameterVector up = theta, down = theta;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double fd = (max_value_and_gradient(p, up).value - max_value_and_gradient(p, down).value) / 2e-6;
    EXPECT_NEAR(mv.gradient[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(ExpReformulation, Examples) {
  const DroProblem zero = constant_losses({0.0, 0.0, 0.0}, 0.5, 0.4);
  const ParameterVector theta = ParameterVector::Constant(1, 2.0);
  EXPECT_NEAR(exp_reformulation_value(zero, theta).value, 1.0 + 0.2 * 4.0, 1e-15);
  const double tau = 0.7;
  const DroProblem two = constant_losses({tau * std::log(2.0), 0.0}, tau);
  EXPECT_NEAR(exp_reformulation_value(two, Vector::Zero(1)).value, 1.5, 1e-15);
}

TEST(ExpReformulation, MatchesPerTermSum) {
  const DroProblem p = make_quadratic_problem(14, 2, 6, 1, {0.1, 2.0});
  const ParameterVector theta = ParameterVector::Random(2);
  double sum = 0.0;
  for (std::size_t i = 6; i-- > 0;) sum += std::exp(p.model().value(theta, {i, 0}) / 2.0);
  EXPECT_NEAR(exp_reformulation_value(p, theta).value, sum / 6 + 0.05 * theta.squaredNorm(), 1e-12);
  EXPECT_THROW(exp_reformulation_value(make_quadratic_problem(1, 2, 2, 2), theta), InvalidArgument);
}

TEST(ExpReformulation, LogValueSurvivesOverflow) {
  const DroProblem p = constant_losses({1000.0, 0.0}, 0.5);
  const ExpReformulation r = exp_reformulation_value(p, Vector::Zero(1));
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_NEAR(r.log_value, 2000.0 - std::log(2.0), 1e-9);
}

TEST(QuadraticGenerator, Constants) {
  QuadraticItem id{Matrix::Identity(3, 3), Vector::Zero(3), Vector::Zero(3), 0.0};
  QuadraticModel model({{id}}, 1.0);
  EXPECT_NEAR(model.constants({0, 0})->gradient_lipschitz, 1.0, 1e-12);
  QuadraticItem two{Matrix::Constant(1, 1, 2.0), Vector::Zero(1), Vector::Zero(1), 0.0};
  QuadraticModel m2({{two}}, 1.0);
  const ParameterVector theta = ParameterVector::Constant(1, 3.0);
  EXPECT_DOUBLE_EQ(m2.value(theta, {0, 0}), 18.0);
  Vector g = Vector::Zero(1);
  m2.accumulate_gradient(theta, {0, 0}, 1.0, g);
  EXPECT_DOUBLE_EQ(g[0], 12.0);
}

TEST(QuadraticGenerator, DeterministicAndConstantsBoundEmpirically) {
  const DroProblem a = make_quadratic_problem(21, 4, 3, 2);
  const DroProblem b = make_quadratic_problem(21, 4, 3, 2);
  std::ostringstream sa, sb;
  write_snapshot(a, sa);
  write_snapshot(b, sb);
  EXPECT_EQ(sa.str(), sb.str());

  Rng rng(6);
  const auto& model = a.model();
  const double radius = static_cast<const QuadraticModel&>(model).radius();
  for (int t = 0; t < 1000; ++t) {
    const ItemAddress at{rng.below(3), rng.below(2)};
    ParameterVector x(4), y(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    if (x.norm() > radius) x *= radius / x.norm();
    if (y.norm() > radius) y *= radius / y.norm();
    Vector gx = Vector::Zero(4), gy = Vector::Zero(4);
    model.accumulate_gradient(x, at, 1.0, gx);
    model.accumulate_gradient(y, at, 1.0, gy);
    const auto k = *model.constants(at);
    EXPECT_LE((gx - gy).norm(), k.gradient_lipschitz * (x - y).norm() * (1 + 1e-12));
    EXPECT_LE(std::abs(model.value(x, at) - model.value(y, at)), k.value_lipschitz * (x - y).norm() * (1 + 1e-12));
  }
}

TEST(ImbalancedLogistic, Sizes) {
  const ImbalancedLogistic eq = make_imbalanced_logistic(1, 2, 50, 1.0);
  EXPECT_EQ(eq.majority_count, 50u);
  EXPECT_EQ(eq.minority_count, 50u);
  const ImbalancedLogistic ten = make_imbalanced_logistic(1, 2, 200, 10.0);
  EXPECT_EQ(ten.minority_count, 20u);
  EXPECT_EQ(ten.problem.groups(), 220u);
  EXPECT_EQ(ten.minority_groups.size(), 20u);
  EXPECT_EQ(ten.problem.dim(), 3u);
  EXPECT_THROW(make_imbalanced_logistic(1, 2, 5, 10.0), InvalidArgument);
  EXPECT_THROW(make_imbalanced_logistic(1, 2, 5, 0.5), InvalidArgument);
  std::size_t minority_test = 0;
  for (const auto& pt : ten.test) minority_test += pt.label == 0;
  EXPECT_EQ(2 * minority_test, ten.test.size());
}

TEST(ImbalancedLogistic, ConstantsBoundEmpiricalDifferences) {
  const ImbalancedLogistic data = make_imbalanced_logistic(2, 3, 40, 4.0);
  const auto& model = data.problem.model();
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    const ItemAddress at{rng.below(data.problem.groups()), 0};
    ParameterVector x(4), y(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = 2 * rng.normal();
      y[i] = 2 * rng.normal();
    }
    Vector gx = Vector::Zero(4), gy = Vector::Zero(4);
    model.accumulate_gradient(x, at, 1.0, gx);
    model.accumulate_gradient(y, at, 1.0, gy);
    const auto k = *model.constants(at);
    EXPECT_LE((gx - gy).norm(), k.gradient_lipschitz * (x - y).norm() * (1 + 1e-12));
    EXPECT_LE(std::abs(model.value(x, at) - model.value(y, at)), k.value_lipschitz * (x - y).norm() * (1 + 1e-12));
  }
}

TEST(ImbalancedLogistic, PerClassGrouping) {
  ImbalanceOptions o;
  o.grouping = Grouping::per_class;
  const ImbalancedLogistic data = make_imbalanced_logistic(3, 2, 30, 3.0, o);
  EXPECT_EQ(data.problem.groups(), 2u);
  EXPECT_EQ(data.problem.dataset().group_sizes[1], 10u);
}

TEST(TinyMlp, ZeroParametersGiveLogTwoAndSymmetricGradient) {
  const DroProblem p = make_tiny_mlp(5, 2, 6);
  const auto& model = static_cast<const MlpModel&>(p.model());
  const ParameterVector zero = ParameterVector::Zero(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.groups(); ++i) {
    EXPECT_NEAR(model.value(zero, {i, 0}), std::log(2.0), 1e-15);
  }
  // Balanced labels: output-layer gradient vanishes (hidden units are 0,
  // softmax is uniform and the +/- label residuals cancel).
  const Vector g = grad_theta_full(p, zero, p.initial_weights());
  const std::size_t h = 6, in = 2;
  const Eigen::Index out_begin = static_cast<Eigen::Index>(h * in + h);
  EXPECT_NEAR(g.segment(out_begin, static_cast<Eigen::Index>(2 * h + 2)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(TinyMlp, GradientMatchesFiniteDifferences) {
  const DroProblem p = make_tiny_mlp(6, 3, 5);
  const auto& model = static_cast<const MlpModel&>(p.model());
  const ParameterVector theta = mlp_initial_parameter(model.shape(), 6);
  for (std::size_t j = 0; j < 3; ++j) {
    const ItemAddress at{j, j};
    Vector g = Vector::Zero(theta.size());
    model.accumulate_gradient(theta, at, 1.0, g);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      ParameterVector up = theta, down = theta;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (model.value(up, at) - model.value(down, at)) / 2e-5;
      EXPECT_NEAR(g[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(BilinearToy, Values) {
  const DroProblem p = make_bilinear_toy();
  const ParameterVector theta = ParameterVector::Constant(1, 0.25);
  EXPECT_NEAR(group_loss(p, theta, 0), 1.25, 1e-15);
  EXPECT_NEAR(group_loss(p, theta, 1), 0.75, 1e-15);
}

TEST(ScoreLinearClassifier, MinorityIsPositiveClass) {
  std::vector<LabeledPoint> pts = {{Vector::Constant(1, 1.0), 1}, {Vector::Constant(1, -1.0), 0},
                                   {Vector::Constant(1, -2.0), 0}, {Vector::Constant(1, 2.0), 0}};
  const ClassificationScore s = score_linear_classifier(ParameterVector::Constant(1, 1.0), pts);
  // Predicted minority (theta^T x < 0): points 2, 3 -> tp = 2, fn = 1, fp = 0.
  EXPECT_NEAR(s.f1, 2 * 2.0 / (2 * 2.0 + 1.0), 1e-15);
  EXPECT_NEAR(s.accuracy, 0.75, 1e-15);
}

TEST(Snapshot, RoundTripsEveryFamily) {
  std::vector<DroProblem> problems = {make_quadratic_problem(30, 3, 2, 3, {0.25, 0.75}),
                                      make_imbalanced_logistic(31, 2, 12, 3.0).problem, make_tiny_mlp(32, 2, 3)};
  Rng rng(8);
  for (const auto& p : problems) {
    std::stringstream first;
    write_snapshot(p, first);
    const DroProblem back = read_snapshot(first);
    std::stringstream second;
    write_snapshot(back, second);
    EXPECT_EQ(first.str(), second.str());
    EXPECT_EQ(back.family(), p.family());
    EXPECT_EQ(back.dataset().strata, p.dataset().strata);
    for (int t = 0; t < 10; ++t) {
      ParameterVector theta(static_cast<Eigen::Index>(p.dim()));
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
      const SimplexWeights pi(random_simplex(rng, static_cast<Eigen::Index>(p.groups())), p.prior());
      EXPECT_EQ(objective_h(p, theta, pi), objective_h(back, theta, SimplexWeights(pi.weights(), back.prior())));
    }
  }
}

TEST(Snapshot, RejectsMalformedInput) {
  std::istringstream bad("quadratic 2 1 1\n");
  EXPECT_THROW(read_snapshot(bad), Error);
  std::istringstream unknown("cubic 1 1 1\n1 1\n1\n0\n");
  EXPECT_THROW(read_snapshot(unknown), Error);
}

}  // namespace
}  // namespace drokit
