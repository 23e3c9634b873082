#include "drokit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "drokit/error.hpp"
#include "drokit/rng.hpp"

namespace drokit {

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::quadratic: return "quadratic";
    case LossFamily::logistic: return "logistic";
    case LossFamily::tiny_mlp: return "tiny_mlp";
  }
  return "unknown";
}

LossFamily parse_loss_family(const std::string& name) {
  if (name == "quadratic") return LossFamily::quadratic;
  if (name == "logistic") return LossFamily::logistic;
  if (name == "tiny_mlp") return LossFamily::tiny_mlp;
  throw InvalidArgument("unknown loss family '" + name + "'");
}

namespace {

template <typename Item>
std::vector<std::size_t> sizes_of(const std::vector<std::vector<Item>>& groups) {
  if (groups.empty()) throw InvalidArgument("dataset needs at least one group");
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("every group needs at least one item");
    sizes.push_back(g.size());
  }
  return sizes;
}

void check_address(const std::vector<std::size_t>& sizes, ItemAddress at) {
  if (at.group >= sizes.size() || at.item >= sizes[at.group]) {
    throw InvalidArgument("item address out of range");
  }
}

void check_theta(const ParameterVector& theta, std::size_t dim) {
  if (static_cast<std::size_t>(theta.size()) != dim) {
    throw DimensionMismatch("parameter has length " + std::to_string(theta.size()) +
                            ", problem dimension is " + std::to_string(dim));
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(const Vector& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

}  // namespace

// ---------------------------------------------------------------------------
// QuadraticModel

QuadraticModel::QuadraticModel(std::vector<std::vector<QuadraticItem>> groups, double radius)
    : groups_(std::move(groups)), sizes_(sizes_of(groups_)), radius_(radius) {
  if (!(radius_ > 0.0)) throw InvalidArgument("QuadraticModel: radius must be positive");
  dim_ = static_cast<std::size_t>(groups_.front().front().a.cols());
  constants_.resize(groups_.size());
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    for (auto& item : groups_[i]) {
      if (static_cast<std::size_t>(item.a.cols()) != dim_) {
        throw DimensionMismatch("QuadraticModel: inconsistent parameter dimension");
      }
      if (item.b.size() != item.a.rows()) throw DimensionMismatch("QuadraticModel: |b| != rows(A)");
      if (item.q.size() == 0) item.q = Vector::Zero(item.a.cols());
      if (static_cast<std::size_t>(item.q.size()) != dim_) {
        throw DimensionMismatch("QuadraticModel: |q| != d");
      }
      const Matrix gram = item.a.transpose() * item.a;
      double lmax = 0.0;
      if (gram.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
        lmax = std::max(0.0, eig.eigenvalues().maxCoeff());
      }
      const Vector offset = item.q - item.a.transpose() * item.b;
      constants_[i].push_back({lmax * radius_ + offset.norm(), lmax});
    }
  }
}

double QuadraticModel::value(const ParameterVector& theta, ItemAddress at) const {
  check_address(sizes_, at);
  check_theta(theta, dim_);
  const auto& it = groups_[at.group][at.item];
  const Vector residual = it.a * theta - it.b;
  return 0.5 * residual.squaredNorm() + it.q.dot(theta) + it.r;
}

double QuadraticModel::accumulate_gradient(const ParameterVector& theta, ItemAddress at,
                                           double scale, Vector& out) const {
  check_address(sizes_, at);
  check_theta(theta, dim_);
  const auto& it = groups_[at.group][at.item];
  const Vector residual = it.a * theta - it.b;
  out.noalias() += scale * (it.a.transpose() * residual + it.q);
  return 0.5 * residual.squaredNorm() + it.q.dot(theta) + it.r;
}

std::optional<ItemConstants> QuadraticModel::constants(ItemAddress at) const {
  check_address(sizes_, at);
  return constants_[at.group][at.item];
}

// ---------------------------------------------------------------------------
// LogisticModel

LogisticModel::LogisticModel(std::vector<std::vector<LogisticItem>> groups)
    : groups_(std::move(groups)), sizes_(sizes_of(groups_)) {
  dim_ = static_cast<std::size_t>(groups_.front().front().x.size());
  for (const auto& g : groups_) {
    for (const auto& item : g) {
      if (static_cast<std::size_t>(item.x.size()) != dim_) {
        throw DimensionMismatch("LogisticModel: inconsistent feature dimension");
      }
      if (item.y != 1.0 && item.y != -1.0) throw InvalidArgument("LogisticModel: y must be +/-1");
    }
  }
}

double LogisticModel::value(const ParameterVector& theta, ItemAddress at) const {
  check_address(sizes_, at);
  check_theta(theta, dim_);
  const auto& it = groups_[at.group][at.item];
  return softplus(-it.y * theta.dot(it.x));
}

double LogisticModel::accumulate_gradient(const ParameterVector& theta, ItemAddress at,
                                          double scale, Vector& out) const {
  check_address(sizes_, at);
  check_theta(theta, dim_);
  const auto& it = groups_[at.group][at.item];
  const double margin = it.y * theta.dot(it.x);
  // d/dtheta log(1 + exp(-m)) = -y sigmoid(-m) x
  out.noalias() += (scale * -it.y * sigmoid(-margin)) * it.x;
  return softplus(-margin);
}

std::optional<ItemConstants> LogisticModel::constants(ItemAddress at) const {
  check_address(sizes_, at);
  const double norm = groups_[at.group][at.item].x.norm();
  return ItemConstants{norm, 0.25 * norm * norm};
}

// ---------------------------------------------------------------------------
// MlpModel

MlpModel::MlpModel(MlpShape shape, std::vector<std::vector<MlpItem>> groups)
    : shape_(shape), groups_(std::move(groups)), sizes_(sizes_of(groups_)) {
  if (shape_.input_dim == 0 || shape_.hidden == 0) throw InvalidArgument("MlpModel: empty layer");
  for (const auto& g : groups_) {
    for (const auto& item : g) {
      if (static_cast<std::size_t>(item.x.size()) != shape_.input_dim) {
        throw DimensionMismatch("MlpModel: input dimension mismatch");
      }
      if (item.label != 0 && item.label != 1) throw InvalidArgument("MlpModel: label must be 0/1");
    }
  }
}

namespace {

struct MlpView {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor>> w2;
  Eigen::Map<const Eigen::Vector2d> b2;

  MlpView(const MlpShape& s, const ParameterVector& theta)
      : w1(theta.data(), static_cast<Eigen::Index>(s.hidden), static_cast<Eigen::Index>(s.input_dim)),
        b1(theta.data() + s.hidden * s.input_dim, static_cast<Eigen::Index>(s.hidden)),
        w2(theta.data() + s.hidden * s.input_dim + s.hidden, 2, static_cast<Eigen::Index>(s.hidden)),
        b2(theta.data() + s.hidden * s.input_dim + 3 * s.hidden) {}
};

}  // namespace

Eigen::Vector2d MlpModel::logits(const ParameterVector& theta, const Vector& x) const {
  check_theta(theta, dim());
  const MlpView net(shape_, theta);
  const Vector hidden = (net.w1 * x + net.b1).array().tanh().matrix();
  return net.w2 * hidden + net.b2;
}

double MlpModel::value(const ParameterVector& theta, ItemAddress at) const {
  check_address(sizes_, at);
  const auto& it = groups_[at.group][at.item];
  const Eigen::Vector2d z = logits(theta, it.x);
  return log_sum_exp(z) - z[it.label];
}

double MlpModel::accumulate_gradient(const ParameterVector& theta, ItemAddress at, double scale,
                                     Vector& out) const {
  check_address(sizes_, at);
  check_theta(theta, dim());
  const auto& it = groups_[at.group][at.item];
  const MlpView net(shape_, theta);
  const auto h = static_cast<Eigen::Index>(shape_.hidden);
  const auto in = static_cast<Eigen::Index>(shape_.input_dim);

  const Vector hidden = (net.w1 * it.x + net.b1).array().tanh().matrix();
  const Eigen::Vector2d z = net.w2 * hidden + net.b2;
  const double lse = log_sum_exp(z);
  Eigen::Vector2d dz = (z.array() - lse).exp().matrix();
  dz[it.label] -= 1.0;

  const Vector dhidden = net.w2.transpose() * dz;
  const Vector dpre = dhidden.cwiseProduct((1.0 - hidden.array().square()).matrix());

  double* g = out.data();
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw1(g, h, in);
  gw1.noalias() += scale * dpre * it.x.transpose();
  Eigen::Map<Vector>(g + h * in, h) += scale * dpre;
  Eigen::Map<Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor>> gw2(g + h * in + h, 2, h);
  gw2.noalias() += scale * dz * hidden.transpose();
  Eigen::Map<Eigen::Vector2d>(g + h * in + 3 * h) += scale * dz;
  return lse - z[it.label];
}

// ---------------------------------------------------------------------------
// DroProblem

DroProblem::DroProblem(std::shared_ptr<const LossModel> model, double tau_theta, double tau_pi,
                       Vector prior, std::vector<int> strata)
    : model_(std::move(model)), tau_theta_(tau_theta), tau_pi_(tau_pi), prior_(std::move(prior)) {
  if (!model_) throw InvalidArgument("DroProblem: null loss model");
  if (!(tau_theta_ >= 0.0) || !(tau_pi_ >= 0.0)) {
    throw InvalidArgument("DroProblem: regularization must be non-negative");
  }
  dataset_.group_sizes = model_->group_sizes();
  dataset_.total_count = 0;
  for (auto s : dataset_.group_sizes) dataset_.total_count += s;
  const std::size_t c = dataset_.group_sizes.size();
  if (static_cast<std::size_t>(prior_.size()) != c) {
    throw DimensionMismatch("DroProblem: prior length differs from group count");
  }
  check_simplex(prior_, 0.0, "DroProblem.prior");
  if (prior_.minCoeff() <= 0.0) throw InvalidArgument("DroProblem: prior must be strictly positive");
  if (strata.empty()) {
    strata.resize(c);
    for (std::size_t i = 0; i < c; ++i) strata[i] = static_cast<int>(i);
  }
  if (strata.size() != c) throw DimensionMismatch("DroProblem: strata length differs from c");
  dataset_.strata = std::move(strata);
}

DroProblem DroProblem::with_regularization(double tau_theta, double tau_pi) const {
  return DroProblem(model_, tau_theta, tau_pi, prior_, dataset_.strata);
}

SimplexWeights DroProblem::initial_weights(double floor) const {
  return SimplexWeights(clamp_to_floor(prior_, floor), prior_, floor);
}

double LipschitzSummary::operator_lipschitz() const {
  return 2.0 * std::sqrt(max_gradient_lipschitz * max_gradient_lipschitz +
                         max_value_lipschitz * max_value_lipschitz);
}

std::optional<LipschitzSummary> lipschitz_summary(const DroProblem& problem) {
  LipschitzSummary s;
  double sum_sq = 0.0;
  const auto& sizes = problem.dataset().group_sizes;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t j = 0; j < sizes[i]; ++j) {
      auto k = problem.model().constants({i, j});
      if (!k) return std::nullopt;
      s.max_gradient_lipschitz = std::max(s.max_gradient_lipschitz, k->gradient_lipschitz);
      s.max_value_lipschitz = std::max(s.max_value_lipschitz, k->value_lipschitz);
      sum_sq += k->gradient_lipschitz * k->gradient_lipschitz;
    }
  }
  s.rms_gradient_lipschitz = std::sqrt(sum_sq / static_cast<double>(problem.total_count()));
  return s;
}

double group_loss(const DroProblem& problem, const ParameterVector& theta, std::size_t group) {
  if (group >= problem.groups()) throw InvalidArgument("group_loss: group index out of range");
  double sum = 0.0;
  const std::size_t size = problem.dataset().group_sizes[group];
  for (std::size_t j = 0; j < size; ++j) sum += problem.model().value(theta, {group, j});
  return problem.group_scale() * sum;
}

Vector group_losses(const DroProblem& problem, const ParameterVector& theta) {
  Vector g(static_cast<Eigen::Index>(problem.groups()));
  for (std::size_t i = 0; i < problem.groups(); ++i) g[static_cast<Eigen::Index>(i)] = group_loss(problem, theta, i);
  return g;
}

double objective_h(const DroProblem& problem, const ParameterVector& theta,
                   const SimplexWeights& pi) {
  if (static_cast<std::size_t>(pi.size()) != problem.groups()) {
    throw DimensionMismatch("objective_h: weight vector length differs from group count");
  }
  const Vector g = group_losses(problem, theta);
  double value = pi.weights().dot(g) + 0.5 * problem.tau_theta() * theta.squaredNorm();
  if (problem.tau_pi() != 0.0) value -= problem.tau_pi() * kl_divergence(pi.weights(), problem.prior());
  return value;
}

Vector grad_theta_full(const DroProblem& problem, const ParameterVector& theta,
                       const SimplexWeights& pi) {
  if (static_cast<std::size_t>(pi.size()) != problem.groups()) {
    throw DimensionMismatch("grad_theta_full: weight vector length differs from group count");
  }
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  const double scale = problem.group_scale();
  const auto& sizes = problem.dataset().group_sizes;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double w = pi[static_cast<Eigen::Index>(i)] * scale;
    for (std::size_t j = 0; j < sizes[i]; ++j) problem.model().accumulate_gradient(theta, {i, j}, w, grad);
  }
  return grad;
}

InnerMax inner_max_closed_form(const DroProblem& problem, const ParameterVector& theta,
                               double floor) {
  const double tau = problem.tau_pi();
  if (tau == 0.0) {
    throw InvalidArgument("inner_max_closed_form: tau_pi = 0 has no closed form; use a hard max");
  }
  const Vector g = group_losses(problem, theta);
  const Vector z = problem.prior().array().log().matrix() + g / tau;
  const double value = tau * log_sum_exp(z) + 0.5 * problem.tau_theta() * theta.squaredNorm();
  SimplexWeights pi(clamp_to_floor(softmax(z), floor), problem.prior(), floor);
  return {std::move(pi), value};
}

MaxValue max_value_and_gradient(const DroProblem& problem, const ParameterVector& theta) {
  const InnerMax best = inner_max_closed_form(problem, theta, 0.0);
  Vector grad = grad_theta_full(problem, theta, best.pi) + problem.tau_theta() * theta;
  return {best.value, std::move(grad)};
}

ExpReformulation exp_reformulation_value(const DroProblem& problem, const ParameterVector& theta) {
  if (problem.groups() != problem.total_count()) {
    throw InvalidArgument("exp_reformulation_value: requires per-object grouping (c == n)");
  }
  if (problem.tau_pi() <= 0.0) throw InvalidArgument("exp_reformulation_value: tau_pi must be > 0");
  const std::size_t n = problem.total_count();
  Vector z(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    z[static_cast<Eigen::Index>(i)] = problem.model().value(theta, {i, 0}) / problem.tau_pi();
  }
  const double log_mean = log_sum_exp(z) - std::log(static_cast<double>(n));
  const double reg = 0.5 * problem.tau_theta() * theta.squaredNorm();
  return {std::exp(log_mean) + reg, log_mean};
}

// ---------------------------------------------------------------------------
// Generators

DroProblem make_quadratic_problem(std::uint64_t seed, std::size_t d, std::size_t c,
                                  std::size_t items_per_group, const QuadraticOptions& options) {
  if (d == 0 || c == 0 || items_per_group == 0) {
    throw InvalidArgument("make_quadratic_problem: dimensions must be positive");
  }
  Rng rng = Rng::stream(seed, "data");
  const std::size_t rows = options.rows == 0 ? d : options.rows;
  const double a_sd = options.a_scale / std::sqrt(static_cast<double>(d));
  std::vector<std::vector<QuadraticItem>> groups(c);
  for (auto& group : groups) {
    for (std::size_t j = 0; j < items_per_group; ++j) {
      QuadraticItem item;
      item.a.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
      for (Eigen::Index r = 0; r < item.a.rows(); ++r) {
        for (Eigen::Index k = 0; k < item.a.cols(); ++k) item.a(r, k) = a_sd * rng.normal();
      }
      item.b.resize(static_cast<Eigen::Index>(rows));
      for (Eigen::Index r = 0; r < item.b.size(); ++r) item.b[r] = options.b_scale * rng.normal();
      item.q = Vector::Zero(static_cast<Eigen::Index>(d));
      group.push_back(std::move(item));
    }
  }
  const double radius = options.radius > 0.0 ? options.radius : 2.0 * std::sqrt(static_cast<double>(d));
  return make_quadratic_from_items(std::move(groups), options.tau_theta, options.tau_pi, radius);
}

DroProblem make_quadratic_from_items(std::vector<std::vector<QuadraticItem>> groups,
                                     double tau_theta, double tau_pi, double radius) {
  const auto c = static_cast<Eigen::Index>(groups.size());
  auto model = std::make_shared<QuadraticModel>(std::move(groups), radius);
  return DroProblem(std::move(model), tau_theta, tau_pi, Vector::Constant(c, 1.0 / static_cast<double>(c)));
}

ImbalancedLogistic make_imbalanced_logistic(std::uint64_t seed, std::size_t d,
                                            std::size_t n_per_class, double uc,
                                            const ImbalanceOptions& options) {
  if (!(uc >= 1.0)) throw InvalidArgument("make_imbalanced_logistic: uc must be >= 1");
  if (d == 0 || n_per_class == 0) throw InvalidArgument("make_imbalanced_logistic: degenerate sizes");
  const auto minority = static_cast<std::size_t>(std::floor(static_cast<double>(n_per_class) / uc));
  if (minority == 0) throw InvalidArgument("make_imbalanced_logistic: minority class would be empty");

  Rng rng = Rng::stream(seed, "data");
  Vector direction(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < direction.size(); ++k) direction[k] = rng.normal();
  direction.normalize();
  const Vector offset = 0.5 * options.separation * direction;

  auto draw = [&](int label) {
    Vector x(static_cast<Eigen::Index>(d + 1));
    for (std::size_t k = 0; k < d; ++k) x[static_cast<Eigen::Index>(k)] = rng.normal();
    x.head(static_cast<Eigen::Index>(d)) += label == 1 ? offset : Vector(-offset);
    x[static_cast<Eigen::Index>(d)] = 1.0;
    return LabeledPoint{std::move(x), label};
  };

  std::vector<LabeledPoint> train;
  for (std::size_t i = 0; i < n_per_class; ++i) train.push_back(draw(1));
  for (std::size_t i = 0; i < minority; ++i) train.push_back(draw(0));
  std::vector<LabeledPoint> test;
  for (std::size_t i = 0; i < options.test_per_class; ++i) {
    test.push_back(draw(1));
    test.push_back(draw(0));
  }

  auto as_item = [](const LabeledPoint& p) { return LogisticItem{p.x, p.label == 1 ? 1.0 : -1.0}; };
  std::vector<std::vector<LogisticItem>> groups;
  std::vector<int> strata;
  std::vector<std::size_t> minority_groups;
  if (options.grouping == Grouping::per_object) {
    for (const auto& p : train) {
      if (p.label == 0) minority_groups.push_back(groups.size());
      groups.push_back({as_item(p)});
      strata.push_back(p.label);
    }
  } else {
    groups.resize(2);
    for (const auto& p : train) groups[p.label == 1 ? 0 : 1].push_back(as_item(p));
    strata = {0, 1};
    minority_groups = {1};
  }
  const auto c = static_cast<Eigen::Index>(groups.size());
  auto model = std::make_shared<LogisticModel>(std::move(groups));
  DroProblem problem(std::move(model), options.tau_theta, options.tau_pi,
                     Vector::Constant(c, 1.0 / static_cast<double>(c)), std::move(strata));
  return ImbalancedLogistic{std::move(problem), std::move(test), n_per_class, minority,
                            std::move(minority_groups)};
}

DroProblem make_tiny_mlp(std::uint64_t seed, std::size_t input_dim, std::size_t hidden,
                         const MlpDataSpec& spec) {
  if (input_dim < 2) throw InvalidArgument("make_tiny_mlp: input_dim must be >= 2");
  if (spec.groups == 0 || spec.items_per_group == 0) throw InvalidArgument("make_tiny_mlp: empty data");
  static constexpr double kCorners[4][2] = {{1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
  Rng rng = Rng::stream(seed, "data");
  std::vector<std::vector<MlpItem>> groups(spec.groups);
  for (std::size_t i = 0; i < spec.groups; ++i) {
    const auto& corner = kCorners[i % 4];
    for (std::size_t j = 0; j < spec.items_per_group; ++j) {
      Vector x(static_cast<Eigen::Index>(input_dim));
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = spec.spread * rng.normal();
      x[0] += corner[0];
      x[1] += corner[1];
      groups[i].push_back({std::move(x), static_cast<int>(i % 2)});
    }
  }
  auto model = std::make_shared<MlpModel>(MlpShape{input_dim, hidden}, std::move(groups));
  const auto c = static_cast<Eigen::Index>(spec.groups);
  return DroProblem(std::move(model), spec.tau_theta, spec.tau_pi,
                    Vector::Constant(c, 1.0 / static_cast<double>(c)));
}

ParameterVector mlp_initial_parameter(const MlpShape& shape, std::uint64_t seed, double scale) {
  Rng rng = Rng::stream(seed, "init");
  ParameterVector theta(static_cast<Eigen::Index>(shape.parameter_count()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = scale * rng.normal();
  return theta;
}

DroProblem make_bilinear_toy(double tau_theta, double tau_pi) {
  auto linear = [](double slope) {
    QuadraticItem item;
    item.a = Matrix::Zero(1, 1);
    item.b = Vector::Zero(1);
    item.q = Vector::Constant(1, slope);
    item.r = 1.0;
    return item;
  };
  std::vector<std::vector<QuadraticItem>> groups{{linear(1.0)}, {linear(-1.0)}};
  return make_quadratic_from_items(std::move(groups), tau_theta, tau_pi, 1.0);
}

ClassificationScore score_linear_classifier(const ParameterVector& theta,
                                            const std::vector<LabeledPoint>& points) {
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (const auto& p : points) {
    const bool predicted_minority = theta.dot(p.x) < 0.0;
    const bool is_minority = p.label == 0;
    if (predicted_minority == is_minority) ++correct;
    if (predicted_minority && is_minority) ++tp;
    if (predicted_minority && !is_minority) ++fp;
    if (!predicted_minority && is_minority) ++fn;
  }
  ClassificationScore score;
  const double denom = static_cast<double>(2 * tp + fp + fn);
  score.f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  score.accuracy = points.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(points.size());
  return score;
}

}  // namespace drokit
