#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drokit/simplex.hpp"

namespace drokit {

using ParameterVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class LossFamily { quadratic, logistic, tiny_mlp };

std::string to_string(LossFamily family);
LossFamily parse_loss_family(const std::string& name);

/// (group, item) address into a grouped dataset; both zero-based.
struct ItemAddress {
  std::size_t group = 0;
  std::size_t item = 0;
  bool operator==(const ItemAddress&) const = default;
};

/// Per-item constants: |f(a) - f(b)| <= K |a - b| and
/// |grad f(a) - grad f(b)| <= L |a - b|.
struct ItemConstants {
  double value_lipschitz = 0.0;     // K
  double gradient_lipschitz = 0.0;  // L
};

/// Per-item losses f_{i,j} over a parameter of fixed dimension.
///
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual LossFamily family() const = 0;
  virtual std::size_t dim() const = 0;
  virtual const std::vector<std::size_t>& group_sizes() const = 0;

  virtual double value(const ParameterVector& theta, ItemAddress at) const = 0;
  /// out += scale * grad f(theta); returns f(theta).
  virtual double accumulate_gradient(const ParameterVector& theta, ItemAddress at, double scale,
                                     Vector& out) const = 0;
  /// Analytic constants where the family admits them.
  virtual std::optional<ItemConstants> constants(ItemAddress at) const = 0;
};

/// f(theta) = 1/2 |A theta - b|^2 + q^T theta + r.
struct QuadraticItem {
  Matrix a;
  Vector b;
  Vector q;
  double r = 0.0;
};

/// f(theta) = log(1 + exp(-y theta^T x)) with y in {-1, +1}. Any bias term is
/// carried as a constant feature of x.
struct LogisticItem {
  Vector x;
  double y = 1.0;
};

/// Sample for the two-class tanh network, label in {0, 1}.
struct MlpItem {
  Vector x;
  int label = 0;
};

/// Layout of the flattened network parameter:
/// [W1 (hidden x input, row-major) | b1 (hidden) | W2 (2 x hidden, row-major) | b2 (2)].
struct MlpShape {
  std::size_t input_dim = 2;
  std::size_t hidden = 8;
  std::size_t parameter_count() const { return hidden * input_dim + hidden + 2 * hidden + 2; }
};

class QuadraticModel final : public LossModel {
 public:
  /// `radius` bounds the region on which the value-Lipschitz constant K is
  /// reported (the quadratic is not globally Lipschitz).
  QuadraticModel(std::vector<std::vector<QuadraticItem>> groups, double radius);

  LossFamily family() const override { return LossFamily::quadratic; }
  std::size_t dim() const override { return dim_; }
  const std::vector<std::size_t>& group_sizes() const override { return sizes_; }
  double value(const ParameterVector& theta, ItemAddress at) const override;
  double accumulate_gradient(const ParameterVector& theta, ItemAddress at, double scale,
                             Vector& out) const override;
  std::optional<ItemConstants> constants(ItemAddress at) const override;

  const QuadraticItem& item(ItemAddress at) const { return groups_[at.group][at.item]; }
  double radius() const { return radius_; }

 private:
  std::vector<std::vector<QuadraticItem>> groups_;
  std::vector<std::vector<ItemConstants>> constants_;
  std::vector<std::size_t> sizes_;
  std::size_t dim_ = 0;
  double radius_ = 1.0;
};

class LogisticModel final : public LossModel {
 public:
  explicit LogisticModel(std::vector<std::vector<LogisticItem>> groups);

  LossFamily family() const override { return LossFamily::logistic; }
  std::size_t dim() const override { return dim_; }
  const std::vector<std::size_t>& group_sizes() const override { return sizes_; }
  double value(const ParameterVector& theta, ItemAddress at) const override;
  double accumulate_gradient(const ParameterVector& theta, ItemAddress at, double scale,
                             Vector& out) const override;
  std::optional<ItemConstants> constants(ItemAddress at) const override;

  const LogisticItem& item(ItemAddress at) const { return groups_[at.group][at.item]; }

 private:
  std::vector<std::vector<LogisticItem>> groups_;
  std::vector<std::size_t> sizes_;
  std::size_t dim_ = 0;
};

class MlpModel final : public LossModel {
 public:
  MlpModel(MlpShape shape, std::vector<std::vector<MlpItem>> groups);

  LossFamily family() const override { return LossFamily::tiny_mlp; }
  std::size_t dim() const override { return shape_.parameter_count(); }
  const std::vector<std::size_t>& group_sizes() const override { return sizes_; }
  double value(const ParameterVector& theta, ItemAddress at) const override;
  double accumulate_gradient(const ParameterVector& theta, ItemAddress at, double scale,
                             Vector& out) const override;
  std::optional<ItemConstants> constants(ItemAddress) const override { return std::nullopt; }

  const MlpShape& shape() const { return shape_; }
  const MlpItem& item(ItemAddress at) const { return groups_[at.group][at.item]; }
  /// Class scores (pre-softmax) of the network at theta.
  Eigen::Vector2d logits(const ParameterVector& theta, const Vector& x) const;

 private:
  MlpShape shape_;
  std::vector<std::vector<MlpItem>> groups_;
  std::vector<std::size_t> sizes_;
};

/// Group sizes n_1..n_c, n = sum n_i, and an optional stratum label per group
/// (used to compute inverse-frequency static weights; defaults to the group
/// index itself).
struct GroupedDataset {
  std::vector<std::size_t> group_sizes;
  std::size_t total_count = 0;
  std::vector<int> strata;

  std::size_t groups() const { return group_sizes.size(); }
};

/// The KL-regularized grouped objective
///   h(theta, pi) = sum_i pi_i g_i(theta) + tau_theta/2 |theta|^2 - tau_pi KL[pi || prior],
///   g_i(theta)   = (c / n) sum_j f_{i,j}(theta).
class DroProblem {
 public:
  DroProblem(std::shared_ptr<const LossModel> model, double tau_theta, double tau_pi,
             Vector prior, std::vector<int> strata = {});

  const LossModel& model() const { return *model_; }
  std::shared_ptr<const LossModel> model_ptr() const { return model_; }
  const GroupedDataset& dataset() const { return dataset_; }
  LossFamily family() const { return model_->family(); }
  std::size_t dim() const { return model_->dim(); }
  std::size_t groups() const { return dataset_.groups(); }
  std::size_t total_count() const { return dataset_.total_count; }
  double tau_theta() const { return tau_theta_; }
  double tau_pi() const { return tau_pi_; }
  const Vector& prior() const { return prior_; }
  /// c / n.
  double group_scale() const {
    return static_cast<double>(groups()) / static_cast<double>(total_count());
  }

  /// Copy with different regularization.
  DroProblem with_regularization(double tau_theta, double tau_pi) const;

  /// Weights at the prior, truncated at `floor`.
  SimplexWeights initial_weights(double floor = kDefaultFloor) const;

 private:
  std::shared_ptr<const LossModel> model_;
  GroupedDataset dataset_;
  double tau_theta_;
  double tau_pi_;
  Vector prior_;
};

/// Lipschitz metadata for families with analytic constants.
struct LipschitzSummary {
  double max_gradient_lipschitz = 0.0;  // max L_{i,j}
  double max_value_lipschitz = 0.0;     // max K_{i,j}
  double rms_gradient_lipschitz = 0.0;  // sqrt((1/n) sum L_{i,j}^2)
  /// L_F with L_F^2 = 4 [max L^2 + max K^2].
  double operator_lipschitz() const;
};

std::optional<LipschitzSummary> lipschitz_summary(const DroProblem& problem);

double group_loss(const DroProblem& problem, const ParameterVector& theta, std::size_t group);
/// All c group losses g_i(theta).
Vector group_losses(const DroProblem& problem, const ParameterVector& theta);

double objective_h(const DroProblem& problem, const ParameterVector& theta,
                   const SimplexWeights& pi);

/// sum_i pi_i (c/n) sum_j grad f_{i,j}(theta). The tau_theta theta term is
/// added by the optimizers, not here.
Vector grad_theta_full(const DroProblem& problem, const ParameterVector& theta,
                       const SimplexWeights& pi);

struct InnerMax {
  SimplexWeights pi;
  double value = 0.0;
};

/// pi*_i proportional to prior_i exp(g_i / tau_pi) over the full simplex and
/// Phi(theta) = tau_pi log sum_i prior_i exp(g_i / tau_pi) + tau_theta/2 |theta|^2.
/// Throws InvalidArgument when tau_pi == 0.
InnerMax inner_max_closed_form(const DroProblem& problem, const ParameterVector& theta,
                               double floor = kDefaultFloor);

/// Phi(theta) and its gradient sum_i pi*_i grad g_i(theta) + tau_theta theta.
struct MaxValue {
  double value = 0.0;
  Vector gradient;
};
MaxValue max_value_and_gradient(const DroProblem& problem, const ParameterVector& theta);

struct ExpReformulation {
  double value = 0.0;      // may be +inf on overflow
  double log_value = 0.0;  // log of the averaged exponential sum, always finite
};

/// (1/n) sum_i exp(f_i(theta) / tau_pi) + tau_theta/2 |theta|^2 for per-object
/// grouping (c == n). Reference value only.
ExpReformulation exp_reformulation_value(const DroProblem& problem, const ParameterVector& theta);

// ---------------------------------------------------------------------------
// Generators

struct QuadraticOptions {
  double tau_theta = 1.0;
  double tau_pi = 1.0;
  /// Rows of each A_{ij}; 0 means d.
  std::size_t rows = 0;
  /// Entries of A are N(0, a_scale^2 / d); entries of b are N(0, b_scale^2).
  double a_scale = 1.0;
  double b_scale = 1.0;
  /// Radius of the ball on which K_{i,j} is reported; 0 means 2 sqrt(d).
  double radius = 0.0;
};

/// f_{i,j}(theta) = 1/2 |A_{ij} theta - b_{ij}|^2 with Gaussian A, b drawn from
/// the "data" stream of `seed`.
DroProblem make_quadratic_problem(std::uint64_t seed, std::size_t d, std::size_t c,
                                  std::size_t items_per_group, const QuadraticOptions& options = {});

/// Explicit quadratic items; uniform prior.
DroProblem make_quadratic_from_items(std::vector<std::vector<QuadraticItem>> groups,
                                     double tau_theta, double tau_pi, double radius = 1.0);

enum class Grouping { per_object, per_class };

struct ImbalanceOptions {
  double tau_theta = 1e-3;
  double tau_pi = 0.05;
  Grouping grouping = Grouping::per_object;
  std::size_t test_per_class = 500;
  /// Class means are +/- separation/2 along a random unit direction.
  double separation = 2.0;
};

struct LabeledPoint {
  Vector x;   // includes the trailing bias feature
  int label;  // 1 = majority, 0 = minority
};

struct ImbalancedLogistic {
  DroProblem problem;
  std::vector<LabeledPoint> test;  // balanced
  std::size_t majority_count = 0;
  std::size_t minority_count = 0;
  /// Groups holding minority-class items.
  std::vector<std::size_t> minority_groups;
};

/// Two Gaussian clouds in R^d; the majority class has n_per_class points and
/// the minority class n_per_class / uc (at least one). theta has d + 1
/// entries (the last one multiplies a constant bias feature).
ImbalancedLogistic make_imbalanced_logistic(std::uint64_t seed, std::size_t d,
                                            std::size_t n_per_class, double uc,
                                            const ImbalanceOptions& options = {});

struct MlpDataSpec {
  std::size_t groups = 4;
  std::size_t items_per_group = 10;
  double spread = 0.35;
  double tau_theta = 0.0;
  double tau_pi = 0.5;
};

/// One-hidden-layer tanh network with two-class softmax cross-entropy.
/// Group i is a Gaussian cluster centered on a corner of the unit square
/// pattern, labelled i mod 2 (an XOR-like layout).
DroProblem make_tiny_mlp(std::uint64_t seed, std::size_t input_dim, std::size_t hidden,
                         const MlpDataSpec& spec = {});

/// Small random initial parameter for the network (N(0, scale^2) entries).
ParameterVector mlp_initial_parameter(const MlpShape& shape, std::uint64_t seed,
                                      double scale = 0.5);

/// d = 1, c = 2 with f_1(theta) = theta + 1, f_2(theta) = 1 - theta: a
/// bilinear saddle at theta = 0, pi = (1/2, 1/2), unregularized.
DroProblem make_bilinear_toy(double tau_theta = 0.0, double tau_pi = 0.0);

struct ClassificationScore {
  double f1 = 0.0;  // minority class as the positive class
  double accuracy = 0.0;
};

/// Scores a linear classifier sign(theta^T x) on labelled points.
ClassificationScore score_linear_classifier(const ParameterVector& theta,
                                            const std::vector<LabeledPoint>& points);

// ---------------------------------------------------------------------------
// Snapshots

/// Plain-text problem snapshot:
///   line 1: <family> <c> <d> <n_1> ... <n_c>
///   line 2: tau_theta tau_pi [radius]   (radius for quadratic only)
///   line 3: prior_1 ... prior_c
///   line 4: stratum_1 ... stratum_c
///   tiny_mlp only: "mlp <input_dim> <hidden>"
///   then one block per item in group-major order:
///     quadratic: "<rows>" then A rows (row-major), b, q, r
///     logistic:  x entries then y
///     tiny_mlp:  x entries then label
/// Reals use 17 significant digits.
void write_snapshot(const DroProblem& problem, std::ostream& out);
DroProblem read_snapshot(std::istream& in);

}  // namespace drokit
