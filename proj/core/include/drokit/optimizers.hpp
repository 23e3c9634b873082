#pragma once

#include <optional>
#include <string>

#include "drokit/problems.hpp"
#include "drokit/rng.hpp"
#include "drokit/sampling.hpp"
#include "drokit/simplex.hpp"
#include "drokit/trajectory.hpp"

namespace drokit {

// ---------------------------------------------------------------------------
// Optimistic Mirror-Prox (deterministic)

struct OmpConfig {
  double gamma = 0.01;
  /// Stepsize of the pi block; defaults to gamma.
  std::optional<double> gamma_pi;
  /// Momentum; defaults to 1 / (1 + gamma tau) with tau = min(tau_theta, tau_pi).
  std::optional<double> alpha;
  std::size_t iterations = 1000;
  /// Scale both steps by 1 / (1 + gamma tau), i.e. take the exact regularized
  /// prox step instead of the plain linearized one.
  bool prox_scaling = false;
  double floor = kDefaultFloor;
  /// Test-only mutation: flips the sign of the pi-block operator.
  bool pi_sign_fault = false;

  bool operator==(const OmpConfig&) const = default;
};

double default_omp_alpha(double gamma, double tau);
/// tau used in the rate statements: min(tau_theta, tau_pi).
double effective_tau(const DroProblem& problem);
/// Resolves the optional fields of an OmpConfig against a problem.
OmpConfig resolve_omp_config(const DroProblem& problem, OmpConfig config);

struct OmpState {
  ParameterVector theta;
  SimplexWeights pi;
  Vector prev_g;  // operator theta-block at the previous iterate
  Vector prev_p;  // operator pi-block (negated group losses) at the previous iterate
  std::size_t k = 0;
};

/// State at (theta0, pi0) with the previous-operator buffers set to the
/// operator at the starting point.
OmpState omp_init(const DroProblem& problem, ParameterVector theta0, SimplexWeights pi0);
OmpState omp_step(const OmpState& state, const DroProblem& problem, const OmpConfig& config);

TrajectoryRecord run_omp(const DroProblem& problem, const OmpConfig& config,
                         const RecordOptions& record = {},
                         std::optional<ParameterVector> theta0 = std::nullopt);

// ---------------------------------------------------------------------------
// ALSO

enum class PiUpdate { option1, option2 };
enum class AdamVariant { coordinate_wise, scalar_norm };

std::string to_string(PiUpdate u);
std::string to_string(AdamVariant v);
PiUpdate parse_pi_update(const std::string& name);
AdamVariant parse_adam_variant(const std::string& name);

struct AlsoConfig {
  double gamma_theta = 1e-2;
  double gamma_pi = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double alpha = 1.0;
  std::size_t batch = 8;
  std::size_t iterations = 1000;
  PiUpdate pi_update = PiUpdate::option1;
  AdamVariant adam = AdamVariant::coordinate_wise;
  SamplingStrategy sampling = SamplingStrategy::uniform_all;
  /// Truncation level of U for the option2 update.
  double set_floor = 1e-6;
  /// Floor re-applied after every simplex step.
  double floor = kDefaultFloor;
  /// Initial scalar b_0 of the scalar-norm estimator.
  double b0 = 1.0;

  // Switches used by the baselines.
  bool freeze_pi = false;
  bool decoupled_decay = false;  // AdamW-style decay instead of tau_theta theta in the gradient
  bool plain_steps = false;      // no Adam: theta -= gamma_theta * g_hat
  bool pi_sign_fault = false;    // test-only mutation

  bool operator==(const AlsoConfig&) const = default;
};

/// gamma_pi / (1 + gamma_pi tau_pi).
double also_pi_step(const AlsoConfig& config, double tau_pi);

/// The analyzed stationarity regime: alpha = 0, scalar-norm estimator,
/// option2 update.
AlsoConfig stationarity_config(AlsoConfig base);
/// Same problem with tau_theta = 0.
DroProblem stationarity_problem(const DroProblem& problem);

struct AdamMoments {
  Vector m;
  Vector v;           // coordinate_wise only
  double b_sq = 1.0;  // scalar_norm only
  std::size_t t = 0;  // completed updates
};

struct AdamUpdate {
  Vector direction;
  AdamMoments moments;
};

AdamMoments adam_init(std::size_t dim, const AlsoConfig& config);

/// coordinate_wise: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
///   direction = m_hat / (sqrt(v_hat) + eps) with bias-corrected m_hat, v_hat.
/// scalar_norm:     m <- b1 m + (1-b1) g, b^2 <- b2 b^2 + (1-b2) |g|^2,
///   direction = m / b.
AdamUpdate adam_direction(const AdamMoments& moments, const Vector& g_hat, const AlsoConfig& config);

struct AlsoState {
  ParameterVector theta;
  SimplexWeights pi;
  AdamMoments adam;
  Vector prev_g;
  Vector prev_p;
  std::size_t k = 0;
};

/// Zero moments and zero optimistic buffers; pi0 defaults to the prior.
AlsoState also_init(const DroProblem& problem, const AlsoConfig& config, ParameterVector theta0,
                    std::optional<SimplexWeights> pi0 = std::nullopt);
AlsoState also_step(const AlsoState& state, const DroProblem& problem, const AlsoConfig& config,
                    Rng& rng);

TrajectoryRecord run_also(const DroProblem& problem, const AlsoConfig& config, Rng& rng,
                          const RecordOptions& record = {},
                          std::optional<ParameterVector> theta0 = std::nullopt,
                          std::optional<SimplexWeights> pi0 = std::nullopt);

// ---------------------------------------------------------------------------
// Baselines

enum class BaselineVariant { adam_uniform, adamw_uniform, static_weights, sgda };

std::string to_string(BaselineVariant v);
BaselineVariant parse_baseline_variant(const std::string& name);

/// Inverse-frequency weights: pi_i proportional to 1 / (items in the stratum of group i).
Vector static_weights(const DroProblem& problem);

/// adam_uniform / adamw_uniform: pi frozen at uniform (AdamW applies
/// decoupled decay); static_weights: pi frozen at inverse-frequency weights;
/// sgda: alpha = 0 with plain gradient steps on theta and option1 on pi.
TrajectoryRecord run_baseline(const DroProblem& problem, BaselineVariant variant,
                              const AlsoConfig& config, Rng& rng, const RecordOptions& record = {},
                              std::optional<ParameterVector> theta0 = std::nullopt);

}  // namespace drokit
