#include "drokit/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "drokit/diagnostics.hpp"
#include "drokit/error.hpp"

namespace drokit {

// ---------------------------------------------------------------------------
// Trajectory

void TrajectoryRecord::append(TrajectoryRow row) {
  if (!rows.empty() && row.k <= rows.back().k) {
    throw InvalidArgument("TrajectoryRecord: rows must be strictly increasing in k");
  }
  rows.push_back(std::move(row));
}

std::vector<double> TrajectoryRecord::column_phi_k() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.phi_k);
  return out;
}

std::vector<double> TrajectoryRecord::column_k() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(static_cast<double>(r.k));
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(const DroProblem& problem, const RecordOptions& options)
      : problem_(problem), options_(options), start_(Clock::now()) {}

  bool due(std::size_t k, std::size_t last) const {
    if (k == 0 || k == last) return true;
    return options_.every > 0 && k % options_.every == 0;
  }

  // Returns true when the early-stop threshold has been reached.
  bool record(TrajectoryRecord& out, std::size_t k, const ParameterVector& theta,
              const SimplexWeights& pi) {
    TrajectoryRow row;
    row.k = k;
    row.h = objective_h(problem_, theta, pi);
    if (options_.compute_phi && problem_.tau_pi() > 0.0) {
      row.phi = inner_max_closed_form(problem_, theta).value;
    }
    if (options_.reference) row.phi_k = lyapunov_phi(theta, pi, *options_.reference);
    if (options_.moreau_every > 0 && k % options_.moreau_every == 0) {
      MoreauOptions mo;
      mo.budget = options_.moreau_budget;
      mo.seed = options_.moreau_seed;
      row.moreau_grad = moreau_grad_norm(problem_, theta, options_.moreau_constant, mo);
    }
    if (options_.record_pi) row.pi = pi.weights();
    if (options_.record_theta) row.theta = theta;
    row.grad_norm = (grad_theta_full(problem_, theta, pi) + problem_.tau_theta() * theta).norm();
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    const bool stop = options_.stop_phi_below > 0.0 && row.phi_k < options_.stop_phi_below;
    out.append(std::move(row));
    return stop;
  }

 private:
  const DroProblem& problem_;
  const RecordOptions& options_;
  Clock::time_point start_;
};

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteValue(std::string(what) + " is not finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// Optimistic Mirror-Prox

double default_omp_alpha(double gamma, double tau) { return 1.0 / (1.0 + gamma * tau); }

double effective_tau(const DroProblem& problem) {
  return std::min(problem.tau_theta(), problem.tau_pi());
}

OmpConfig resolve_omp_config(const DroProblem& problem, OmpConfig config) {
  if (!(config.gamma > 0.0)) throw InvalidArgument("OmpConfig: gamma must be positive");
  if (!config.gamma_pi) config.gamma_pi = config.gamma;
  if (!(*config.gamma_pi >= 0.0)) throw InvalidArgument("OmpConfig: gamma_pi must be non-negative");
  if (!config.alpha) config.alpha = default_omp_alpha(config.gamma, effective_tau(problem));
  return config;
}

OmpState omp_init(const DroProblem& problem, ParameterVector theta0, SimplexWeights pi0) {
  if (static_cast<std::size_t>(theta0.size()) != problem.dim()) {
    throw DimensionMismatch("omp_init: theta0 has the wrong length");
  }
  const StochasticEstimate op = exact_estimate(problem, pi0, theta0);
  return OmpState{std::move(theta0), std::move(pi0), op.g, op.p, 0};
}

OmpState omp_step(const OmpState& state, const DroProblem& problem, const OmpConfig& raw) {
  const OmpConfig config = resolve_omp_config(problem, raw);
  const double alpha = *config.alpha;
  const double tau_theta = problem.tau_theta();
  const double tau_pi = problem.tau_pi();

  const StochasticEstimate op = exact_estimate(problem, state.pi, state.theta);
  check_finite(op.g, "omp_step: theta operator");
  check_finite(op.p, "omp_step: pi operator");

  const Vector g_hat = (1.0 + alpha) * op.g - alpha * state.prev_g;
  Vector p_hat = (1.0 + alpha) * op.p - alpha * state.prev_p;
  if (config.pi_sign_fault) p_hat = -p_hat;

  double step_theta = config.gamma;
  double step_pi = *config.gamma_pi;
  if (config.prox_scaling) {
    step_theta /= 1.0 + config.gamma * tau_theta;
    step_pi /= 1.0 + *config.gamma_pi * tau_pi;
  }

  OmpState next{state.theta - step_theta * (g_hat + tau_theta * state.theta),
                mirror_step(state.pi, p_hat, step_pi, tau_pi), op.g, op.p, state.k + 1};
  check_finite(next.theta, "omp_step: theta");
  return next;
}

TrajectoryRecord run_omp(const DroProblem& problem, const OmpConfig& raw,
                         const RecordOptions& record, std::optional<ParameterVector> theta0) {
  const OmpConfig config = resolve_omp_config(problem, raw);
  ParameterVector start = theta0 ? std::move(*theta0) : ParameterVector::Zero(static_cast<Eigen::Index>(problem.dim()));
  OmpState state = omp_init(problem, std::move(start), problem.initial_weights(config.floor));

  TrajectoryRecord out;
  out.solver = "omp";
  Recorder recorder(problem, record);
  bool stop = recorder.record(out, 0, state.theta, state.pi);
  for (std::size_t k = 1; k <= config.iterations && !stop; ++k) {
    state = omp_step(state, problem, config);
    if (recorder.due(k, config.iterations)) stop = recorder.record(out, k, state.theta, state.pi);
  }
  out.final_theta = state.theta;
  out.final_pi = state.pi.weights();
  return out;
}

// ---------------------------------------------------------------------------
// ALSO

std::string to_string(PiUpdate u) { return u == PiUpdate::option1 ? "option1" : "option2"; }

std::string to_string(AdamVariant v) {
  return v == AdamVariant::coordinate_wise ? "coordinate_wise" : "scalar_norm";
}

PiUpdate parse_pi_update(const std::string& name) {
  if (name == "option1") return PiUpdate::option1;
  if (name == "option2") return PiUpdate::option2;
  throw InvalidArgument("unknown pi update '" + name + "'");
}

AdamVariant parse_adam_variant(const std::string& name) {
  if (name == "coordinate_wise") return AdamVariant::coordinate_wise;
  if (name == "scalar_norm") return AdamVariant::scalar_norm;
  throw InvalidArgument("unknown adam variant '" + name + "'");
}

double also_pi_step(const AlsoConfig& config, double tau_pi) {
  return config.gamma_pi / (1.0 + config.gamma_pi * tau_pi);
}

AlsoConfig stationarity_config(AlsoConfig base) {
  base.alpha = 0.0;
  base.adam = AdamVariant::scalar_norm;
  base.pi_update = PiUpdate::option2;
  return base;
}

DroProblem stationarity_problem(const DroProblem& problem) {
  return problem.with_regularization(0.0, problem.tau_pi());
}

AdamMoments adam_init(std::size_t dim, const AlsoConfig& config) {
  if (config.adam == AdamVariant::scalar_norm && !(config.b0 > 0.0)) {
    throw InvalidArgument("adam_init: scalar-norm estimator needs b0 > 0");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  return AdamMoments{Vector::Zero(d), Vector::Zero(d), config.b0 * config.b0, 0};
}

AdamUpdate adam_direction(const AdamMoments& moments, const Vector& g_hat, const AlsoConfig& config) {
  check_finite(g_hat, "adam_direction: gradient");
  AdamUpdate out{Vector(), moments};
  AdamMoments& mo = out.moments;
  mo.t += 1;
  mo.m = config.beta1 * mo.m + (1.0 - config.beta1) * g_hat;
  if (config.adam == AdamVariant::coordinate_wise) {
    mo.v = config.beta2 * mo.v + (1.0 - config.beta2) * g_hat.cwiseProduct(g_hat);
    const double t = static_cast<double>(mo.t);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    const Vector m_hat = mo.m / c1;
    const Vector v_hat = mo.v / c2;
    out.direction = m_hat.array() / (v_hat.array().sqrt() + config.eps);
  } else {
    mo.b_sq = config.beta2 * mo.b_sq + (1.0 - config.beta2) * g_hat.squaredNorm();
    out.direction = mo.m / std::sqrt(mo.b_sq);
  }
  return out;
}

AlsoState also_init(const DroProblem& problem, const AlsoConfig& config, ParameterVector theta0,
                    std::optional<SimplexWeights> pi0) {
  if (static_cast<std::size_t>(theta0.size()) != problem.dim()) {
    throw DimensionMismatch("also_init: theta0 has the wrong length");
  }
  SimplexWeights pi = pi0 ? std::move(*pi0) : problem.initial_weights(config.floor);
  if (static_cast<std::size_t>(pi.size()) != problem.groups()) {
    throw DimensionMismatch("also_init: pi0 has the wrong length");
  }
  const auto d = static_cast<Eigen::Index>(problem.dim());
  const auto c = static_cast<Eigen::Index>(problem.groups());
  return AlsoState{std::move(theta0), std::move(pi), adam_init(problem.dim(), config),
                   Vector::Zero(d), Vector::Zero(c), 0};
}

AlsoState also_step(const AlsoState& state, const DroProblem& problem, const AlsoConfig& config,
                    Rng& rng) {
  const double alpha = config.alpha;
  const double tau_theta = problem.tau_theta();

  const SampleBatch batch = draw_batch(config.sampling, problem, state.pi, config.batch, rng);
  const StochasticEstimate est = estimate_from_batch(problem, state.theta, batch);

  Vector g_hat = (1.0 + alpha) * est.g - alpha * state.prev_g;
  if (!config.decoupled_decay) g_hat += tau_theta * state.theta;
  Vector p_hat = (1.0 + alpha) * est.p - alpha * state.prev_p;
  if (config.pi_sign_fault) p_hat = -p_hat;

  AlsoState next{state.theta, state.pi, state.adam, est.g, est.p, state.k + 1};
  if (config.plain_steps) {
    next.theta -= config.gamma_theta * g_hat;
  } else {
    AdamUpdate update = adam_direction(state.adam, g_hat, config);
    next.theta -= config.gamma_theta * update.direction;
    next.adam = std::move(update.moments);
  }
  if (config.decoupled_decay) next.theta -= config.gamma_theta * tau_theta * state.theta;
  check_finite(next.theta, "also_step: theta");

  if (!config.freeze_pi) {
    if (config.pi_update == PiUpdate::option1) {
      next.pi = entropic_prox_step(state.pi, p_hat, config.gamma_pi, problem.tau_pi());
    } else {
      next.pi = constrained_prox_step(state.pi, p_hat, config.gamma_pi, problem.tau_pi(), config.set_floor);
    }
  }
  return next;
}

TrajectoryRecord run_also(const DroProblem& problem, const AlsoConfig& config, Rng& rng,
                          const RecordOptions& record, std::optional<ParameterVector> theta0,
                          std::optional<SimplexWeights> pi0) {
  ParameterVector start = theta0 ? std::move(*theta0) : ParameterVector::Zero(static_cast<Eigen::Index>(problem.dim()));
  AlsoState state = also_init(problem, config, std::move(start), std::move(pi0));

  TrajectoryRecord out;
  out.solver = "also";
  Recorder recorder(problem, record);
  bool stop = recorder.record(out, 0, state.theta, state.pi);
  for (std::size_t k = 1; k <= config.iterations && !stop; ++k) {
    state = also_step(state, problem, config, rng);
    if (recorder.due(k, config.iterations)) stop = recorder.record(out, k, state.theta, state.pi);
  }
  out.final_theta = state.theta;
  out.final_pi = state.pi.weights();
  return out;
}

// ---------------------------------------------------------------------------
// Baselines

std::string to_string(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::adam_uniform: return "adam_uniform";
    case BaselineVariant::adamw_uniform: return "adamw_uniform";
    case BaselineVariant::static_weights: return "static_weights";
    case BaselineVariant::sgda: return "sgda";
  }
  return "unknown";
}

BaselineVariant parse_baseline_variant(const std::string& name) {
  if (name == "adam_uniform") return BaselineVariant::adam_uniform;
  if (name == "adamw_uniform") return BaselineVariant::adamw_uniform;
  if (name == "static_weights") return BaselineVariant::static_weights;
  if (name == "sgda") return BaselineVariant::sgda;
  throw InvalidArgument("unknown baseline '" + name + "'");
}

Vector static_weights(const DroProblem& problem) {
  const auto& data = problem.dataset();
  std::map<int, double> stratum_size;
  for (std::size_t i = 0; i < data.groups(); ++i) {
    stratum_size[data.strata[i]] += static_cast<double>(data.group_sizes[i]);
  }
  Vector w(static_cast<Eigen::Index>(data.groups()));
  for (std::size_t i = 0; i < data.groups(); ++i) {
    w[static_cast<Eigen::Index>(i)] = 1.0 / stratum_size[data.strata[i]];
  }
  return w / w.sum();
}

TrajectoryRecord run_baseline(const DroProblem& problem, BaselineVariant variant,
                              const AlsoConfig& base, Rng& rng, const RecordOptions& record,
                              std::optional<ParameterVector> theta0) {
  AlsoConfig config = base;
  std::optional<SimplexWeights> pi0;
  const auto c = static_cast<Eigen::Index>(problem.groups());
  switch (variant) {
    case BaselineVariant::adam_uniform:
    case BaselineVariant::adamw_uniform:
      config.freeze_pi = true;
      config.decoupled_decay = variant == BaselineVariant::adamw_uniform;
      pi0 = SimplexWeights(Vector::Constant(c, 1.0 / static_cast<double>(c)), problem.prior(), config.floor);
      break;
    case BaselineVariant::static_weights:
      config.freeze_pi = true;
      pi0 = SimplexWeights(clamp_to_floor(static_weights(problem), config.floor), problem.prior(), config.floor);
      break;
    case BaselineVariant::sgda:
      config.alpha = 0.0;
      config.plain_steps = true;
      config.pi_update = PiUpdate::option1;
      break;
  }
  TrajectoryRecord out = run_also(problem, config, rng, record, std::move(theta0), std::move(pi0));
  out.solver = to_string(variant);
  return out;
}

}  // namespace drokit
