#include "drokit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "drokit/error.hpp"

namespace drokit {

namespace {

double displacement(const OmpState& a, const OmpState& b) {
  return (a.theta - b.theta).norm() + (a.pi.weights() - b.pi.weights()).norm();
}

}  // namespace

double omp_fixed_point_residual(const DroProblem& problem, const ParameterVector& theta,
                                const SimplexWeights& pi, const OmpConfig& config) {
  const OmpState start = omp_init(problem, theta, pi);
  return displacement(start, omp_step(start, problem, config));
}

ReferenceSolution compute_reference(const DroProblem& problem, const ReferenceOptions& options) {
  const auto summary = lipschitz_summary(problem);
  if (!summary) throw InvalidArgument("compute_reference: family has no Lipschitz metadata");
  if (!(effective_tau(problem) > 0.0)) {
    throw InvalidArgument("compute_reference: both regularizers must be positive");
  }

  const auto d = static_cast<Eigen::Index>(problem.dim());
  auto gradient = [&](const ParameterVector& x) { return max_value_and_gradient(problem, x).gradient; };

  ParameterVector theta = ParameterVector::Zero(d);
  Vector grad = gradient(theta);
  double best = grad.norm();
  std::size_t it = 0;
  std::size_t idle = 0;
  while (it < options.max_iterations && best > options.tolerance && idle < 3) {
    ++it;
    Matrix hessian(d, d);
    const double h = 1e-5 * std::max(1.0, theta.norm());
    for (Eigen::Index j = 0; j < d; ++j) {
      ParameterVector up = theta, down = theta;
      up[j] += h;
      down[j] -= h;
      hessian.col(j) = (gradient(up) - gradient(down)) / (2.0 * h);
    }
    hessian = 0.5 * (hessian + hessian.transpose()).eval();
    const Vector direction = -hessian.ldlt().solve(grad);

    // Damped step on the gradient norm.
    double step = 1.0;
    ParameterVector next = theta + direction;
    Vector next_grad = gradient(next);
    for (int bt = 0; bt < 40 && !(next_grad.norm() < grad.norm()); ++bt) {
      step *= 0.5;
      next = theta + step * direction;
      next_grad = gradient(next);
    }
    if (!(next_grad.norm() < best)) {
      ++idle;
      if (!(next_grad.norm() < grad.norm())) continue;
    } else {
      idle = 0;
      best = next_grad.norm();
    }
    theta = std::move(next);
    grad = std::move(next_grad);
  }

  SimplexWeights pi = inner_max_closed_form(problem, theta).pi;
  OmpConfig config;
  config.gamma = 1.0 / (2.0 * summary->operator_lipschitz());
  const double residual = omp_fixed_point_residual(problem, theta, pi, config);
  if (!(residual <= options.accept_residual)) {
    std::ostringstream msg;
    msg << "compute_reference: residual " << residual << " after " << it << " Newton steps";
    throw ConvergenceFailure(msg.str());
  }
  return ReferenceSolution{std::move(theta), std::move(pi), residual, it};
}

double lyapunov_phi(const ParameterVector& theta, const SimplexWeights& pi,
                    const ReferenceSolution& reference) {
  if (theta.size() != reference.theta_star.size() || pi.size() != reference.pi_star.size()) {
    throw DimensionMismatch("lyapunov_phi: iterate and reference differ in shape");
  }
  return (theta - reference.theta_star).squaredNorm() +
         kl_divergence(reference.pi_star.weights(), pi.weights());
}

// ---------------------------------------------------------------------------
// Rate fit

RateFit fit_geometric_rate(std::span<const double> series) {
  std::vector<double> ks(series.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<double>(i);
  return fit_geometric_rate(ks, series);
}

RateFit fit_geometric_rate(std::span<const double> ks, std::span<const double> series) {
  if (ks.size() != series.size()) throw DimensionMismatch("fit_geometric_rate: length mismatch");
  std::size_t end = series.size();
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (std::isnan(series[i]) || series[i] < 0.0) {
      throw InvalidArgument("fit_geometric_rate: negative or NaN entry");
    }
    if (series[i] < 1e-14) {
      end = i;
      break;
    }
  }
  const std::size_t begin = end / 10;
  const std::size_t count = end - begin;
  if (count < 10) throw InvalidArgument("fit_geometric_rate: fewer than 10 usable samples");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mx += ks[i];
    my += std::log(series[i]);
  }
  mx /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dx = ks[i] - mx;
    const double dy = std::log(series[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_geometric_rate: degenerate abscissae");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return RateFit{std::exp(slope), r2, count};
}

// ---------------------------------------------------------------------------
// Moreau envelope

namespace {

struct InnerRun {
  ParameterVector w;
  double value = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
};

// Gradient descent with backtracking on psi(w) = Phi(w) + L |w - theta|^2.
InnerRun minimize_envelope(const DroProblem& problem, const ParameterVector& theta, double L,
                           ParameterVector w, const MoreauOptions& options) {
  auto eval = [&](const ParameterVector& x, Vector* grad) {
    const MaxValue mv = max_value_and_gradient(problem, x);
    if (grad) *grad = mv.gradient + 2.0 * L * (x - theta);
    return mv.value + L * (x - theta).squaredNorm();
  };
  Vector grad;
  double value = eval(w, &grad);
  double step = 1.0 / (2.0 * L);
  for (std::size_t it = 0; it < options.budget; ++it) {
    if (grad.norm() <= options.tolerance) break;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const ParameterVector trial = w - step * grad;
      Vector trial_grad;
      const double tv = eval(trial, &trial_grad);
      const bool armijo = tv <= value - 0.5 * step * grad.squaredNorm();
      // Near the minimizer value differences drown in rounding; fall back to
      // the gradient norm there.
      const bool flat = std::abs(tv - value) <= 1e-14 * std::max(1.0, std::abs(value)) &&
                        trial_grad.norm() < grad.norm();
      if (std::isfinite(tv) && (armijo || flat)) {
        w = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    value = eval(w, &grad);
    step *= 1.5;
  }
  return InnerRun{std::move(w), value, grad.norm()};
}

}  // namespace

MoreauResult moreau_prox(const DroProblem& problem, const ParameterVector& theta, double L,
                         const MoreauOptions& options) {
  if (!(L > 0.0)) throw InvalidArgument("moreau_prox: L must be positive");
  if (options.restarts == 0) throw InvalidArgument("moreau_prox: need at least one restart");
  const bool convex = options.convex.value_or(lipschitz_summary(problem).has_value());

  Rng rng = Rng::stream(options.seed, "moreau");
  InnerRun best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    ParameterVector start = theta;
    if (r > 0) {
      Rng local = rng.split(r);
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] += options.perturbation * local.normal();
    }
    InnerRun run = minimize_envelope(problem, theta, L, std::move(start), options);
    if (run.value < best.value) best = std::move(run);
  }

  MoreauResult out;
  out.prox = best.w;
  out.envelope_value = best.value;
  out.inner_grad_norm = best.grad_norm;
  out.certified = best.grad_norm <= options.tolerance;
  out.label = out.certified ? "certified" : "best-of-restarts estimate";
  if (convex && !out.certified) {
    std::ostringstream msg;
    msg << "moreau_prox: inner gradient " << best.grad_norm << " above tolerance " << options.tolerance;
    throw ConvergenceFailure(msg.str());
  }
  return out;
}

double moreau_grad_norm(const DroProblem& problem, const ParameterVector& theta, double L,
                        const MoreauOptions& options) {
  return 2.0 * L * (theta - moreau_prox(problem, theta, L, options).prox).norm();
}

double envelope_constant(const DroProblem& problem, const ParameterVector& center, Rng& rng,
                         std::size_t samples, double radius) {
  if (const auto summary = lipschitz_summary(problem)) {
    return summary->rms_gradient_lipschitz;
  }
  const auto d = center.size();
  const double scale = radius / std::sqrt(static_cast<double>(d));
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    ParameterVector a = center, b = center;
    for (Eigen::Index i = 0; i < d; ++i) {
      a[i] += scale * rng.normal();
      b[i] += scale * rng.normal();
    }
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    const double diff =
        (max_value_and_gradient(problem, a).gradient - max_value_and_gradient(problem, b).gradient).norm();
    worst = std::max(worst, diff / dist);
  }
  if (!(worst > 0.0)) throw ConvergenceFailure("envelope_constant: empirical probe found no curvature");
  return 2.0 * worst;
}

// ---------------------------------------------------------------------------
// Finite differences

AuditReport finite_difference_audit(const DroProblem& problem, const ParameterVector& theta,
                                    const SimplexWeights& pi, double step) {
  if (!(step >= 1e-7 && step <= 1e-4)) {
    throw InvalidArgument("finite_difference_audit: step must lie in [1e-7, 1e-4]");
  }
  if (pi.weights().minCoeff() < step) {
    throw InvalidArgument("finite_difference_audit: pi is closer to the boundary than the step");
  }
  AuditReport report;
  report.step = step;

  // Central differences at h and h/2 combined by Richardson extrapolation.
  auto derivative = [step](const auto& f) {
    const double d1 = (f(step) - f(-step)) / (2.0 * step);
    const double d2 = (f(0.5 * step) - f(-0.5 * step)) / step;
    return (4.0 * d2 - d1) / 3.0;
  };

  const Vector grad = grad_theta_full(problem, theta, pi) + problem.tau_theta() * theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double fd = derivative([&](double h) {
      ParameterVector moved = theta;
      moved[i] += h;
      return objective_h(problem, moved, pi);
    });
    report.theta_error = std::max(report.theta_error, std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i])));
  }

  const Eigen::Index c = pi.size();
  if (c > 1) {
    const Vector losses = group_losses(problem, theta);
    const Vector& w = pi.weights();
    const Vector& prior = pi.prior();
    auto partial = [&](Eigen::Index i) {
      return losses[i] - problem.tau_pi() * (std::log(w[i] / prior[i]) + 1.0);
    };
    const Eigen::Index last = c - 1;
    for (Eigen::Index i = 0; i < last; ++i) {
      const double analytic = partial(i) - partial(last);
      const double fd = derivative([&](double h) {
        Vector moved = w;
        moved[i] += h;
        moved[last] -= h;
        return objective_h(problem, theta, SimplexWeights(moved, prior, 0.0));
      });
      report.pi_error = std::max(report.pi_error, std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)));
    }
  }
  return report;
}

std::string format_audit(const AuditReport& report, const std::string& label) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: step=%.1e theta_rel_err=%.3e pi_rel_err=%.3e", label.c_str(),
                report.step, report.theta_error, report.pi_error);
  return buf;
}

}  // namespace drokit
