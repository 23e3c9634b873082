#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "drokit/optimizers.hpp"
#include "drokit/problems.hpp"
#include "drokit/rng.hpp"
#include "drokit/trajectory.hpp"

namespace drokit {

struct ReferenceOptions {
  double tolerance = 1e-14;        // |grad Phi| that ends the Newton phase
  double accept_residual = 1e-10;  // certificate required on return
  std::size_t max_iterations = 200;
};

/// Saddle point of a convex problem. theta* minimizes Phi by damped Newton
/// (Hessian from central differences of the analytic gradient); pi* is the
/// closed-form inner maximizer at theta*. The residual is the displacement of
/// one OMP step at gamma = 1 / (2 L_F) started at the returned point.
/// Throws InvalidArgument when the family has no Lipschitz metadata or a
/// regularizer is zero, and ConvergenceFailure when the certificate is not
/// reached.
ReferenceSolution compute_reference(const DroProblem& problem, const ReferenceOptions& options = {});

/// |theta - theta*|^2 + KL[pi* || pi].
double lyapunov_phi(const ParameterVector& theta, const SimplexWeights& pi,
                    const ReferenceSolution& reference);

/// Fixed-point displacement |dtheta| + |dpi| of one OMP step started at
/// (theta, pi) with both operator buffers evaluated there.
double omp_fixed_point_residual(const DroProblem& problem, const ParameterVector& theta,
                                const SimplexWeights& pi, const OmpConfig& config);

struct RateFit {
  double rate = 1.0;       // exp(slope of log phi vs k)
  double r_squared = 1.0;
  std::size_t points = 0;  // samples used after truncation and burn-in
};

/// Least-squares fit of log(series) against k. The series is cut at the
/// first entry below 1e-14 and the first 10% of the remaining samples are
/// discarded. Throws InvalidArgument when fewer than 10 samples remain or an
/// entry is negative or NaN.
RateFit fit_geometric_rate(std::span<const double> series);
RateFit fit_geometric_rate(std::span<const double> ks, std::span<const double> series);

struct MoreauOptions {
  std::size_t restarts = 7;  // theta itself plus restarts - 1 seeded perturbations
  std::size_t budget = 5000;  // inner iterations per restart
  double tolerance = 1e-7;    // inner gradient-norm certificate
  double perturbation = 0.1;
  std::uint64_t seed = 0;
  /// Convex case: a missing certificate is an error. Defaults to "family has
  /// Lipschitz metadata".
  std::optional<bool> convex;
};

struct MoreauResult {
  ParameterVector prox;
  double envelope_value = 0.0;  // Phi(prox) + L |prox - theta|^2
  double inner_grad_norm = 0.0;
  bool certified = false;
  /// "certified" or "best-of-restarts estimate".
  std::string label;
};

/// argmin_w Phi(w) + L |w - theta|^2 with Phi(w) = max_pi h(w, pi).
MoreauResult moreau_prox(const DroProblem& problem, const ParameterVector& theta, double L,
                         const MoreauOptions& options = {});
/// 2 L |theta - prox(theta)|.
double moreau_grad_norm(const DroProblem& problem, const ParameterVector& theta, double L,
                        const MoreauOptions& options = {});

/// L for Phi_{1/2L}: sqrt((1/n) sum L_{i,j}^2) when the family has exact
/// constants, otherwise twice the largest gradient-difference ratio of Phi
/// over `samples` random pairs drawn around `center`.
double envelope_constant(const DroProblem& problem, const ParameterVector& center, Rng& rng,
                         std::size_t samples = 200, double radius = 1.0);

struct AuditReport {
  double theta_error = 0.0;  // max_i |a_i - fd_i| / max(1, |a_i|)
  double pi_error = 0.0;     // same along e_i - e_{c-1}
  double step = 0.0;
};

/// Analytic gradients of h against central differences at `step` and
/// `step / 2`, combined by Richardson extrapolation. Throws
/// InvalidArgument unless step lies in [1e-7, 1e-4] and pi is at least
/// `step` away from the boundary.
AuditReport finite_difference_audit(const DroProblem& problem, const ParameterVector& theta,
                                    const SimplexWeights& pi, double step);

std::string format_audit(const AuditReport& report, const std::string& label);

}  // namespace drokit
