#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "drokit/problems.hpp"
#include "drokit/simplex.hpp"

namespace drokit {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Saddle point (theta*, pi*) with its certified fixed-point displacement.
struct ReferenceSolution {
  ParameterVector theta_star;
  SimplexWeights pi_star;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// One checkpoint of a run. Quantities that are not computed are NaN.
struct TrajectoryRow {
  std::size_t k = 0;
  double h = kMissing;            // objective at (theta_k, pi_k)
  double phi = kMissing;          // max_pi h(theta_k, pi)
  double phi_k = kMissing;        // |theta_k - theta*|^2 + KL[pi* || pi_k]
  double moreau_grad = kMissing;  // |grad Phi_{1/2L}(theta_k)|
  Vector pi;
  double grad_norm = kMissing;    // |grad_theta h(theta_k, pi_k)|
  double wall_ms = 0.0;
  ParameterVector theta;          // only with RecordOptions::record_theta
};

struct TrajectoryRecord {
  std::string solver;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<TrajectoryRow> rows;
  ParameterVector final_theta;
  Vector final_pi;

  /// Appends a row; rows must be strictly increasing in k.
  void append(TrajectoryRow row);
  std::vector<double> column_phi_k() const;
  std::vector<double> column_k() const;
};

/// What a run logs.
struct RecordOptions {
  std::size_t every = 1;                          // checkpoint cadence (0 = first and last only)
  const ReferenceSolution* reference = nullptr;   // enables phi_k
  std::size_t moreau_every = 0;                   // 0 disables Moreau checkpoints
  double moreau_constant = 0.0;                   // L of Phi_{1/2L}
  std::size_t moreau_budget = 5000;
  std::uint64_t moreau_seed = 0;
  bool record_pi = true;
  bool record_theta = false;
  bool compute_phi = true;
  /// Stop early once phi_k drops below this value (0 disables).
  double stop_phi_below = 0.0;
};

}  // namespace drokit
