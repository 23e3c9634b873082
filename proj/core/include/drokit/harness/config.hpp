#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drokit/error.hpp"
#include "drokit/optimizers.hpp"
#include "drokit/problems.hpp"

namespace drokit::harness {

/// Config syntax or value error; line() is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ProblemSpec {
  LossFamily family = LossFamily::quadratic;
  std::size_t dim = 5;             // feature dimension (logistic: without the bias feature)
  std::size_t groups = 4;          // quadratic, tiny_mlp
  std::size_t items_per_group = 3; // quadratic, tiny_mlp
  double tau_theta = 1.0;
  double tau_pi = 1.0;
  // Imbalanced logistic data.
  double uc = 10.0;
  std::size_t n_per_class = 500;
  Grouping grouping = Grouping::per_object;
  double separation = 2.0;
  std::size_t test_per_class = 500;
  // Tiny MLP.
  std::size_t hidden = 8;
  double spread = 0.35;
  /// Starting value of every theta coordinate (the network ignores it and
  /// uses a random initialization).
  double theta0 = 0.0;
  /// d = 1, c = 2 bilinear toy (f_1 = theta + 1, f_2 = 1 - theta) instead of
  /// the family generator; uses tau_theta and tau_pi only.
  bool bilinear_toy = false;
  /// Problem snapshot to load instead of generating one.
  std::string snapshot;

  bool operator==(const ProblemSpec&) const = default;
};

enum class SolverKind { also, omp, baseline };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct SolverSpec {
  SolverKind kind = SolverKind::also;
  /// Also holds the iteration count used by every solver kind.
  AlsoConfig also;
  /// omp.iterations is ignored; see also.iterations.
  OmpConfig omp;
  /// OMP stepsize 1 / (2 L_F) instead of omp.gamma.
  bool omp_auto_gamma = false;
  BaselineVariant baseline = BaselineVariant::adam_uniform;
  /// Stationarity regime: tau_theta = 0 plus stationarity_config.
  bool stationarity = false;

  bool operator==(const SolverSpec&) const = default;
};

struct DiagnosticsSpec {
  bool reference = false;
  std::size_t every = 1;
  std::size_t moreau_every = 0;
  std::size_t moreau_budget = 5000;
  bool record_pi = true;
  double stop_phi_below = 0.0;

  bool operator==(const DiagnosticsSpec&) const = default;
};

struct SweepSpec {
  std::vector<double> uc;            // empty: no uc sweep
  std::vector<std::string> methods;  // "also" or a baseline name
  std::size_t seeds = 1;             // runs seed, seed + 1, ...

  bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "default";
  std::uint64_t seed = 0;
  std::string output = "drokit.csv";
  ProblemSpec problem;
  SolverSpec solver;
  DiagnosticsSpec diagnostics;
  SweepSpec sweep;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Format: one `key = value` per line, `#` starts a comment, `[section]`
/// prefixes the keys that follow (`[solver]` then `alpha = 0` is the same
/// as `solver.alpha = 0`). Lists are comma-separated. Throws ConfigError on
/// syntax errors, unknown keys, and malformed values, with the line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Every key, fully qualified, in a form parse_config reads back unchanged.
std::string serialize_config(const ExperimentConfig& config);

/// Key reference with defaults, for --help.
std::string config_reference();

}  // namespace drokit::harness
