#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drokit/diagnostics.hpp"
#include "drokit/harness/config.hpp"

namespace drokit::harness {

struct BuiltProblem {
  DroProblem problem;
  std::optional<ImbalancedLogistic> imbalance;
  ParameterVector theta0;
};

/// Problem, starting point and (logistic) test split for a config. Applies the
/// stationarity switch to the problem.
BuiltProblem build_problem(const ExperimentConfig& config);

/// Solver settings after presets such as stationarity are applied.
AlsoConfig effective_also_config(const ExperimentConfig& config);

struct RateCheck {
  RateFit fit;
  double bound = 0.0;      // 1 - gamma tau / 2 + 0.05
  double phi_final = 0.0;
  bool passed = false;     // rate <= bound, R^2 >= 0.95, phi_final <= 1e-8
};

struct RunOutcome {
  TrajectoryRecord record;
  std::size_t groups = 0;
  std::optional<ReferenceSolution> reference;
  std::optional<RateCheck> rate;  // OMP runs with a reference
  std::optional<ClassificationScore> score;
  double minority_mass = kMissing;
  double minority_prior = kMissing;
  /// Diagnostics that could not be certified; fatal under --strict.
  std::vector<std::string> failures;
};

/// Builds the problem, the optional reference and runs the solver. Streams:
/// "data" (problem generation), "sampler" (solver draws), "init" (network
/// initialization), "restarts" (Moreau restarts), "probe" (envelope constant).
RunOutcome execute(const ExperimentConfig& config);

struct RunOptions {
  bool strict = false;
  std::ostream* log = nullptr;
};

/// execute() plus CSV output to config.output (and, for OMP runs with a
/// reference, a one-row `<output>.summary.csv`). Returns the process exit
/// code: 0, or 1 when `strict` is set and a certification failed.
int run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SweepRow {
  double uc = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double minority_mass = 0.0;
  double minority_prior = 0.0;
};

/// One imbalanced-logistic run of `method` ("also" or a baseline name) with
/// the data of `seed` and the uc value overridden.
SweepRow run_imbalance_trial(const ExperimentConfig& base, double uc, const std::string& method,
                             std::uint64_t seed);

/// Every (uc, method, seed) combination of config.sweep, in that nesting
/// order, on up to `threads` workers.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::size_t threads);

/// run_sweep written as a CSV with one row per uc per method per seed.
int run_sweep_to_csv(const ExperimentConfig& config, const RunOptions& options = {});

/// DROKIT_THREADS if set and positive, else the hardware concurrency (>= 1).
std::size_t thread_cap();

struct Preset {
  std::string name;
  std::string description;
  ExperimentConfig config;
  bool sweep = false;
};

const std::vector<Preset>& presets();
/// Throws InvalidArgument for an unknown name.
const Preset& find_preset(const std::string& name);

}  // namespace drokit::harness
