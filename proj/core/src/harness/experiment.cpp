#include "drokit/harness/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "drokit/harness/csv.hpp"

namespace drokit::harness {

namespace {

std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
  return Rng::stream(master, name).next();
}

DroProblem generate(const ExperimentConfig& config, std::optional<ImbalancedLogistic>& imbalance) {
  const ProblemSpec& p = config.problem;
  if (p.bilinear_toy) return make_bilinear_toy(p.tau_theta, p.tau_pi);
  switch (p.family) {
    case LossFamily::quadratic: {
      QuadraticOptions o;
      o.tau_theta = p.tau_theta;
      o.tau_pi = p.tau_pi;
      return make_quadratic_problem(config.seed, p.dim, p.groups, p.items_per_group, o);
    }
    case LossFamily::logistic: {
      ImbalanceOptions o;
      o.tau_theta = p.tau_theta;
      o.tau_pi = p.tau_pi;
      o.grouping = p.grouping;
      o.test_per_class = p.test_per_class;
      o.separation = p.separation;
      imbalance = make_imbalanced_logistic(config.seed, p.dim, p.n_per_class, p.uc, o);
      return imbalance->problem;
    }
    case LossFamily::tiny_mlp: {
      MlpDataSpec spec;
      spec.groups = p.groups;
      spec.items_per_group = p.items_per_group;
      spec.spread = p.spread;
      spec.tau_theta = p.tau_theta;
      spec.tau_pi = p.tau_pi;
      return make_tiny_mlp(config.seed, p.dim, p.hidden, spec);
    }
  }
  throw InvalidArgument("unknown loss family");
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& config) {
  std::optional<ImbalancedLogistic> imbalance;
  DroProblem problem = [&] {
    if (config.problem.snapshot.empty()) return generate(config, imbalance);
    std::ifstream in(config.problem.snapshot);
    if (!in) throw InvalidArgument("cannot open snapshot '" + config.problem.snapshot + "'");
    return read_snapshot(in);
  }();
  if (config.solver.stationarity) problem = stationarity_problem(problem);

  ParameterVector theta0 = ParameterVector::Constant(static_cast<Eigen::Index>(problem.dim()), config.problem.theta0);
  if (problem.family() == LossFamily::tiny_mlp) {
    const auto& model = static_cast<const MlpModel&>(problem.model());
    theta0 = mlp_initial_parameter(model.shape(), config.seed);
  }
  return BuiltProblem{std::move(problem), std::move(imbalance), std::move(theta0)};
}

AlsoConfig effective_also_config(const ExperimentConfig& config) {
  return config.solver.stationarity ? stationarity_config(config.solver.also) : config.solver.also;
}

RunOutcome execute(const ExperimentConfig& config) {
  BuiltProblem built = build_problem(config);
  const DroProblem& problem = built.problem;
  RunOutcome out;
  out.groups = problem.groups();

  RecordOptions record;
  record.every = config.diagnostics.every;
  record.record_pi = config.diagnostics.record_pi;
  record.stop_phi_below = config.diagnostics.stop_phi_below;
  record.moreau_budget = config.diagnostics.moreau_budget;
  record.moreau_seed = stream_seed(config.seed, "restarts");

  if (config.diagnostics.reference) {
    try {
      out.reference = compute_reference(problem);
      record.reference = &*out.reference;
    } catch (const Error& e) {
      out.failures.push_back(std::string("reference: ") + e.what());
    }
  }
  if (config.diagnostics.moreau_every > 0) {
    Rng probe = Rng::stream(config.seed, "probe");
    record.moreau_every = config.diagnostics.moreau_every;
    record.moreau_constant = envelope_constant(problem, built.theta0, probe);
  }

  try {
    Rng sampler = Rng::stream(config.seed, "sampler");
    switch (config.solver.kind) {
      case SolverKind::also:
        out.record = run_also(problem, effective_also_config(config), sampler, record, built.theta0);
        break;
      case SolverKind::baseline:
        out.record = run_baseline(problem, config.solver.baseline, effective_also_config(config), sampler,
                                  record, built.theta0);
        break;
      case SolverKind::omp: {
        OmpConfig omp = config.solver.omp;
        omp.iterations = config.solver.also.iterations;
        if (config.solver.omp_auto_gamma) {
          const auto summary = lipschitz_summary(problem);
          if (!summary) throw InvalidArgument("omp_gamma = auto needs a family with Lipschitz metadata");
          omp.gamma = 1.0 / (2.0 * summary->operator_lipschitz());
        }
        out.record = run_omp(problem, omp, record, built.theta0);
        if (out.reference) {
          RateCheck check;
          const auto phi = out.record.column_phi_k();
          const auto ks = out.record.column_k();
          check.phi_final = phi.back();
          check.bound = 1.0 - omp.gamma * effective_tau(problem) / 2.0 + 0.05;
          try {
            check.fit = fit_geometric_rate(ks, phi);
            check.passed = check.fit.rate <= check.bound && check.fit.r_squared >= 0.95 &&
                           check.phi_final <= 1e-8;
          } catch (const InvalidArgument& e) {
            out.failures.push_back(std::string("rate fit: ") + e.what());
          }
          if (!check.passed) out.failures.push_back("rate check failed");
          out.rate = check;
        }
        break;
      }
    }
  } catch (const ConvergenceFailure& e) {
    out.failures.push_back(std::string("diagnostics: ") + e.what());
    return out;
  }
  out.record.seed = config.seed;

  if (built.imbalance) {
    out.score = score_linear_classifier(out.record.final_theta, built.imbalance->test);
    out.minority_mass = 0.0;
    out.minority_prior = 0.0;
    for (std::size_t g : built.imbalance->minority_groups) {
      out.minority_mass += out.record.final_pi[static_cast<Eigen::Index>(g)];
      out.minority_prior += problem.prior()[static_cast<Eigen::Index>(g)];
    }
  }
  return out;
}

int run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const RunOutcome outcome = execute(config);
  for (const auto& f : outcome.failures) {
    if (options.log) *options.log << "warning: " << f << '\n';
  }
  if (!outcome.record.rows.empty()) {
    std::ofstream csv(config.output, std::ios::binary);
    if (!csv) throw Error("cannot write '" + config.output + "'");
    write_trajectory_csv(csv, outcome.record, outcome.groups, config.diagnostics.record_pi);
    if (!csv) throw Error("write to '" + config.output + "' failed");
    if (options.log) *options.log << "wrote " << config.output << " (" << outcome.record.rows.size() << " rows)\n";
  }
  if (outcome.rate) {
    const std::string path = config.output + ".summary.csv";
    std::ofstream summary(path, std::ios::binary);
    if (!summary) throw Error("cannot write '" + path + "'");
    CsvTable table({"experiment", "seed", "rho_hat", "rho_bound", "r_squared", "phi_final", "pass"});
    const RateCheck& r = *outcome.rate;
    table.add_row({config.name, std::to_string(config.seed), format_real(r.fit.rate), format_real(r.bound),
                   format_real(r.fit.r_squared), format_real(r.phi_final), r.passed ? "1" : "0"});
    table.write(summary);
    if (options.log) {
      *options.log << "rho_hat=" << format_real(r.fit.rate) << " bound=" << format_real(r.bound)
                   << " r2=" << format_real(r.fit.r_squared) << " phi_N=" << format_real(r.phi_final)
                   << (r.passed ? " pass" : " FAIL") << '\n';
    }
  }
  if (outcome.score && options.log) {
    *options.log << "f1=" << format_real(outcome.score->f1) << " accuracy=" << format_real(outcome.score->accuracy)
                 << " minority_mass=" << format_real(outcome.minority_mass)
                 << " minority_prior=" << format_real(outcome.minority_prior) << '\n';
  }
  return options.strict && !outcome.failures.empty() ? 1 : 0;
}

SweepRow run_imbalance_trial(const ExperimentConfig& base, double uc, const std::string& method,
                             std::uint64_t seed) {
  ExperimentConfig config = base;
  config.seed = seed;
  config.problem.uc = uc;
  config.problem.family = LossFamily::logistic;
  config.diagnostics.reference = false;
  config.diagnostics.moreau_every = 0;
  config.diagnostics.every = 0;
  config.diagnostics.record_pi = false;
  if (method == "also") {
    config.solver.kind = SolverKind::also;
  } else {
    config.solver.kind = SolverKind::baseline;
    config.solver.baseline = parse_baseline_variant(method);
  }
  const RunOutcome outcome = execute(config);
  if (!outcome.score) throw Error("run_imbalance_trial: run produced no score");
  return SweepRow{uc, method, seed, outcome.score->f1, outcome.score->accuracy, outcome.minority_mass,
                  outcome.minority_prior};
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("DROKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::size_t threads) {
  struct Job {
    double uc;
    std::string method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  const std::vector<double> ucs = config.sweep.uc.empty() ? std::vector<double>{config.problem.uc} : config.sweep.uc;
  const std::vector<std::string> methods =
      config.sweep.methods.empty() ? std::vector<std::string>{"also"} : config.sweep.methods;
  for (double uc : ucs) {
    for (const auto& m : methods) {
      for (std::size_t s = 0; s < config.sweep.seeds; ++s) jobs.push_back({uc, m, config.seed + s});
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        rows[i] = run_imbalance_trial(config, jobs[i].uc, jobs[i].method, jobs[i].seed);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

int run_sweep_to_csv(const ExperimentConfig& config, const RunOptions& options) {
  const auto rows = run_sweep(config, thread_cap());
  CsvTable table({"experiment", "uc", "method", "seed", "f1", "accuracy", "minority_mass", "minority_prior"});
  for (const auto& r : rows) {
    table.add_row({config.name, format_real(r.uc), r.method, std::to_string(r.seed), format_real(r.f1),
                   format_real(r.accuracy), format_real(r.minority_mass), format_real(r.minority_prior)});
  }
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw Error("cannot write '" + config.output + "'");
  table.write(out);
  if (options.log) *options.log << "wrote " << config.output << " (" << rows.size() << " rows)\n";
  return 0;
}

namespace {

std::vector<Preset> make_presets() {
  std::vector<Preset> out;

  out.push_back({"quadratic-also", "ALSO option1 with alpha = 1 on a random quadratic DRO problem",
                 ExperimentConfig{}, false});
  out.back().config.name = "quadratic-also";
  out.back().config.output = "quadratic-also.csv";

  {
    ExperimentConfig c;
    c.name = "omp-rate";
    c.output = "omp-rate.csv";
    c.problem.dim = 5;
    c.problem.groups = 6;
    c.problem.items_per_group = 1;
    c.solver.kind = SolverKind::omp;
    c.solver.omp_auto_gamma = true;
    c.solver.also.iterations = 10000;
    c.diagnostics.reference = true;
    c.diagnostics.every = 10;
    out.push_back({"omp-rate", "OMP at gamma = 1/(2 L_F) with the linear-rate check on phi_k", c, false});
  }
  {
    ExperimentConfig c;
    c.name = "imbalance-sweep";
    c.output = "imbalance-sweep.csv";
    c.seed = 7;
    c.problem.family = LossFamily::logistic;
    c.problem.dim = 2;
    c.problem.n_per_class = 500;
    c.problem.tau_theta = 1e-3;
    c.problem.tau_pi = 0.05;
    c.solver.also.gamma_theta = 1e-2;
    c.solver.also.gamma_pi = 1e-3;
    c.solver.also.batch = 32;
    c.solver.also.iterations = 4000;
    c.diagnostics.every = 0;
    c.diagnostics.record_pi = false;
    c.sweep.uc = {1, 2, 5, 10, 20, 30, 40, 50};
    c.sweep.methods = {"also", "adam_uniform"};
    c.sweep.seeds = 5;
    out.push_back({"imbalance-sweep", "ALSO vs uniform Adam on imbalanced logistic data over the uc grid", c, true});
  }
  {
    ExperimentConfig c;
    c.name = "mlp-stationarity";
    c.output = "mlp-stationarity.csv";
    c.problem.family = LossFamily::tiny_mlp;
    c.problem.dim = 2;
    c.problem.hidden = 8;
    c.problem.groups = 4;
    c.problem.items_per_group = 10;
    c.problem.tau_theta = 0.0;
    c.problem.tau_pi = 0.5;
    c.solver.stationarity = true;
    c.solver.also.gamma_theta = 1e-2;
    c.solver.also.gamma_pi = 1e-2;
    c.solver.also.batch = 8;
    c.solver.also.iterations = 2000;
    c.diagnostics.every = 100;
    c.diagnostics.moreau_every = 500;
    out.push_back({"mlp-stationarity", "ALSO in the alpha = 0 regime on a tiny tanh network with Moreau checkpoints",
                   c, false});
  }
  {
    ExperimentConfig c;
    c.name = "sgda-toy";
    c.output = "sgda-toy.csv";
    c.problem.bilinear_toy = true;
    c.problem.theta0 = 0.5;
    c.problem.tau_theta = 0.0;
    c.problem.tau_pi = 0.0;
    c.solver.kind = SolverKind::baseline;
    c.solver.baseline = BaselineVariant::sgda;
    c.solver.also.gamma_theta = 0.1;
    c.solver.also.gamma_pi = 0.1;
    c.solver.also.sampling = SamplingStrategy::full_batch;
    c.solver.also.iterations = 500;
    c.diagnostics.every = 10;
    out.push_back({"sgda-toy", "plain descent-ascent on the unregularized bilinear toy (drifts away from the saddle)", c, false});
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = make_presets();
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

}  // namespace drokit::harness
