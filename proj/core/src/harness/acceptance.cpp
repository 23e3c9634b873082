#include "drokit/harness/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>

#include "drokit/diagnostics.hpp"
#include "drokit/harness/experiment.hpp"
#include "drokit/harness/oracles.hpp"

namespace drokit::harness {

namespace {

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

Vector random_simplex(Rng& rng, Eigen::Index c, double mix = 0.3) {
  Vector w(c);
  for (Eigen::Index i = 0; i < c; ++i) w[i] = std::exp(rng.normal());
  w /= w.sum();
  w = (1.0 - mix) * w + Vector::Constant(c, mix / static_cast<double>(c));
  return w / w.sum();
}

Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

double linf(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------

CriterionResult prox_criterion() {
  CriterionResult r{1, "prox", "closed-form prox vs bisection oracle", false, "", "<= 1e-8 linf over 200 tuples", 0, 10};
  Rng rng = Rng::stream(101, "acceptance.prox");
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index c = 2 + t % 2;
    const Vector pi = random_simplex(rng, c);
    const Vector prior = random_simplex(rng, c);
    const Vector grad = random_vector(rng, c, 2.0);
    const double gamma = 0.01 + 2.0 * rng.uniform();
    const double tau = 2.0 * rng.uniform();
    const SimplexWeights current(pi, prior);
    const Vector fast = entropic_prox_step(current, grad, gamma, tau).weights();
    const Vector slow = oracles::prox_argmin(pi, prior, grad, gamma, tau);
    worst = std::max(worst, linf(fast, slow));
  }
  r.measured = "max linf " + fmt("%.2e", worst);
  r.passed = worst <= 1e-8;
  return r;
}

struct RateSummary {
  std::size_t passed = 0;
  double worst_margin = -1.0;  // max(rho - bound)
  double worst_r2 = 1.0;
  double worst_phi = 0.0;
};

RateSummary rate_instances(bool fault) {
  RateSummary s;
  for (int i = 0; i < 20; ++i) {
    const std::size_t d = 2 + static_cast<std::size_t>(i) % 9;
    const std::size_t c = 2 + static_cast<std::size_t>(i) % 7;
    const DroProblem problem = make_quadratic_problem(1000 + static_cast<std::uint64_t>(i), d, c, 1);
    const ReferenceSolution ref = compute_reference(problem);
    OmpConfig cfg;
    cfg.gamma = 1.0 / (2.0 * lipschitz_summary(problem)->operator_lipschitz());
    cfg.iterations = 10000;
    cfg.pi_sign_fault = fault;
    RecordOptions rec;
    rec.reference = &ref;
    rec.record_pi = false;
    rec.compute_phi = false;
    const TrajectoryRecord run = run_omp(problem, cfg, rec);
    const auto phi = run.column_phi_k();
    const auto ks = run.column_k();
    const double bound = 1.0 - cfg.gamma * effective_tau(problem) / 2.0 + 0.05;
    RateFit fit;
    bool ok = true;
    try {
      fit = fit_geometric_rate(ks, phi);
    } catch (const Error&) {
      ok = false;
    }
    ok = ok && fit.rate <= bound && fit.r_squared >= 0.95 && phi.back() <= 1e-8;
    s.passed += ok;
    s.worst_margin = std::max(s.worst_margin, fit.rate - bound);
    s.worst_r2 = std::min(s.worst_r2, fit.r_squared);
    s.worst_phi = std::max(s.worst_phi, phi.back());
  }
  return s;
}

CriterionResult rate_criterion(bool fault) {
  CriterionResult r{2, "rate", "OMP linear rate on 20 quadratic instances", false, "",
                    "20/20 with rho <= 1 - gamma tau/2 + 0.05, R^2 >= 0.95, phi_N <= 1e-8", 0, 60};
  const RateSummary s = rate_instances(fault);
  r.measured = std::to_string(s.passed) + "/20, max(rho - bound) " + fmt("%.3f", s.worst_margin) +
               ", min R^2 " + fmt("%.4f", s.worst_r2) + ", max phi_N " + fmt("%.1e", s.worst_phi);
  r.passed = s.passed == 20;
  return r;
}

DroProblem unequal_quadratic(std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "acceptance.sampling");
  const std::vector<std::size_t> sizes = {2, 3, 5};
  const Eigen::Index d = 3;
  std::vector<std::vector<QuadraticItem>> groups;
  for (std::size_t n : sizes) {
    std::vector<QuadraticItem> items;
    for (std::size_t j = 0; j < n; ++j) {
      QuadraticItem it;
      it.a = Matrix(d, d);
      for (Eigen::Index a = 0; a < d * d; ++a) it.a.data()[a] = rng.normal() / std::sqrt(3.0);
      it.b = random_vector(rng, d);
      it.q = random_vector(rng, d, 0.3);
      it.r = rng.normal();
      items.push_back(std::move(it));
    }
    groups.push_back(std::move(items));
  }
  return make_quadratic_from_items(std::move(groups), 1.0, 1.0);
}

CriterionResult sampling_criterion() {
  CriterionResult r{3, "sampling", "unbiased sampling: exhaustive and Monte Carlo", false, "",
                    "exhaustive <= 1e-12, MC mean within 4 sigma (B = 1, 1e5 trials)", 0, 30};
  double exhaustive = 0.0;
  double worst_z = 0.0;
  for (std::uint64_t seed : {1u, 2u}) {
    const DroProblem problem = unequal_quadratic(seed);
    Rng rng = Rng::stream(seed, "acceptance.sampling.point");
    const ParameterVector theta = random_vector(rng, static_cast<Eigen::Index>(problem.dim()));
    const SimplexWeights pi(random_simplex(rng, 3), problem.prior());
    const StochasticEstimate exact = exact_estimate(problem, pi, theta);
    for (SamplingStrategy s : {SamplingStrategy::uniform_all, SamplingStrategy::two_stage,
                               SamplingStrategy::probability_weighted, SamplingStrategy::full_batch}) {
      const StochasticEstimate e = oracles::exhaustive_expectation(s, problem, pi, theta);
      const Vector scale_g = exact.g.cwiseAbs().cwiseMax(1.0);
      const Vector scale_p = exact.p.cwiseAbs().cwiseMax(1.0);
      exhaustive = std::max(exhaustive, ((e.g - exact.g).cwiseAbs().cwiseQuotient(scale_g)).maxCoeff());
      exhaustive = std::max(exhaustive, ((e.p - exact.p).cwiseAbs().cwiseQuotient(scale_p)).maxCoeff());
      if (s == SamplingStrategy::full_batch) continue;

      constexpr int kTrials = 100000;
      Rng draws = Rng::stream(seed, "acceptance.sampling." + to_string(s));
      Vector sum_g = Vector::Zero(exact.g.size()), sq_g = sum_g;
      Vector sum_p = Vector::Zero(exact.p.size()), sq_p = sum_p;
      for (int t = 0; t < kTrials; ++t) {
        const StochasticEstimate est = sample_estimate(s, problem, pi, theta, 1, draws);
        sum_g += est.g;
        sq_g += est.g.cwiseProduct(est.g);
        sum_p += est.p;
        sq_p += est.p.cwiseProduct(est.p);
      }
      auto z = [&](const Vector& sum, const Vector& sq, const Vector& target) {
        double w = 0.0;
        for (Eigen::Index i = 0; i < sum.size(); ++i) {
          const double mean = sum[i] / kTrials;
          const double var = std::max(0.0, sq[i] / kTrials - mean * mean) * kTrials / (kTrials - 1.0);
          const double se = std::sqrt(var / kTrials);
          const double dev = std::abs(mean - target[i]);
          w = std::max(w, se > 0.0 ? dev / se : (dev <= 1e-12 ? 0.0 : INFINITY));
        }
        return w;
      };
      worst_z = std::max({worst_z, z(sum_g, sq_g, exact.g), z(sum_p, sq_p, exact.p)});
    }
  }
  r.measured = "exhaustive " + fmt("%.1e", exhaustive) + ", max |z| " + fmt("%.2f", worst_z);
  r.passed = exhaustive <= 1e-12 && worst_z <= 4.0;
  return r;
}

CriterionResult adam_criterion() {
  CriterionResult r{4, "adam", "ALSO with gamma_pi = 0 reduces to uniform Adam", false, "",
                    "bitwise identical theta over 1000 steps", 0, 0};
  ImbalanceOptions io;
  const ImbalancedLogistic data = make_imbalanced_logistic(3, 3, 100, 10.0, io);
  const DroProblem& problem = data.problem;
  AlsoConfig cfg;
  cfg.gamma_pi = 0.0;
  cfg.iterations = 1000;
  cfg.batch = 8;
  RecordOptions rec;
  rec.record_theta = true;
  rec.record_pi = false;
  rec.compute_phi = false;
  const auto c = static_cast<Eigen::Index>(problem.groups());
  const SimplexWeights uniform(Vector::Constant(c, 1.0 / static_cast<double>(c)), problem.prior());

  Rng a = Rng::stream(4, "sampler");
  Rng b = Rng::stream(4, "sampler");
  const TrajectoryRecord also = run_also(problem, cfg, a, rec, std::nullopt, uniform);
  const TrajectoryRecord adam = run_baseline(problem, BaselineVariant::adam_uniform, cfg, b, rec);
  std::size_t identical = 0;
  const std::size_t steps = std::min(also.rows.size(), adam.rows.size());
  for (std::size_t k = 0; k < steps; ++k) {
    const auto& x = also.rows[k].theta;
    const auto& y = adam.rows[k].theta;
    if (x.size() == y.size() && std::equal(x.data(), x.data() + x.size(), y.data(),
                                           [](double u, double v) { return std::bit_cast<std::uint64_t>(u) ==
                                                                           std::bit_cast<std::uint64_t>(v); })) {
      ++identical;
    } else {
      break;
    }
  }
  const bool moved = (also.final_theta - ParameterVector::Zero(also.final_theta.size())).norm() > 0.0;
  r.measured = std::to_string(identical > 0 ? identical - 1 : 0) + "/1000 steps identical";
  r.passed = identical == 1001 && steps == 1001 && moved;
  return r;
}

CriterionResult duality_criterion() {
  CriterionResult r{5, "duality", "inner-max closed form vs random and grid maximizers", false, "",
                    "gap >= -1e-10 over 1000 pi per instance, grid match <= 1e-8 (c = 2)", 0, 10};
  double worst_gap = INFINITY;
  double worst_grid = 0.0;
  double worst_value = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::size_t c = i < 5 ? 2 : 2 + static_cast<std::size_t>(i);
    QuadraticOptions o;
    o.tau_pi = 0.2 + 0.3 * i;
    const DroProblem problem = make_quadratic_problem(500 + static_cast<std::uint64_t>(i), 3, c, 2, o);
    Rng rng = Rng::stream(static_cast<std::uint64_t>(i), "acceptance.duality");
    const ParameterVector theta = random_vector(rng, 3);
    const InnerMax best = inner_max_closed_form(problem, theta);
    worst_value = std::max(worst_value, std::abs(objective_h(problem, theta, best.pi) - best.value));
    for (int t = 0; t < 1000; ++t) {
      const SimplexWeights candidate(random_simplex(rng, static_cast<Eigen::Index>(c), 0.0), problem.prior(), 0.0);
      worst_gap = std::min(worst_gap, best.value - objective_h(problem, theta, candidate));
    }
    if (c == 2) {
      const Vector grid = oracles::inner_max_grid(group_losses(problem, theta), problem.prior(), problem.tau_pi());
      worst_grid = std::max(worst_grid, linf(grid, best.pi.weights()));
    }
  }
  r.measured = "min gap " + fmt("%.2e", worst_gap) + ", grid linf " + fmt("%.1e", worst_grid) +
               ", |h(pi*) - Phi| " + fmt("%.1e", worst_value);
  r.passed = worst_gap >= -1e-10 && worst_grid <= 1e-8 && worst_value <= 1e-10;
  return r;
}

CriterionResult gradients_criterion() {
  CriterionResult r{6, "gradients", "analytic gradients vs central differences", false, "",
                    "quadratic <= 1e-9, logistic <= 1e-6, tiny MLP <= 1e-4 (50 points each)", 0, 0};
  auto audit = [](const DroProblem& problem, double step, double theta_scale, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "acceptance.gradients");
    double worst = 0.0;
    const auto c = static_cast<Eigen::Index>(problem.groups());
    for (int t = 0; t < 50; ++t) {
      const ParameterVector theta = random_vector(rng, static_cast<Eigen::Index>(problem.dim()), theta_scale);
      const SimplexWeights pi(random_simplex(rng, c, 0.5), problem.prior());
      const AuditReport a = finite_difference_audit(problem, theta, pi, step);
      worst = std::max({worst, a.theta_error, a.pi_error});
    }
    return worst;
  };
  const double quad = audit(make_quadratic_problem(61, 4, 3, 2), 1e-4, 1.0, 1);
  const double logi = audit(make_imbalanced_logistic(62, 3, 20, 4.0, {1e-3, 0.05, Grouping::per_class}).problem,
                            1e-5, 1.0, 2);
  MlpDataSpec spec;
  spec.tau_theta = 0.01;
  const double mlp = audit(make_tiny_mlp(63, 2, 6, spec), 1e-5, 0.7, 3);
  r.measured = "quadratic " + fmt("%.1e", quad) + ", logistic " + fmt("%.1e", logi) + ", MLP " + fmt("%.1e", mlp);
  r.passed = quad <= 1e-9 && logi <= 1e-6 && mlp <= 1e-4;
  return r;
}

CriterionResult moreau_criterion() {
  CriterionResult r{7, "moreau", "Moreau prox identities and MLP stationarity decrease", false, "",
                    "closed forms <= 1e-6; decrease on >= 18/20 seeds", 0, 300};
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Rng rng = Rng::stream(static_cast<std::uint64_t>(i), "acceptance.moreau");
    const Eigen::Index d = 2 + i % 4;
    std::vector<QuadraticItem> items;
    for (int j = 0; j < 2; ++j) {
      QuadraticItem it;
      it.a = Matrix(d, d);
      for (Eigen::Index a = 0; a < d * d; ++a) it.a.data()[a] = rng.normal() / std::sqrt(static_cast<double>(d));
      it.b = random_vector(rng, d);
      it.q = random_vector(rng, d, 0.2);
      items.push_back(std::move(it));
    }
    const double tau_theta = 0.1 * (i % 3);
    const DroProblem problem = make_quadratic_from_items({items, items}, tau_theta, 0.5);
    const ParameterVector theta = random_vector(rng, d);
    Rng probe(0);
    const double L = envelope_constant(problem, theta, probe);
    const ParameterVector exact = oracles::quadratic_moreau_prox(items, problem.group_scale(), tau_theta, theta, L);
    MoreauOptions mo;
    mo.tolerance = 1e-9;
    const MoreauResult res = moreau_prox(problem, theta, L, mo);
    const double grad_norm = moreau_grad_norm(problem, theta, L, mo);
    const Vector phi_grad = max_value_and_gradient(problem, exact).gradient;
    worst = std::max({worst, linf(res.prox, exact), std::abs(grad_norm - 2.0 * L * (theta - exact).norm()),
                      linf(phi_grad, 2.0 * L * (theta - exact))});
  }

  ExperimentConfig cfg = find_preset("mlp-stationarity").config;
  cfg.diagnostics.every = 0;
  cfg.diagnostics.moreau_every = cfg.solver.also.iterations;
  cfg.diagnostics.record_pi = false;
  std::size_t decreased = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const RunOutcome out = execute(cfg);
    if (out.record.rows.size() < 2) continue;
    decreased += out.record.rows.back().moreau_grad < out.record.rows.front().moreau_grad;
  }
  r.measured = "closed-form error " + fmt("%.1e", worst) + ", decrease on " + std::to_string(decreased) + "/20";
  r.passed = worst <= 1e-6 && decreased >= 18;
  return r;
}

struct ImbalanceSummary {
  std::map<double, std::size_t> wins;
  std::size_t mass_ok = 0;
  std::size_t runs = 0;
};

ImbalanceSummary imbalance_runs(bool fault, std::size_t threads) {
  ExperimentConfig cfg = find_preset("imbalance-sweep").config;
  cfg.sweep.uc = {10, 30, 50};
  cfg.sweep.methods = {"also", "adam_uniform"};
  cfg.sweep.seeds = 5;
  cfg.solver.also.pi_sign_fault = fault;
  const auto rows = run_sweep(cfg, threads);
  std::map<std::pair<double, std::uint64_t>, double> adam;
  for (const auto& row : rows) {
    if (row.method == "adam_uniform") adam[{row.uc, row.seed}] = row.f1;
  }
  ImbalanceSummary s;
  for (double uc : cfg.sweep.uc) s.wins[uc] = 0;
  for (const auto& row : rows) {
    if (row.method != "also") continue;
    ++s.runs;
    s.wins[row.uc] += row.f1 > adam[{row.uc, row.seed}];
    s.mass_ok += row.minority_mass > row.minority_prior;
  }
  return s;
}

bool imbalance_passes(const ImbalanceSummary& s) {
  bool ok = s.mass_ok == s.runs && s.runs > 0;
  for (const auto& [uc, w] : s.wins) ok = ok && w >= 4;
  return ok;
}

CriterionResult imbalance_criterion(bool fault, std::size_t threads) {
  CriterionResult r{8, "imbalance", "ALSO beats uniform Adam on imbalanced logistic data", false, "",
                    ">= 4/5 F1 wins per uc in {10, 30, 50}; minority mass > prior on every run", 0, 300};
  const ImbalanceSummary s = imbalance_runs(fault, threads);
  std::string wins;
  for (const auto& [uc, w] : s.wins) wins += (wins.empty() ? "" : " ") + fmt("uc=%g:", uc) + std::to_string(w) + "/5";
  r.measured = wins + ", mass > prior " + std::to_string(s.mass_ok) + "/" + std::to_string(s.runs);
  r.passed = imbalance_passes(s);
  return r;
}

CriterionResult mutation_criterion(std::size_t threads) {
  CriterionResult r{9, "mutation", "pi-sign fault breaks the rate or imbalance criterion", false, "",
                    "criterion 2 or 8 fails under the fault", 0, 0};
  const RateSummary rate = rate_instances(true);
  const ImbalanceSummary imb = imbalance_runs(true, threads);
  const bool rate_fails = rate.passed != 20;
  const bool imbalance_fails = !imbalance_passes(imb);
  r.measured = std::string("faulted rate ") + std::to_string(rate.passed) + "/20 (" +
               (rate_fails ? "fails" : "passes") + "), faulted imbalance mass > prior " +
               std::to_string(imb.mass_ok) + "/" + std::to_string(imb.runs) + " (" +
               (imbalance_fails ? "fails" : "passes") + ")";
  r.passed = rate_fails || imbalance_fails;
  return r;
}

bool selected(const std::string& filter, int id, const std::string& tag) {
  if (filter.empty()) return true;
  if (filter == std::to_string(id)) return true;
  return tag.find(filter) != std::string::npos;
}

}  // namespace

std::vector<std::string> acceptance_tags() {
  return {"prox", "rate", "sampling", "adam", "duality", "gradients", "moreau", "imbalance", "mutation"};
}

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options) {
  const bool fault = options.inject_fault;
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  const std::vector<std::function<CriterionResult()>> criteria = {
      prox_criterion,
      [&] { return rate_criterion(fault); },
      sampling_criterion,
      adam_criterion,
      duality_criterion,
      gradients_criterion,
      moreau_criterion,
      [&] { return imbalance_criterion(fault, threads); },
      [&] { return mutation_criterion(threads); },
  };
  const auto tags = acceptance_tags();
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected(options.filter, id, tags[i])) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r.id = id;
      r.tag = tags[i];
      r.title = "raised an exception";
      r.measured = e.what();
      r.passed = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      r.passed = false;
      r.measured += " (over the " + fmt("%.0f", r.budget_seconds) + " s budget)";
    }
    out.push_back(std::move(r));
  }
  return out;
}

void print_acceptance_report(std::ostream& out, const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    char head[64];
    std::snprintf(head, sizeof head, "[%s] %d %-9s", r.passed ? "PASS" : "FAIL", r.id, r.tag.c_str());
    out << head << " " << r.title << ": " << r.measured << " | need " << r.threshold << " | "
        << fmt("%.2f", r.seconds) << " s\n";
  }
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace drokit::harness
