#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drokit/error.hpp"
#include "drokit/harness/acceptance.hpp"
#include "drokit/harness/config.hpp"
#include "drokit/harness/csv.hpp"
#include "drokit/harness/experiment.hpp"

namespace drokit::harness {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("drokit_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the wall_ms column (last field) of every line.
std::string without_wall_clock(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

TEST(Config, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_config(""), ExperimentConfig{});
  EXPECT_EQ(parse_config("# only a comment\n\n"), ExperimentConfig{});
}

TEST(Config, DottedAndSectionKeys) {
  const ExperimentConfig a = parse_config("solver.alpha = 0\n");
  EXPECT_EQ(a.solver.also.alpha, 0.0);
  const ExperimentConfig b = parse_config("[solver]\nalpha = 0   # trailing comment\nkind = omp\n[problem]\nfamily = tiny_mlp\n");
  EXPECT_EQ(b.solver.also.alpha, 0.0);
  EXPECT_EQ(b.solver.kind, SolverKind::omp);
  EXPECT_EQ(b.problem.family, LossFamily::tiny_mlp);
  const ExperimentConfig c = parse_config("sweep.uc = 1, 2.5, 10\nsweep.methods = also, adam_uniform\n");
  EXPECT_EQ(c.sweep.uc, (std::vector<double>{1, 2.5, 10}));
  EXPECT_EQ(c.sweep.methods, (std::vector<std::string>{"also", "adam_uniform"}));
}

TEST(Config, RoundTripsThroughText) {
  for (const auto& preset : presets()) {
    const std::string text = serialize_config(preset.config);
    EXPECT_EQ(parse_config(text), preset.config) << preset.name;
  }
  ExperimentConfig odd;
  odd.solver.also.gamma_theta = 0.1 + 0.2;
  odd.solver.omp.gamma_pi = 1.0 / 3.0;
  odd.problem.tau_pi = 1e-300;
  EXPECT_EQ(parse_config(serialize_config(odd)), odd);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config("experiment.seed = 1\n\nsolver.alhpa = 0\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("alhpa"), std::string::npos);
  }
  try {
    parse_config("[solver]\nbatch = many\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_config("solver.pi_update = option7\n"), ConfigError);
  EXPECT_THROW(parse_config("no equals sign\n"), ConfigError);
  EXPECT_THROW(parse_config("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(load_config(temp_path("does_not_exist.toml")), Error);
}

TEST(Config, ReferenceListsKeys) {
  const std::string ref = config_reference();
  for (const char* key : {"solver.alpha", "problem.family", "diagnostics.reference", "sweep.uc"}) {
    EXPECT_NE(ref.find(key), std::string::npos) << key;
  }
}

TEST(Csv, FormatsSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(NAN), "nan");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(trajectory_header(2, true), "k,h,phi_k,moreau_grad,pi_0,pi_1,grad_norm,wall_ms");
  EXPECT_EQ(trajectory_header(2, false), "k,h,phi_k,moreau_grad,grad_norm,wall_ms");
}

TEST(Csv, TrajectoryRowsMatchRecord) {
  TrajectoryRecord r;
  TrajectoryRow row;
  row.k = 3;
  row.h = 1.5;
  row.pi = (Vector(2) << 0.25, 0.75).finished();
  row.grad_norm = 2.0;
  r.append(row);
  std::ostringstream out;
  write_trajectory_csv(out, r, 2, true);
  EXPECT_EQ(out.str(), "k,h,phi_k,moreau_grad,pi_0,pi_1,grad_norm,wall_ms\n3,1.5,nan,nan,0.25,0.75,2,0\n");
  row.k = 3;
  EXPECT_THROW(r.append(row), InvalidArgument);
}

TEST(Csv, TableChecksWidth) {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  EXPECT_THROW(t.add_row({"1"}), DimensionMismatch);
  std::ostringstream out;
  t.write(out);
  EXPECT_EQ(out.str(), "a,b\n1,2\n");
}

TEST(Experiment, RunIsDeterministicApartFromWallClock) {
  ExperimentConfig cfg = find_preset("quadratic-also").config;
  cfg.solver.also.iterations = 200;
  cfg.output = temp_path("det_a.csv");
  ASSERT_EQ(run_experiment(cfg), 0);
  const std::string a = slurp(cfg.output);
  cfg.output = temp_path("det_b.csv");
  ASSERT_EQ(run_experiment(cfg), 0);
  const std::string b = slurp(cfg.output);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(without_wall_clock(a), without_wall_clock(b));
  cfg.seed += 1;
  cfg.output = temp_path("det_c.csv");
  ASSERT_EQ(run_experiment(cfg), 0);
  EXPECT_NE(without_wall_clock(a), without_wall_clock(slurp(cfg.output)));
}

TEST(Experiment, OmpRunWithReferenceWritesSummary) {
  ExperimentConfig cfg = find_preset("omp-rate").config;
  cfg.solver.also.iterations = 3000;
  cfg.output = temp_path("omp.csv");
  std::remove((cfg.output + ".summary.csv").c_str());
  const RunOutcome out = execute(cfg);
  ASSERT_TRUE(out.reference.has_value());
  ASSERT_TRUE(out.rate.has_value());
  EXPECT_LT(out.rate->fit.rate, 1.0);
  ASSERT_EQ(run_experiment(cfg), 0);
  EXPECT_FALSE(slurp(cfg.output + ".summary.csv").empty());
}

TEST(Experiment, PresetsBuild) {
  for (const auto& preset : presets()) {
    EXPECT_NO_THROW(build_problem(preset.config)) << preset.name;
    EXPECT_FALSE(preset.description.empty());
  }
  EXPECT_THROW(find_preset("nope"), InvalidArgument);
  const ExperimentConfig& t2 = find_preset("mlp-stationarity").config;
  const AlsoConfig eff = effective_also_config(t2);
  EXPECT_EQ(eff.alpha, 0.0);
  EXPECT_EQ(build_problem(t2).problem.tau_theta(), 0.0);
}

TEST(Experiment, SweepRowsFollowNestingOrder) {
  ExperimentConfig cfg = find_preset("imbalance-sweep").config;
  cfg.problem.n_per_class = 60;
  cfg.problem.test_per_class = 50;
  cfg.solver.also.iterations = 50;
  cfg.sweep.uc = {2, 5};
  cfg.sweep.methods = {"also", "static_weights"};
  cfg.sweep.seeds = 2;
  const std::vector<SweepRow> rows = run_sweep(cfg, 2);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].uc, 2.0);
  EXPECT_EQ(rows[0].method, "also");
  EXPECT_EQ(rows[1].seed, cfg.seed + 1);
  EXPECT_EQ(rows[2].method, "static_weights");
  EXPECT_EQ(rows[7].uc, 5.0);
  const SweepRow again = run_imbalance_trial(cfg, 5, "static_weights", cfg.seed + 1);
  EXPECT_EQ(again.f1, rows[7].f1);
  EXPECT_EQ(again.minority_mass, rows[7].minority_mass);
}

TEST(Acceptance, TagsAndFilter) {
  const std::vector<std::string> tags = acceptance_tags();
  EXPECT_EQ(tags.size(), 9u);
  AcceptanceOptions opt;
  opt.filter = "prox";
  const std::vector<CriterionResult> r = run_acceptance_suite(opt);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 1);
  EXPECT_TRUE(r[0].passed) << r[0].measured;
  std::ostringstream out;
  print_acceptance_report(out, r);
  EXPECT_NE(out.str().find("PASS"), std::string::npos);
}

TEST(Acceptance, InjectedFaultIsDetected) {
  AcceptanceOptions opt;
  opt.filter = "rate";
  opt.inject_fault = true;
  const std::vector<CriterionResult> r = run_acceptance_suite(opt);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(all_passed(r));
}

}  // namespace
}  // namespace drokit::harness
