#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "drokit/harness/acceptance.hpp"
#include "drokit/harness/config.hpp"
#include "drokit/harness/experiment.hpp"

namespace dh = drokit::harness;

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Config file (key = value; see --help-config)");
  cmd->add_option("--preset", c.preset, "Start from a bundled preset (see list-presets)");
  cmd->add_option("--seed", c.seed, "Master seed (overrides experiment.seed)");
  cmd->add_option("--out", c.out, "Output CSV path (overrides experiment.output)");
  cmd->add_flag("--strict", c.strict, "Exit nonzero when a diagnostic cannot be certified");
}

dh::ExperimentConfig resolve(const Common& c) {
  dh::ExperimentConfig config;
  if (!c.preset.empty()) config = dh::find_preset(c.preset).config;
  if (!c.config_path.empty()) {
    if (!c.preset.empty()) throw CLI::ValidationError("--config and --preset are exclusive");
    config = dh::load_config(c.config_path);
  }
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.output = c.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drokit: KL-regularized group DRO solvers (OMP, ALSO) and diagnostics"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for all subcommands");
  bool help_config = false;
  app.add_flag("--help-config", help_config, "List every config key with its default");

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment and write its trajectory CSV");
  add_common(run, run_opts);
  bool print_config = false;
  run->add_flag("--print-config", print_config, "Print the resolved config and exit");

  Common sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Run the (uc, method, seed) grid of a config in parallel");
  add_common(sweep, sweep_opts);

  std::string filter;
  bool inject_fault = false;
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite and print one line per criterion");
  verify->add_option("--filter", filter, "Criterion number or tag substring (e.g. sampling)");
  verify->add_flag("--inject-fault", inject_fault, "Run with the pi-sign fault (suite must fail)");

  auto* list = app.add_subcommand("list-presets", "List bundled experiment presets");

  app.footer("Environment: DROKIT_THREADS caps the worker threads of sweep and verify.\n"
             "Config keys: drokit --help-config run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (help_config) {
    std::cout << dh::config_reference();
    return 0;
  }

  try {
    if (*run) {
      const dh::ExperimentConfig config = resolve(run_opts);
      if (print_config) {
        std::cout << dh::serialize_config(config);
        return 0;
      }
      if (!config.sweep.uc.empty()) std::cerr << "note: sweep keys are ignored by run; use sweep\n";
      return dh::run_experiment(config, {run_opts.strict, &std::cerr});
    }
    if (*sweep) {
      return dh::run_sweep_to_csv(resolve(sweep_opts), {sweep_opts.strict, &std::cerr});
    }
    if (*verify) {
      dh::AcceptanceOptions options;
      options.filter = filter;
      options.inject_fault = inject_fault;
      options.threads = dh::thread_cap();
      const auto results = dh::run_acceptance_suite(options);
      dh::print_acceptance_report(std::cout, results);
      if (results.empty()) {
        std::cerr << "no criterion matches filter '" << filter << "'\n";
        return 2;
      }
      return dh::all_passed(results) ? 0 : 1;
    }
    if (*list) {
      for (const auto& p : dh::presets()) {
        std::cout << p.name << (p.sweep ? " (sweep)" : "") << "\n    " << p.description << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
