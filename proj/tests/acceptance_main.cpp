// Acceptance suite: one PASS/FAIL line per criterion, exit code 0 only when
// every selected criterion passes.
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "drokit/harness/acceptance.hpp"
#include "drokit/harness/experiment.hpp"

int main(int argc, char** argv) {
  namespace dh = drokit::harness;
  CLI::App app{"drokit acceptance suite"};
  dh::AcceptanceOptions options;
  app.add_option("--filter", options.filter, "Criterion number or tag substring");
  app.add_flag("--inject-fault", options.inject_fault, "Flip the pi-block sign; the suite must then fail");
  CLI11_PARSE(app, argc, argv);
  options.threads = dh::thread_cap();
  try {
    const auto results = dh::run_acceptance_suite(options);
    dh::print_acceptance_report(std::cout, results);
    if (results.empty()) {
      std::cerr << "no criterion matches filter '" << options.filter << "'\n";
      return 2;
    }
    return dh::all_passed(results) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
