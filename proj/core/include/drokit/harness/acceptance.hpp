#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drokit::harness {

struct CriterionResult {
  int id = 0;
  std::string tag;        // filter keyword
  std::string title;
  bool passed = false;
  std::string measured;
  std::string threshold;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0: no runtime budget
};

struct AcceptanceOptions {
  /// Substring of a tag ("prox", "rate", "sampling", "adam", "duality",
  /// "gradients", "moreau", "imbalance", "mutation") or a criterion number;
  /// empty runs everything.
  std::string filter;
  /// Runs the rate and imbalance criteria with the pi-sign fault injected.
  bool inject_fault = false;
  /// Worker threads for the imbalance runs.
  std::size_t threads = 1;
};

/// Criterion tags in suite order.
std::vector<std::string> acceptance_tags();

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options = {});

/// One line per criterion: status, id, tag, measured vs threshold, runtime.
void print_acceptance_report(std::ostream& out, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace drokit::harness
