#include "drokit/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace drokit::harness {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::also: return "also";
    case SolverKind::omp: return "omp";
    case SolverKind::baseline: return "baseline";
  }
  return "unknown";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "also") return SolverKind::also;
  if (name == "omp") return SolverKind::omp;
  if (name == "baseline") return SolverKind::baseline;
  throw InvalidArgument("unknown solver '" + name + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double read_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("expected a real number, got '" + v + "'");
  }
  return out;
}

std::uint64_t read_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool read_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw InvalidArgument("empty list entry");
    out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string grouping_name(Grouping g) { return g == Grouping::per_object ? "per_object" : "per_class"; }

Grouping parse_grouping(const std::string& v) {
  if (v == "per_object") return Grouping::per_object;
  if (v == "per_class") return Grouping::per_class;
  throw InvalidArgument("unknown grouping '" + v + "'");
}

struct Key {
  std::string name;
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Key size_key(std::string name, std::string help, T ExperimentConfig::*outer, std::size_t T::*field) {
  return {std::move(name), std::move(help),
          [=](ExperimentConfig& c, const std::string& v) { (c.*outer).*field = read_unsigned(v); },
          [=](const ExperimentConfig& c) { return std::to_string((c.*outer).*field); }};
}

template <typename T>
Key real_key(std::string name, std::string help, T ExperimentConfig::*outer, double T::*field) {
  return {std::move(name), std::move(help),
          [=](ExperimentConfig& c, const std::string& v) { (c.*outer).*field = read_double(v); },
          [=](const ExperimentConfig& c) { return format_double((c.*outer).*field); }};
}

template <typename T>
Key bool_key(std::string name, std::string help, T ExperimentConfig::*outer, bool T::*field) {
  return {std::move(name), std::move(help),
          [=](ExperimentConfig& c, const std::string& v) { (c.*outer).*field = read_bool(v); },
          [=](const ExperimentConfig& c) { return std::string((c.*outer).*field ? "true" : "false"); }};
}

#define ALSO_REAL(key, field, help)                                                          \
  Key {                                                                                      \
    key, help, [](ExperimentConfig& c, const std::string& v) { c.solver.also.field = read_double(v); }, \
        [](const ExperimentConfig& c) { return format_double(c.solver.also.field); }          \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"experiment.name", "label written to summaries",
                 [](ExperimentConfig& c, const std::string& v) { c.name = v; },
                 [](const ExperimentConfig& c) { return c.name; }});
    k.push_back({"experiment.seed", "master seed; expands to the data, sampler, init and restarts streams",
                 [](ExperimentConfig& c, const std::string& v) { c.seed = read_unsigned(v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    k.push_back({"experiment.output", "CSV path",
                 [](ExperimentConfig& c, const std::string& v) { c.output = v; },
                 [](const ExperimentConfig& c) { return c.output; }});

    k.push_back({"problem.family", "quadratic | logistic | tiny_mlp",
                 [](ExperimentConfig& c, const std::string& v) { c.problem.family = parse_loss_family(v); },
                 [](const ExperimentConfig& c) { return to_string(c.problem.family); }});
    k.push_back(size_key("problem.dim", "parameter dimension (logistic: features, bias added)",
                         &ExperimentConfig::problem, &ProblemSpec::dim));
    k.push_back(size_key("problem.groups", "number of groups c (quadratic, tiny_mlp)",
                         &ExperimentConfig::problem, &ProblemSpec::groups));
    k.push_back(size_key("problem.items_per_group", "items per group (quadratic, tiny_mlp)",
                         &ExperimentConfig::problem, &ProblemSpec::items_per_group));
    k.push_back(real_key("problem.tau_theta", "regularization of theta", &ExperimentConfig::problem,
                         &ProblemSpec::tau_theta));
    k.push_back(real_key("problem.tau_pi", "KL regularization of pi toward the prior",
                         &ExperimentConfig::problem, &ProblemSpec::tau_pi));
    k.push_back(real_key("problem.uc", "majority / minority size ratio (logistic)",
                         &ExperimentConfig::problem, &ProblemSpec::uc));
    k.push_back(size_key("problem.n_per_class", "majority class size (logistic)",
                         &ExperimentConfig::problem, &ProblemSpec::n_per_class));
    k.push_back({"problem.grouping", "per_object | per_class (logistic)",
                 [](ExperimentConfig& c, const std::string& v) { c.problem.grouping = parse_grouping(v); },
                 [](const ExperimentConfig& c) { return grouping_name(c.problem.grouping); }});
    k.push_back(real_key("problem.separation", "distance between class means (logistic)",
                         &ExperimentConfig::problem, &ProblemSpec::separation));
    k.push_back(size_key("problem.test_per_class", "balanced test points per class (logistic)",
                         &ExperimentConfig::problem, &ProblemSpec::test_per_class));
    k.push_back(size_key("problem.hidden", "hidden units (tiny_mlp)", &ExperimentConfig::problem,
                         &ProblemSpec::hidden));
    k.push_back(real_key("problem.spread", "cluster standard deviation (tiny_mlp)",
                         &ExperimentConfig::problem, &ProblemSpec::spread));
    k.push_back(real_key("problem.theta0", "starting value of every theta coordinate (not tiny_mlp)",
                         &ExperimentConfig::problem, &ProblemSpec::theta0));
    k.push_back(bool_key("problem.bilinear_toy", "use the d = 1, c = 2 bilinear toy problem",
                         &ExperimentConfig::problem, &ProblemSpec::bilinear_toy));
    k.push_back({"problem.snapshot", "load the problem from this snapshot instead (empty: generate)",
                 [](ExperimentConfig& c, const std::string& v) { c.problem.snapshot = v; },
                 [](const ExperimentConfig& c) { return c.problem.snapshot; }});

    k.push_back({"solver.kind", "also | omp | baseline",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.kind = parse_solver_kind(v); },
                 [](const ExperimentConfig& c) { return to_string(c.solver.kind); }});
    k.push_back(ALSO_REAL("solver.alpha", alpha, "ALSO optimism weight (0: descent-ascent)"));
    k.push_back(ALSO_REAL("solver.gamma_theta", gamma_theta, "ALSO theta stepsize"));
    k.push_back(ALSO_REAL("solver.gamma_pi", gamma_pi, "ALSO pi stepsize"));
    k.push_back(ALSO_REAL("solver.beta1", beta1, "Adam first-moment decay"));
    k.push_back(ALSO_REAL("solver.beta2", beta2, "Adam second-moment decay"));
    k.push_back(ALSO_REAL("solver.eps", eps, "Adam epsilon (coordinate_wise)"));
    k.push_back(ALSO_REAL("solver.b0", b0, "initial b of the scalar_norm estimator"));
    k.push_back(ALSO_REAL("solver.set_floor", set_floor, "lower bound of U for option2"));
    k.push_back(ALSO_REAL("solver.floor", floor, "floor re-applied after every simplex step"));
    k.push_back({"solver.batch", "pairs per stochastic step",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.also.batch = read_unsigned(v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.solver.also.batch); }});
    k.push_back({"solver.iterations", "iterations (ALSO, baselines and OMP)",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.also.iterations = read_unsigned(v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.solver.also.iterations); }});
    k.push_back({"solver.pi_update", "option1 | option2",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.also.pi_update = parse_pi_update(v); },
                 [](const ExperimentConfig& c) { return to_string(c.solver.also.pi_update); }});
    k.push_back({"solver.adam", "coordinate_wise | scalar_norm",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.also.adam = parse_adam_variant(v); },
                 [](const ExperimentConfig& c) { return to_string(c.solver.also.adam); }});
    k.push_back({"solver.sampling", "uniform_all | two_stage | probability_weighted | full_batch",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.solver.also.sampling = parse_sampling_strategy(v);
                 },
                 [](const ExperimentConfig& c) { return to_string(c.solver.also.sampling); }});
    k.push_back({"solver.baseline", "adam_uniform | adamw_uniform | static_weights | sgda",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.solver.baseline = parse_baseline_variant(v);
                 },
                 [](const ExperimentConfig& c) { return to_string(c.solver.baseline); }});
    k.push_back(bool_key("solver.stationarity", "alpha = 0, scalar_norm, option2 and tau_theta = 0",
                         &ExperimentConfig::solver, &SolverSpec::stationarity));
    k.push_back({"solver.omp_gamma", "OMP stepsize, or auto for 1 / (2 L_F)",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.solver.omp_auto_gamma = v == "auto";
                   if (!c.solver.omp_auto_gamma) c.solver.omp.gamma = read_double(v);
                 },
                 [](const ExperimentConfig& c) {
                   return c.solver.omp_auto_gamma ? std::string("auto") : format_double(c.solver.omp.gamma);
                 }});
    k.push_back({"solver.omp_gamma_pi", "OMP pi stepsize, or auto for omp_gamma",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.solver.omp.gamma_pi = v == "auto" ? std::nullopt : std::optional(read_double(v));
                 },
                 [](const ExperimentConfig& c) {
                   return c.solver.omp.gamma_pi ? format_double(*c.solver.omp.gamma_pi) : std::string("auto");
                 }});
    k.push_back({"solver.omp_alpha", "OMP momentum, or auto for 1 / (1 + gamma tau)",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.solver.omp.alpha = v == "auto" ? std::nullopt : std::optional(read_double(v));
                 },
                 [](const ExperimentConfig& c) {
                   return c.solver.omp.alpha ? format_double(*c.solver.omp.alpha) : std::string("auto");
                 }});
    k.push_back({"solver.omp_prox_scaling", "scale OMP steps by 1 / (1 + gamma tau)",
                 [](ExperimentConfig& c, const std::string& v) { c.solver.omp.prox_scaling = read_bool(v); },
                 [](const ExperimentConfig& c) {
                   return std::string(c.solver.omp.prox_scaling ? "true" : "false");
                 }});

    k.push_back(bool_key("diagnostics.reference", "compute the saddle point and log phi_k",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::reference));
    k.push_back(size_key("diagnostics.every", "checkpoint cadence (0: first and last)",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::every));
    k.push_back(size_key("diagnostics.moreau_every", "Moreau checkpoint cadence (0: off)",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::moreau_every));
    k.push_back(size_key("diagnostics.moreau_budget", "inner iterations per Moreau restart",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::moreau_budget));
    k.push_back(bool_key("diagnostics.record_pi", "write pi_0..pi_{c-1} columns",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::record_pi));
    k.push_back(real_key("diagnostics.stop_phi_below", "stop once phi_k is below this (0: off)",
                         &ExperimentConfig::diagnostics, &DiagnosticsSpec::stop_phi_below));

    k.push_back({"sweep.uc", "comma-separated uc grid (empty: no sweep)",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.sweep.uc.clear();
                   for (const auto& item : split_list(v)) c.sweep.uc.push_back(read_double(item));
                 },
                 [](const ExperimentConfig& c) {
                   std::vector<std::string> items;
                   for (double u : c.sweep.uc) items.push_back(format_double(u));
                   return join(items);
                 }});
    k.push_back({"sweep.methods", "comma-separated: also and/or baseline names",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.sweep.methods = split_list(v);
                   for (const auto& m : c.sweep.methods) {
                     if (m != "also") parse_baseline_variant(m);
                   }
                 },
                 [](const ExperimentConfig& c) { return join(c.sweep.methods); }});
    k.push_back(size_key("sweep.seeds", "seeds per grid point", &ExperimentConfig::sweep, &SweepSpec::seeds));
    return k;
  }();
  return table;
}

#undef ALSO_REAL

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    std::string line = std::string(raw);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;

    const Key* k = find_key(key);
    if (!k) throw ConfigError(line_no, "unknown key '" + key + "'");
    try {
      k->set(config, value);
    } catch (const Error& e) {
      throw ConfigError(line_no, key + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    const auto dot = k.name.find('.');
    const std::string s = k.name.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += k.name.substr(dot + 1) + " = " + k.get(config) + "\n";
  }
  return out;
}

std::string config_reference() {
  const ExperimentConfig defaults;
  std::string out = "Config keys (default in brackets):\n";
  for (const auto& k : keys()) {
    out += "  " + k.name + " [" + k.get(defaults) + "]\n      " + k.help + "\n";
  }
  return out;
}

}  // namespace drokit::harness
