#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arcas/arcas.hpp"

namespace {

using arcas::ExperimentConfig;
using json = nlohmann::json;

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const arcas::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const arcas::FormatError*>(&e)) return "format";
  if (dynamic_cast<const arcas::IoError*>(&e)) return "io";
  if (dynamic_cast<const arcas::DiagnosticsError*>(&e)) return "diagnostics-violation";
  if (dynamic_cast<const arcas::ContractViolationError*>(&e)) return "contract-violation";
  if (dynamic_cast<const arcas::DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const arcas::InconsistentSystemError*>(&e)) return "inconsistent-system";
  if (dynamic_cast<const arcas::EnumerationBudgetError*>(&e)) return "enumeration-budget";
  if (dynamic_cast<const arcas::OracleUnavailableError*>(&e)) return "oracle-unavailable";
  if (dynamic_cast<const arcas::SpecError*>(&e)) return "spec";
  if (dynamic_cast<const arcas::Error*>(&e)) return "error";
  return "internal";
}

int fail(const std::exception& e) {
  json err;
  err["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
  std::cerr << err.dump() << "\n";
  return 1;
}

// flags that were actually passed override config-file values, which
// override defaults
struct ConfigFlags {
  std::string config_path;
  std::string matrix, rhs, generate;
  std::string mode = "row";
  std::vector<std::string> strategies;
  double tol = 1e-8;
  long max_iterations = 100000;
  std::uint64_t seed = 0;
  long reps = 1;
  std::uint64_t seed_stride = 1;
  std::string out = ".";
  std::string trace_level = "norms";
  bool stopping_times = false, meany = false, pi_estimate = false,
       g_estimate = false, nullspace = false;
  long pi_trials = 200, pi_configs = 50, g_trials = 8, g_inner = 8;
};

void add_common_flags(CLI::App& cmd, ConfigFlags& f, bool multi_strategy) {
  cmd.add_option("--config", f.config_path, "JSON config file; flags override it");
  cmd.add_option("--matrix", f.matrix, "Matrix Market file");
  cmd.add_option("--rhs", f.rhs, "right-hand side file, one value per line");
  cmd.add_option("--generate", f.generate,
                 "generator spec, e.g. random-consistent:n=20,d=10,seed=3");
  cmd.add_option("--mode", f.mode, "row or column")
      ->check(CLI::IsMember({"row", "column"}));
  if (multi_strategy)
    cmd.add_option("--strategy", f.strategies, "strategy spec (repeatable)");
  else
    cmd.add_option("--strategy", f.strategies, "strategy spec")->expected(0, 1);
  cmd.add_option("--tol", f.tol, "relative residual tolerance");
  cmd.add_option("--max-iterations", f.max_iterations, "iteration budget");
  cmd.add_option("--seed", f.seed, "base RNG seed");
  cmd.add_option("--reps", f.reps, "repetitions with strided seeds");
  cmd.add_option("--seed-stride", f.seed_stride, "seed increment between reps");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--trace-level", f.trace_level, "none, norms, or full-directions");
  cmd.add_option("--pi-trials", f.pi_trials, "trials per sampled subspace");
  cmd.add_option("--pi-configs", f.pi_configs, "sampled (V, y0) configurations");
  cmd.add_option("--g-trials", f.g_trials, "outer (y0, state) samples");
  cmd.add_option("--g-inner", f.g_inner, "inner trials per sample");
}

void add_diag_flags(CLI::App& cmd, ConfigFlags& f) {
  cmd.add_flag("--stopping-times", f.stopping_times, "detect stopping segments");
  cmd.add_flag("--meany", f.meany, "check segment contraction bounds");
  cmd.add_flag("--pi-estimate", f.pi_estimate, "Monte-Carlo exploration constant");
  cmd.add_flag("--g-estimate", f.g_estimate, "Monte-Carlo Gram determinant bound");
  cmd.add_flag("--nullspace-drift", f.nullspace, "null-space constancy check (row mode)");
}

// keys mirror the long flag names with underscores
void apply_config_file(const CLI::App& cmd, ConfigFlags& f) {
  if (f.config_path.empty()) return;
  std::ifstream in(f.config_path);
  if (!in) throw arcas::IoError("cannot open config '" + f.config_path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    throw arcas::FormatError(f.config_path, 0, e.what());
  }
  auto given = [&](const std::string& flag) {
    const auto* opt = cmd.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  auto pull = [&](const std::string& flag, const std::string& key, auto& slot) {
    if (!given(flag) && cfg.contains(key)) cfg.at(key).get_to(slot);
  };
  pull("--matrix", "matrix", f.matrix);
  pull("--rhs", "rhs", f.rhs);
  pull("--generate", "generate", f.generate);
  pull("--mode", "mode", f.mode);
  pull("--tol", "tol", f.tol);
  pull("--max-iterations", "max_iterations", f.max_iterations);
  pull("--seed", "seed", f.seed);
  pull("--reps", "reps", f.reps);
  pull("--seed-stride", "seed_stride", f.seed_stride);
  pull("--out", "out", f.out);
  pull("--trace-level", "trace_level", f.trace_level);
  pull("--pi-trials", "pi_trials", f.pi_trials);
  pull("--pi-configs", "pi_configs", f.pi_configs);
  pull("--g-trials", "g_trials", f.g_trials);
  pull("--g-inner", "g_inner", f.g_inner);
  if (!given("--strategy")) {
    if (cfg.contains("strategy")) f.strategies = {cfg.at("strategy").get<std::string>()};
    if (cfg.contains("strategies"))
      f.strategies = cfg.at("strategies").get<std::vector<std::string>>();
  }
  if (cfg.contains("diagnostics")) {
    const auto& d = cfg.at("diagnostics");
    auto pull_flag = [&](const std::string& flag, const std::string& key, bool& slot) {
      if (!given(flag) && d.contains(key)) d.at(key).get_to(slot);
    };
    pull_flag("--stopping-times", "stopping_times", f.stopping_times);
    pull_flag("--meany", "meany", f.meany);
    pull_flag("--pi-estimate", "pi_estimate", f.pi_estimate);
    pull_flag("--g-estimate", "g_estimate", f.g_estimate);
    pull_flag("--nullspace-drift", "nullspace_drift", f.nullspace);
  }
}

ExperimentConfig to_experiment(const ConfigFlags& f, const std::string& strategy) {
  ExperimentConfig c;
  c.matrix_path = f.matrix;
  c.rhs_path = f.rhs;
  c.generate = f.generate;
  c.mode = f.mode == "column" ? arcas::Mode::column_action : arcas::Mode::row_action;
  c.strategy = strategy;
  c.solve.tol = f.tol;
  c.solve.max_iterations = f.max_iterations;
  c.solve.seed = f.seed;
  c.solve.trace_level = arcas::parse_trace_level(f.trace_level);
  c.diag.stopping_times = f.stopping_times;
  c.diag.meany = f.meany;
  c.diag.pi_estimate = f.pi_estimate;
  c.diag.g_estimate = f.g_estimate;
  c.diag.nullspace = f.nullspace;
  c.pi_trials = f.pi_trials;
  c.pi_configs = f.pi_configs;
  c.g_trials = f.g_trials;
  c.g_inner = f.g_inner;
  c.output_dir = f.out;
  c.reps = f.reps;
  c.seed_stride = f.seed_stride;
  return c;
}

int cmd_solve(const CLI::App& cmd, ConfigFlags& f) {
  apply_config_file(cmd, f);
  if (f.strategies.empty()) f.strategies = {"iid"};
  if (f.strategies.size() != 1)
    throw arcas::ConfigError("solve takes exactly one strategy; use compare for several");
  const auto out = arcas::run(to_experiment(f, f.strategies.front()));
  std::cout << out.summary.dump(2) << "\n";
  return 0;
}

int cmd_diagnose(const CLI::App& cmd, ConfigFlags& f) {
  apply_config_file(cmd, f);
  if (f.strategies.empty()) f.strategies = {"iid"};
  if (f.strategies.size() != 1)
    throw arcas::ConfigError("diagnose takes exactly one strategy");
  ExperimentConfig c = to_experiment(f, f.strategies.front());
  // diagnose means: everything trace-derived on, estimators opt-in
  c.diag.stopping_times = true;
  c.diag.meany = true;
  if (c.mode == arcas::Mode::row_action) c.diag.nullspace = true;
  const auto out = arcas::run(c);
  std::cout << out.diagnostics.dump(2) << "\n";
  return 0;
}

int cmd_compare(const CLI::App& cmd, ConfigFlags& f) {
  apply_config_file(cmd, f);
  if (f.strategies.size() < 2)
    throw arcas::ConfigError("compare needs at least two --strategy specs");
  std::vector<ExperimentConfig> configs;
  configs.reserve(f.strategies.size());
  for (const auto& s : f.strategies) configs.push_back(to_experiment(f, s));
  const json report = arcas::compare(configs);
  namespace fs = std::filesystem;
  fs::create_directories(f.out);
  arcas::write_comparison_csv((fs::path(f.out) / "comparison.csv").string(), report);
  {
    std::ofstream jf(fs::path(f.out) / "comparison.json");
    if (!jf) throw arcas::IoError("cannot write comparison.json in '" + f.out + "'");
    jf << report.dump(2) << "\n";
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_generate(const std::string& spec_text, const std::string& out_matrix,
                 const std::string& out_rhs, const std::string& out_solution) {
  const auto spec = arcas::parse_generator_spec(spec_text);
  const auto [sys, x_true] = arcas::generate_system(spec);
  arcas::write_matrix_market(sys.A, out_matrix);
  arcas::write_rhs(sys.b, out_rhs);
  if (!out_solution.empty()) arcas::write_rhs(x_true, out_solution);
  json info;
  info["kind"] = sys.kind;
  info["n"] = sys.n();
  info["d"] = sys.d();
  info["groups"] = sys.num_groups;
  info["matrix"] = out_matrix;
  info["rhs"] = out_rhs;
  std::cout << info.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive row/column-action solvers with convergence diagnostics"};
  app.require_subcommand(1);

  ConfigFlags solve_f, diag_f, cmp_f;
  auto* solve_cmd = app.add_subcommand("solve", "run one strategy, write traces + summary");
  add_common_flags(*solve_cmd, solve_f, false);
  add_diag_flags(*solve_cmd, solve_f);

  auto* diag_cmd = app.add_subcommand("diagnose", "solve once and emit diagnostics JSON");
  add_common_flags(*diag_cmd, diag_f, false);
  diag_cmd->add_flag("--pi-estimate", diag_f.pi_estimate, "Monte-Carlo exploration constant");
  diag_cmd->add_flag("--g-estimate", diag_f.g_estimate, "Monte-Carlo Gram determinant bound");

  auto* cmp_cmd = app.add_subcommand("compare", "run several strategies on one system");
  add_common_flags(*cmp_cmd, cmp_f, true);

  std::string gen_spec, gen_matrix = "system.mtx", gen_rhs = "rhs.txt", gen_solution;
  auto* gen_cmd = app.add_subcommand("generate", "write a generated system to disk");
  gen_cmd->add_option("--spec", gen_spec, "generator spec")->required();
  gen_cmd->add_option("--out-matrix", gen_matrix, "Matrix Market output path");
  gen_cmd->add_option("--out-rhs", gen_rhs, "right-hand side output path");
  gen_cmd->add_option("--out-solution", gen_solution, "planted solution output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      json err;
      err["error"] = {{"kind", "usage"}, {"message", e.what()}};
      std::cerr << err.dump() << "\n";
    }
    return app.exit(e);
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(*solve_cmd, solve_f);
    if (diag_cmd->parsed()) return cmd_diagnose(*diag_cmd, diag_f);
    if (cmp_cmd->parsed()) return cmd_compare(*cmp_cmd, cmp_f);
    if (gen_cmd->parsed())
      return cmd_generate(gen_spec, gen_matrix, gen_rhs, gen_solution);
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
