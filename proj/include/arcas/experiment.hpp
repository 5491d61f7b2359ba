#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arcas/diagnostics.hpp"
#include "arcas/engine.hpp"
#include "arcas/errors.hpp"
#include "arcas/estimators.hpp"
#include "arcas/mm_io.hpp"
#include "arcas/oracle.hpp"
#include "arcas/strategies.hpp"
#include "arcas/system.hpp"
#include "arcas/trace_io.hpp"

namespace arcas {

// nlohmann::json keeps object keys sorted, which the byte-identical rerun
// guarantee relies on
using json = nlohmann::json;

struct DiagnosticsToggles {
  bool stopping_times = false;
  bool meany = false;
  bool pi_estimate = false;
  bool g_estimate = false;
  bool nullspace = false;

  bool any() const {
    return stopping_times || meany || pi_estimate || g_estimate || nullspace;
  }
  bool needs_full_trace() const { return stopping_times || meany || nullspace; }
};

struct ExperimentConfig {
  std::string matrix_path;  // with rhs_path; mutually exclusive with generate
  std::string rhs_path;
  std::string generate;     // generator spec string
  Mode mode = Mode::row_action;
  std::string strategy = "iid";
  SolveConfig solve;
  DiagnosticsToggles diag;
  long pi_trials = 200;
  long pi_configs = 50;
  long g_trials = 8;
  long g_inner = 8;
  std::string output_dir = ".";
  long reps = 1;
  std::uint64_t seed_stride = 1;
  std::string label;  // row label in comparisons; defaults to the strategy spec
};

namespace detail {

inline void validate_config(const ExperimentConfig& c) {
  if (c.reps < 1) throw ConfigError("reps must be >= 1");
  if (c.seed_stride == 0) throw ConfigError("seed-stride must be >= 1");
  const bool gen = !c.generate.empty();
  const bool files = !c.matrix_path.empty() || !c.rhs_path.empty();
  if (gen == files)
    throw ConfigError("exactly one system source: generate spec or matrix+rhs files");
  if (files && (c.matrix_path.empty() || c.rhs_path.empty()))
    throw ConfigError("matrix and rhs paths must both be given");
}

inline std::string source_of(const ExperimentConfig& c) {
  return c.generate.empty() ? c.matrix_path + " + " + c.rhs_path : c.generate;
}

struct RepStats {
  long iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  long group_swaps = 0;
  std::uint64_t seed = 0;
};

inline double mean_iterations(const std::vector<RepStats>& reps) {
  double s = 0.0;
  for (const auto& r : reps) s += static_cast<double>(r.iterations);
  return s / static_cast<double>(reps.size());
}

inline double median_iterations(std::vector<RepStats> reps) {
  std::sort(reps.begin(), reps.end(), [](const RepStats& a, const RepStats& b) {
    return a.iterations < b.iterations;
  });
  const std::size_t m = reps.size() / 2;
  if (reps.size() % 2 == 1) return static_cast<double>(reps[m].iterations);
  return 0.5 * static_cast<double>(reps[m - 1].iterations + reps[m].iterations);
}

}  // namespace detail

inline LinearSystem experiment_system(const ExperimentConfig& config) {
  detail::validate_config(config);
  if (!config.generate.empty())
    return generate_system(parse_generator_spec(config.generate)).first;
  return load_system(config.matrix_path, config.rhs_path);
}

struct RunOutput {
  json summary;
  json diagnostics;
  bool has_diagnostics = false;
};

// One experiment: reps solves with strided seeds, trace CSV per rep, summary
// JSON, diagnostics JSON on the rep-0 trace when any toggle is on. Wall time
// goes to stderr only; file outputs stay byte-identical across reruns.
inline RunOutput run(const ExperimentConfig& config) {
  detail::validate_config(config);
  const LinearSystem sys = experiment_system(config);
  std::optional<SvdOracle> oracle;
  if (config.mode == Mode::row_action || config.diag.any()) oracle.emplace(sys.A);

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  std::vector<detail::RepStats> stats;
  SolveTrace trace0;
  const Vec x0(static_cast<std::size_t>(sys.d()), 0.0);
  for (long rep = 0; rep < config.reps; ++rep) {
    SolveConfig sc = config.solve;
    sc.seed = config.solve.seed +
              config.seed_stride * static_cast<std::uint64_t>(rep);
    if (rep == 0 && config.diag.needs_full_trace())
      sc.trace_level = TraceLevel::full_directions;
    auto strategy = parse_strategy(config.strategy, sys, config.mode);
    const auto t0 = std::chrono::steady_clock::now();
    SolveTrace trace = solve(sys, config.mode, *strategy, sc, x0,
                             oracle ? &*oracle : nullptr);
    const auto t1 = std::chrono::steady_clock::now();
    std::cerr << "rep " << rep << ": " << trace.iterations << " iterations, "
              << std::chrono::duration<double, std::milli>(t1 - t0).count()
              << " ms\n";
    write_trace_csv((fs::path(config.output_dir) /
                     ("trace_" + std::to_string(rep) + ".csv")).string(),
                    trace);
    detail::RepStats rs;
    rs.iterations = trace.iterations;
    rs.final_residual = trace.final_residual();
    rs.converged = trace.status == TerminalStatus::converged;
    rs.group_swaps = trace.group_swaps;
    rs.seed = sc.seed;
    stats.push_back(rs);
    if (rep == 0) trace0 = std::move(trace);
  }

  RunOutput out;
  json reps_json = json::array();
  long converged = 0;
  long swaps_total = 0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& r = stats[i];
    reps_json.push_back({{"rep", i},
                         {"seed", r.seed},
                         {"iterations", r.iterations},
                         {"final_residual", r.final_residual},
                         {"converged", r.converged},
                         {"group_swaps", r.group_swaps}});
    converged += r.converged ? 1 : 0;
    swaps_total += r.group_swaps;
  }
  out.summary["config"] = {{"source", detail::source_of(config)},
                           {"mode", mode_name(config.mode)},
                           {"strategy", config.strategy},
                           {"tol", config.solve.tol},
                           {"max_iterations", config.solve.max_iterations},
                           {"seed", config.solve.seed},
                           {"seed_stride", config.seed_stride},
                           {"reps", config.reps}};
  out.summary["system"] = {{"n", sys.n()},
                           {"d", sys.d()},
                           {"kind", sys.kind},
                           {"groups", sys.num_groups}};
  out.summary["aggregate"] = {{"mean_iterations", detail::mean_iterations(stats)},
                              {"median_iterations", detail::median_iterations(stats)},
                              {"converged", converged},
                              {"group_swaps_total", swaps_total}};
  out.summary["reps"] = std::move(reps_json);

  if (config.diag.any()) {
    out.has_diagnostics = true;
    json& dj = out.diagnostics;
    dj["source"] = detail::source_of(config);
    dj["strategy"] = config.strategy;
    dj["mode"] = mode_name(config.mode);
    std::optional<StoppingTimeReport> st;
    if (config.diag.stopping_times || config.diag.meany) {
      st = detect_stopping_times(sys, trace0, oracle ? &*oracle : nullptr);
    }
    if (config.diag.stopping_times) {
      json segs = json::array();
      double nu_sum = 0.0;
      long nu_count = 0;
      double max_gamma = 0.0;
      for (const auto& s : st->segments) {
        segs.push_back({{"tau", s.tau},
                        {"nu", s.nu},
                        {"gamma", s.gamma},
                        {"det_G", s.det_G},
                        {"ratio_observed", s.ratio_observed},
                        {"lemma42_ok", s.lemma_ok}});
        if (!s.zero_start) {
          nu_sum += static_cast<double>(s.nu);
          ++nu_count;
          max_gamma = std::max(max_gamma, s.gamma);
        }
      }
      dj["segments"] = std::move(segs);
      dj["taus"] = st->taus;
      dj["incomplete_tail"] = st->incomplete_tail;
      dj["norm_y0"] = st->norm_y0;
      out.summary["aggregate"]["segments"] = st->segments.size();
      out.summary["aggregate"]["mean_nu"] =
          nu_count > 0 ? nu_sum / static_cast<double>(nu_count) : 0.0;
      out.summary["aggregate"]["max_gamma"] = max_gamma;
    }
    if (config.diag.meany) {
      json rows = json::array();
      for (const auto& s : st->segments) {
        if (s.zero_start) continue;
        const MeanyReport mr = meany_check(s.phi, s.y_start);
        rows.push_back({{"tau", s.tau},
                        {"lhs", mr.lhs},
                        {"min_det", mr.min_det},
                        {"bound", mr.bound},
                        {"subsets", mr.subsets},
                        {"enumerated", mr.enumerated},
                        {"ok", mr.ok}});
      }
      dj["meany"] = std::move(rows);
    }
    if (config.diag.pi_estimate || config.diag.g_estimate) {
      json est;
      est["pi_hat"] = nullptr;
      est["g_hat"] = nullptr;
      est["trials"] = 0;
      est["violations"] = 0;
      auto strategy = parse_strategy(config.strategy, sys, config.mode);
      if (config.diag.pi_estimate) {
        const PiReport pr =
            estimate_pi(*strategy, sys, config.mode, config.pi_trials,
                        config.pi_configs, derive_seed(config.solve.seed, 0x7069ULL));
        est["pi_hat"] = pr.pi_hat;
        est["trials"] = pr.trials;
        est["violations"] = pr.violations.size();
        est["pi_configs"] = pr.configs;
        if (pr.declared_pi) est["declared_pi"] = *pr.declared_pi;
        json viol = json::array();
        for (const auto& v : pr.violations)
          viol.push_back({{"config", v.config},
                          {"dim", v.dim},
                          {"frequency", v.frequency},
                          {"allowed", v.allowed}});
        est["violation_details"] = std::move(viol);
      }
      if (config.diag.g_estimate) {
        const GReport gr =
            estimate_g(*strategy, sys, config.mode, config.g_trials,
                       config.g_inner, derive_seed(config.solve.seed, 0x67ULL));
        est["g_hat"] = gr.g_hat;
        est["g_trials"] = gr.trials;
        est["g_inner"] = gr.inner_trials;
        est["g_skipped"] = gr.skipped;
        if (!config.diag.pi_estimate) est["trials"] = gr.trials;
      }
      dj["estimators"] = std::move(est);
    }
    if (config.diag.nullspace) {
      dj["nullspace_drift"] = nullspace_drift(sys, trace0, *oracle);
    }
  }

  {
    std::ofstream sf(fs::path(config.output_dir) / "summary.json");
    if (!sf) throw IoError("cannot write summary.json in '" + config.output_dir + "'");
    sf << out.summary.dump(2) << "\n";
  }
  if (out.has_diagnostics) {
    std::ofstream df(fs::path(config.output_dir) / "diagnostics.json");
    if (!df)
      throw IoError("cannot write diagnostics.json in '" + config.output_dir + "'");
    df << out.diagnostics.dump(2) << "\n";
  }
  return out;
}

// Runs each config on the shared system and tabulates per-strategy means.
// Wall time is printed to stderr, never written to the table, so identical
// configs produce identical rows.
inline json compare(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw ConfigError("compare needs at least one config");
  const auto& head = configs.front();
  for (const auto& c : configs) {
    detail::validate_config(c);
    if (c.generate != head.generate || c.matrix_path != head.matrix_path ||
        c.rhs_path != head.rhs_path)
      throw ConfigError("compare: all configs must reference the same system");
    if (c.solve.tol != head.solve.tol)
      throw ConfigError("compare: all configs must share tol");
  }
  const LinearSystem sys = experiment_system(head);
  std::optional<SvdOracle> oracle;
  for (const auto& c : configs)
    if (c.mode == Mode::row_action && !oracle) oracle.emplace(sys.A);

  json rows = json::array();
  const Vec x0(static_cast<std::size_t>(sys.d()), 0.0);
  for (const auto& c : configs) {
    std::vector<detail::RepStats> stats;
    const auto t0 = std::chrono::steady_clock::now();
    for (long rep = 0; rep < c.reps; ++rep) {
      SolveConfig sc = c.solve;
      sc.seed = c.solve.seed + c.seed_stride * static_cast<std::uint64_t>(rep);
      sc.trace_level = TraceLevel::norms;
      auto strategy = parse_strategy(c.strategy, sys, c.mode);
      const SolveTrace trace =
          solve(sys, c.mode, *strategy, sc, x0,
                c.mode == Mode::row_action && oracle ? &*oracle : nullptr);
      detail::RepStats rs;
      rs.iterations = trace.iterations;
      rs.converged = trace.status == TerminalStatus::converged;
      rs.group_swaps = trace.group_swaps;
      stats.push_back(rs);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const std::string label = c.label.empty() ? c.strategy : c.label;
    std::cerr << label << ": "
              << std::chrono::duration<double, std::milli>(t1 - t0).count()
              << " ms total\n";
    long converged = 0;
    long swaps = 0;
    for (const auto& r : stats) {
      converged += r.converged ? 1 : 0;
      swaps += r.group_swaps;
    }
    rows.push_back({{"strategy", label},
                    {"spec", c.strategy},
                    {"mode", mode_name(c.mode)},
                    {"reps", c.reps},
                    {"mean_iterations", detail::mean_iterations(stats)},
                    {"median_iterations", detail::median_iterations(stats)},
                    {"converged", converged},
                    {"group_swaps_total", swaps}});
  }
  json report;
  report["source"] = detail::source_of(head);
  report["tol"] = head.solve.tol;
  report["system"] = {{"n", sys.n()}, {"d", sys.d()}, {"kind", sys.kind}};
  report["rows"] = std::move(rows);
  return report;
}

inline void write_comparison_csv(std::ostream& out, const json& report) {
  out << "strategy,mode,reps,mean_iterations,median_iterations,converged,"
         "group_swaps_total\n";
  for (const auto& row : report.at("rows")) {
    out << row.at("strategy").get<std::string>() << ","
        << row.at("mode").get<std::string>() << "," << row.at("reps").get<long>()
        << "," << format_double(row.at("mean_iterations").get<double>()) << ","
        << format_double(row.at("median_iterations").get<double>()) << ","
        << row.at("converged").get<long>() << ","
        << row.at("group_swaps_total").get<long>() << "\n";
  }
}

inline void write_comparison_csv(const std::string& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_comparison_csv(out, report);
}

}  // namespace arcas
