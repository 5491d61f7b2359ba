#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arcas/errors.hpp"
#include "arcas/oracle.hpp"
#include "arcas/system.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

enum class Mode { row_action, column_action };

inline std::string mode_name(Mode m) {
  return m == Mode::row_action ? "row" : "column";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "row" || s == "row-action") return Mode::row_action;
  if (s == "column" || s == "column-action" || s == "col") return Mode::column_action;
  throw ConfigError("unknown mode '" + s + "' (want row or column)");
}

enum class ModeCompat { row_only, column_only, both };

// the direction a strategy hands the engine: an index into rows (row-action)
// or columns (column-action), or a dense combination vector
struct Direction {
  long index = -1;
  Vec dense;           // used when index < 0; length n (row) or d (column)
  int group = -1;      // grouped strategies tag their current group

  bool is_index() const { return index >= 0; }
};

// strategy-specific auxiliary record; memoryless strategies leave it empty
struct StrategyState {
  std::vector<long> pending;          // unconsumed permutation (cyclic)
  int group = -1;                     // current group (grouped)
  double group_entry_residual = -1.0;
  long group_visits = 0;
};

class Strategy {
public:
  virtual ~Strategy() = default;
  virtual std::string kind() const = 0;
  // history window the selection law is entitled to read
  virtual long declared_N() const = 0;
  // escape probability per window when known; nullopt when the paper-level
  // value is not derivable for this configuration
  virtual std::optional<double> declared_pi() const = 0;
  virtual ModeCompat mode_compat() const = 0;
  // fresh auxiliary state and rng stream; called by solve before iterating
  virtual void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) = 0;
  // r is b - A x, recomputed by the engine before every call
  virtual Direction select(const LinearSystem& sys, Mode mode, const Vec& x,
                           const Vec& r) = 0;
  virtual std::unique_ptr<Strategy> clone() const = 0;
  virtual StrategyState state() const { return {}; }
};

enum class TraceLevel { none, norms, full_directions };

inline std::string trace_level_name(TraceLevel t) {
  switch (t) {
    case TraceLevel::none: return "none";
    case TraceLevel::norms: return "norms";
    default: return "full-directions";
  }
}

inline TraceLevel parse_trace_level(const std::string& s) {
  if (s == "none") return TraceLevel::none;
  if (s == "norms") return TraceLevel::norms;
  if (s == "full-directions" || s == "full") return TraceLevel::full_directions;
  throw ConfigError("unknown trace level '" + s + "'");
}

struct SolveConfig {
  long max_iterations = 100000;
  double tol = 1e-8;              // stop when ||r|| <= tol * (1 + ||b||)
  std::uint64_t seed = 0;
  TraceLevel trace_level = TraceLevel::norms;
};

enum class TerminalStatus { converged, budget_exhausted };

struct TraceEntry {
  double norm_y = 0.0;        // ||x_k - x*|| (row, oracle) or ||A x_k - b|| (column)
  double norm_residual = 0.0; // ||b - A x_k||
  int chi = 0;                // flag for the direction taken at this k; 0 on the final entry
  long selected = -1;         // index taken, -1 for dense directions and the final entry
  std::string step_kind;      // "row", "column", "stream"; "none" on the final entry
  int group = -1;
  Vec x;                      // snapshots, full-directions level only
  Vec w;                      // dense direction if the strategy returned one
};

struct SolveTrace {
  Mode mode = Mode::row_action;
  TraceLevel level = TraceLevel::norms;
  TerminalStatus status = TerminalStatus::budget_exhausted;
  long iterations = 0;        // steps consumed; entries.size() == iterations + 1
  bool norm_y_is_proxy = false;
  double norm_b = 0.0;
  double tol_threshold = 0.0;
  long group_swaps = 0;
  std::vector<TraceEntry> entries;

  double final_residual() const {
    return entries.empty() ? 0.0 : entries.back().norm_residual;
  }
};

// --- the three update rules ---

// x + A^T w (w^T(b - Ax)) / ||A^T w||^2
inline Vec row_action_step(const LinearSystem& sys, const Vec& x, const Vec& w) {
  if (static_cast<long>(w.size()) != sys.n())
    throw DimensionError("row_action_step: w length must equal row count");
  const Vec u = sys.A.matvec_t(w);
  const double usq = norm2_sq(u);
  if (usq == 0.0) throw DegenerateDirectionError("row_action_step: A^T w = 0");
  const double num = dot(w, residual(sys, x));
  Vec out = x;
  axpy(num / usq, u, out);
  return out;
}

// x + w (w^T A^T (b - Ax)) / ||A w||^2
inline Vec column_action_step(const LinearSystem& sys, const Vec& x, const Vec& w) {
  if (static_cast<long>(w.size()) != sys.d())
    throw DimensionError("column_action_step: w length must equal column count");
  const Vec u = sys.A.matvec(w);
  const double usq = norm2_sq(u);
  if (usq == 0.0) throw DegenerateDirectionError("column_action_step: A w = 0");
  const double num = dot(u, residual(sys, x));
  Vec out = x;
  axpy(num / usq, w, out);
  return out;
}

// y_k under one name: M = A, y = x - x* (row) or M = A^T, y = Ax - b (column)
struct UnifiedView {
  const LinearSystem* sys = nullptr;
  Mode mode = Mode::row_action;
  Vec y;
};

inline UnifiedView make_row_view(const LinearSystem& sys, const Vec& x,
                                 const Vec& x_star) {
  return {&sys, Mode::row_action, sub(x, x_star)};
}

inline UnifiedView make_column_view(const LinearSystem& sys, const Vec& x) {
  Vec y = sys.A.matvec(x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= sys.b[i];
  return {&sys, Mode::column_action, std::move(y)};
}

// M^T w: A^T w in row mode, A w in column mode
inline Vec apply_mt(const LinearSystem& sys, Mode mode, const Vec& w) {
  return mode == Mode::row_action ? sys.A.matvec_t(w) : sys.A.matvec(w);
}

// M y: A y in row mode, A^T y in column mode
inline Vec apply_m(const LinearSystem& sys, Mode mode, const Vec& y) {
  return mode == Mode::row_action ? sys.A.matvec(y) : sys.A.matvec_t(y);
}

// y - M^T w (w^T M y) / ||M^T w||^2
inline Vec unified_step(const UnifiedView& view, const Vec& w) {
  const Vec u = apply_mt(*view.sys, view.mode, w);
  const double usq = norm2_sq(u);
  if (usq == 0.0) throw DegenerateDirectionError("unified_step: M^T w = 0");
  Vec out = view.y;
  axpy(-dot(u, view.y) / usq, u, out);
  return out;
}

namespace detail {

// the projection direction M^T w and its squared norm, using precomputed
// norms for index directions and fresh computation for dense ones
struct MtwInfo {
  Vec u;
  double usq = 0.0;
};

inline MtwInfo mtw_of(const LinearSystem& sys, Mode mode, const Direction& dir) {
  MtwInfo info;
  if (dir.is_index()) {
    if (mode == Mode::row_action) {
      if (dir.index >= sys.n()) throw ContractViolationError("row index out of range");
      info.u = sys.A.row_copy(dir.index);
      info.usq = sys.A.row_norm_sq(dir.index);
    } else {
      if (dir.index >= sys.d()) throw ContractViolationError("column index out of range");
      info.u = sys.A.col_copy(dir.index);
      info.usq = sys.A.col_norm_sq(dir.index);
    }
  } else {
    const long want = mode == Mode::row_action ? sys.n() : sys.d();
    if (static_cast<long>(dir.dense.size()) != want)
      throw ContractViolationError("dense direction has wrong length");
    info.u = apply_mt(sys, mode, dir.dense);
    info.usq = norm2_sq(info.u);
  }
  return info;
}

}  // namespace detail

// Outer loop. The oracle, when given, provides x* for row-action ||y_k||
// tracking; without it row traces carry the residual norm as a proxy.
inline SolveTrace solve(const LinearSystem& sys, Mode mode, Strategy& strategy,
                        const SolveConfig& config, const Vec& x0,
                        const SvdOracle* oracle = nullptr) {
  if (static_cast<long>(x0.size()) != sys.d())
    throw DimensionError("solve: x0 length must equal column count");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  const ModeCompat compat = strategy.mode_compat();
  if ((mode == Mode::row_action && compat == ModeCompat::column_only) ||
      (mode == Mode::column_action && compat == ModeCompat::row_only))
    throw ConfigError("strategy '" + strategy.kind() +
                      "' is not compatible with " + mode_name(mode) + " mode");

  strategy.reset(sys, mode, derive_seed(config.seed, 0x737472ULL));

  SolveTrace trace;
  trace.mode = mode;
  trace.level = config.trace_level;
  trace.norm_b = norm2(sys.b);
  trace.tol_threshold = config.tol * (1.0 + trace.norm_b);
  trace.norm_y_is_proxy = (mode == Mode::row_action && oracle == nullptr);

  std::optional<Vec> x_star;
  if (mode == Mode::row_action && oracle != nullptr)
    x_star = project_onto_solution_set(sys, x0, *oracle);

  Vec x = x0;
  Vec r = residual(sys, x);
  const std::string step_kind = mode == Mode::row_action ? "row" : "column";

  auto norm_y_of = [&](const Vec& xk, double norm_r) {
    if (mode == Mode::column_action) return norm_r;  // ||Ax - b|| = ||r||
    if (x_star) return norm2(sub(xk, *x_star));
    return norm_r;  // proxy
  };

  const double norm_y0 = norm_y_of(x, norm2(r));
  const double chi_floor = kAbsNoiseFloor * (1.0 + norm_y0);

  int prev_group = -1;
  for (long k = 0;; ++k) {
    TraceEntry e;
    e.norm_residual = norm2(r);
    e.norm_y = norm_y_of(x, e.norm_residual);
    if (config.trace_level == TraceLevel::full_directions) e.x = x;

    // at trace level none, only this terminal entry is kept
    if (e.norm_residual <= trace.tol_threshold) {
      e.step_kind = "none";
      trace.entries.push_back(std::move(e));
      trace.status = TerminalStatus::converged;
      trace.iterations = k;
      break;
    }
    if (k >= config.max_iterations) {
      e.step_kind = "none";
      trace.entries.push_back(std::move(e));
      trace.status = TerminalStatus::budget_exhausted;
      trace.iterations = k;
      break;
    }

    Direction dir = strategy.select(sys, mode, x, r);
    detail::MtwInfo mtw;
    try {
      mtw = detail::mtw_of(sys, mode, dir);
    } catch (const ContractViolationError& err) {
      throw ContractViolationError("strategy '" + strategy.kind() +
                                   "' at iteration " + std::to_string(k) + ": " +
                                   err.what());
    }
    if (mtw.usq <= 0.0)
      throw ContractViolationError("strategy '" + strategy.kind() +
                                   "' returned a degenerate direction at iteration " +
                                   std::to_string(k));

    // w^T M y = -w^T r (row) and -(Aw)^T r (column); both are the step numerator
    const double num = dir.is_index() && mode == Mode::row_action
                           ? r[static_cast<std::size_t>(dir.index)]
                           : (mode == Mode::row_action ? dot(dir.dense, r)
                                                       : dot(mtw.u, r));
    const double unorm = std::sqrt(mtw.usq);
    e.chi = std::fabs(num) > unorm * std::max(kEpsChi * e.norm_y, chi_floor) ? 1 : 0;
    e.selected = dir.index;
    e.step_kind = step_kind;
    e.group = dir.group;
    if (config.trace_level == TraceLevel::full_directions && !dir.is_index())
      e.w = dir.dense;
    if (config.trace_level != TraceLevel::none) trace.entries.push_back(std::move(e));

    if (dir.group >= 0) {
      if (prev_group >= 0 && dir.group != prev_group) ++trace.group_swaps;
      prev_group = dir.group;
    }

    const double t = num / mtw.usq;
    if (mode == Mode::row_action) {
      axpy(t, mtw.u, x);  // u = A^T w
    } else if (dir.is_index()) {
      x[static_cast<std::size_t>(dir.index)] += t;
    } else {
      axpy(t, dir.dense, x);
    }
    r = residual(sys, x);
  }
  return trace;
}

}  // namespace arcas
