#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/oracle.hpp"
#include "arcas/rng.hpp"
#include "arcas/subspace.hpp"
#include "arcas/system.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

namespace detail {

inline void check_mode(const Strategy& strategy, Mode mode) {
  const ModeCompat compat = strategy.mode_compat();
  if ((mode == Mode::row_action && compat == ModeCompat::column_only) ||
      (mode == Mode::column_action && compat == ModeCompat::row_only))
    throw ConfigError("strategy '" + strategy.kind() +
                      "' is not compatible with " + mode_name(mode) + " mode");
}

// window length; some strategies only know it after seeing the system
// (a cyclic sweep is as long as the order it builds at reset)
inline long window_length(const Strategy& strategy, const LinearSystem& sys,
                          Mode mode) {
  auto probe = strategy.clone();
  probe->reset(sys, mode, 0);
  return std::max<long>(probe->declared_N(), 1);
}

// orthonormal basis of row(M): row space of A in row-action mode, column
// space of A in column-action mode
inline std::vector<Vec> direction_space(const SvdOracle& oracle, Mode mode) {
  return mode == Mode::row_action ? oracle.rowspace_basis() : oracle.range_basis();
}

// a solution of the system; exact for generated systems, least-squares otherwise
inline Vec reference_solution(const LinearSystem& sys, const SvdOracle& oracle) {
  if (sys.x_true) return *sys.x_true;
  return oracle.lstsq(sys.b);
}

// iterate whose error vector equals y0: in row mode x = x_ref + y0 keeps
// x* = x_ref because y0 has no null-space component; in column mode the
// least-squares preimage of b + y0 reproduces y0 exactly since y0 is in
// the column space
inline Vec realize_iterate(const LinearSystem& sys, Mode mode,
                           const SvdOracle& oracle, const Vec& x_ref,
                           const Vec& y0) {
  if (mode == Mode::row_action) return add(x_ref, y0);
  Vec x = oracle.lstsq(sys.b);
  const Vec dx = oracle.lstsq(y0);
  axpy(1.0, dx, x);
  return x;
}

// one projection update, shared by both estimators; mirrors the solve loop
inline void estimator_step(const LinearSystem& sys, Mode mode, const Direction& dir,
                           const MtwInfo& mtw, Vec& x, Vec& r) {
  const double num = dir.is_index() && mode == Mode::row_action
                         ? r[static_cast<std::size_t>(dir.index)]
                         : (mode == Mode::row_action ? dot(dir.dense, r)
                                                     : dot(mtw.u, r));
  const double t = num / mtw.usq;
  if (mode == Mode::row_action) {
    axpy(t, mtw.u, x);
  } else if (dir.is_index()) {
    x[static_cast<std::size_t>(dir.index)] += t;
  } else {
    axpy(t, dir.dense, x);
  }
  r = residual(sys, x);
}

// random unit-ish combination of the given orthonormal columns
inline Vec span_sample(const std::vector<Vec>& basis, Rng& rng) {
  Vec v(basis.front().size(), 0.0);
  while (true) {
    for (const auto& q : basis) axpy(rng.normal(), q, v);
    if (norm2(v) > 1e-6) return v;
    std::fill(v.begin(), v.end(), 0.0);  // astronomically unlikely resample
  }
}

}  // namespace detail

struct PiViolation {
  long config = 0;
  long dim = 0;            // dimension of the sampled subspace
  double frequency = 0.0;  // empirical all-orthogonal window frequency
  double allowed = 0.0;    // 1 - declared_pi plus three binomial standard errors
};

struct PiReport {
  double pi_hat = 1.0;
  long trials = 0;
  long configs = 0;
  std::optional<double> declared_pi;
  std::vector<PiViolation> violations;
};

// Frequency of the event "every direction selected in one window is
// orthogonal to span(v_basis)" for a fixed start error y0 in that span.
// Exposed separately so known selection laws can be pinned against it.
inline double window_orthogonal_frequency(const Strategy& strategy,
                                          const LinearSystem& sys, Mode mode,
                                          const std::vector<Vec>& v_basis,
                                          const Vec& y0, long trials, long burn_in,
                                          std::uint64_t seed,
                                          const SvdOracle& oracle) {
  detail::check_mode(strategy, mode);
  if (trials < 1) throw ConfigError("window_orthogonal_frequency: trials must be >= 1");
  const long N = detail::window_length(strategy, sys, mode);
  const Vec x_ref = detail::reference_solution(sys, oracle);
  const Vec x_base = detail::realize_iterate(sys, mode, oracle, x_ref, y0);
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    auto s = strategy.clone();
    s->reset(sys, mode, derive_seed(seed, static_cast<std::uint64_t>(t) + 1));
    Vec x = x_base;
    Vec r = residual(sys, x);
    for (long b = 0; b < burn_in; ++b) (void)s->select(sys, mode, x, r);
    bool all_orthogonal = true;
    for (long j = 0; j < N; ++j) {
      const Direction dir = s->select(sys, mode, x, r);
      const detail::MtwInfo mtw = detail::mtw_of(sys, mode, dir);
      const double un = std::sqrt(mtw.usq);
      double cross = 0.0;
      for (const auto& q : v_basis) {
        const double c = dot(q, mtw.u) / un;
        cross += c * c;
      }
      if (std::sqrt(cross) > kEpsChi) all_orthogonal = false;
      detail::estimator_step(sys, mode, dir, mtw, x, r);
    }
    if (all_orthogonal) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

// Samples proper subspaces of row(M) with start errors inside them, measures
// the all-orthogonal window frequency for each, and reports 1 minus the worst
// frequency seen. A sampled frequency above 1 - declared_pi plus three
// binomial standard errors is recorded as a violation.
inline PiReport estimate_pi(const Strategy& strategy, const LinearSystem& sys,
                            Mode mode, long trials, long subspace_samples,
                            std::uint64_t seed = 0x70695eedULL) {
  detail::check_mode(strategy, mode);
  if (trials < 1 || subspace_samples < 1)
    throw ConfigError("estimate_pi: trials and subspace_samples must be >= 1");
  const SvdOracle oracle(sys.A);
  const long rank = oracle.rank();
  PiReport rep;
  rep.trials = trials;
  rep.configs = subspace_samples;
  // declared values that depend on the system (sample fraction, cycle
  // length) only settle after a reset, so read them off a probe
  auto probe = strategy.clone();
  probe->reset(sys, mode, 0);
  rep.declared_pi = probe->declared_pi();
  if (rank <= 1) return rep;  // no proper nonzero subspace exists
  const auto space = detail::direction_space(oracle, mode);
  const long N = std::max<long>(probe->declared_N(), 1);
  Rng rng(derive_seed(seed, 0x7069ULL));
  double worst = 0.0;
  for (long c = 0; c < subspace_samples; ++c) {
    const long dim = 1 + static_cast<long>(rng.uniform_below(
                             static_cast<std::uint64_t>(rank - 1)));
    SubspaceBasis v(kEpsSub);
    while (v.dimension() < dim) v.extend(detail::span_sample(space, rng));
    const Vec y0 = detail::span_sample(v.columns(), rng);
    const long burn = static_cast<long>(rng.uniform_below(
                          static_cast<std::uint64_t>(N)));
    const double freq = window_orthogonal_frequency(
        strategy, sys, mode, v.columns(), y0, trials, burn,
        derive_seed(seed, static_cast<std::uint64_t>(c) + 0x100), oracle);
    worst = std::max(worst, freq);
    if (rep.declared_pi) {
      const double p0 = std::clamp(1.0 - *rep.declared_pi, 0.0, 1.0);
      const double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(trials));
      const double allowed = p0 + 3.0 * se;
      if (freq > allowed)
        rep.violations.push_back({c, dim, freq, allowed});
    }
  }
  rep.pi_hat = 1.0 - worst;
  return rep;
}

struct GReport {
  double g_hat = 1.0;
  long trials = 0;
  long inner_trials = 0;
  long skipped = 0;  // inner runs whose segment never closed within budget
};

// Monte-Carlo lower envelope for the expected canonical Gram determinant of
// the first stopping segment, conditioned on the start error and strategy
// state: inner trials average over future selection randomness, the outer
// loop minimizes over sampled (y0, state) pairs.
inline GReport estimate_g(const Strategy& strategy, const LinearSystem& sys,
                          Mode mode, long trials, long inner_trials = 8,
                          std::uint64_t seed = 0x675eedULL) {
  detail::check_mode(strategy, mode);
  if (trials < 1 || inner_trials < 1)
    throw ConfigError("estimate_g: trials and inner_trials must be >= 1");
  const SvdOracle oracle(sys.A);
  const auto space = detail::direction_space(oracle, mode);
  const Vec x_ref = detail::reference_solution(sys, oracle);
  const long N = detail::window_length(strategy, sys, mode);
  const long cap = 1000 * N + 100 * oracle.rank();
  Rng rng(derive_seed(seed, 0x67ULL));
  GReport rep;
  rep.trials = trials;
  rep.inner_trials = inner_trials;
  double gmin = std::numeric_limits<double>::infinity();
  for (long c = 0; c < trials; ++c) {
    const Vec y0 = detail::span_sample(space, rng);
    const long burn = static_cast<long>(rng.uniform_below(
                          static_cast<std::uint64_t>(N)));
    double sum = 0.0;
    long closed = 0;
    for (long t = 0; t < inner_trials; ++t) {
      auto s = strategy.clone();
      s->reset(sys, mode, derive_seed(seed, (static_cast<std::uint64_t>(c) << 20) |
                                               static_cast<std::uint64_t>(t + 1)));
      Vec x = detail::realize_iterate(sys, mode, oracle, x_ref, y0);
      Vec r = residual(sys, x);
      for (long b = 0; b < burn; ++b) (void)s->select(sys, mode, x, r);
      // the tracked window starts after N - 1 warm-up steps
      for (long j = 0; j + 1 < N; ++j) {
        const Direction dir = s->select(sys, mode, x, r);
        const detail::MtwInfo mtw = detail::mtw_of(sys, mode, dir);
        detail::estimator_step(sys, mode, dir, mtw, x, r);
      }
      Vec y = mode == Mode::row_action ? sub(x, x_ref) : r;
      if (mode == Mode::column_action) scale(-1.0, y);
      const double ny0 = norm2(y);
      if (ny0 <= kAbsNoiseFloor * (1.0 + norm2(y0))) { ++rep.skipped; continue; }
      const double floor_seg = kAbsNoiseFloor * (1.0 + ny0);
      SubspaceBasis phi_span(kEpsSub, floor_seg);
      std::vector<Vec> phi;
      bool done = false;
      for (long k = 0; k < cap && !done; ++k) {
        const Direction dir = s->select(sys, mode, x, r);
        const detail::MtwInfo mtw = detail::mtw_of(sys, mode, dir);
        const double un = std::sqrt(mtw.usq);
        const double ny = norm2(y);
        const double num = dot(mtw.u, y);
        const bool chi = std::fabs(num) > un * std::max(kEpsChi * ny, floor_seg);
        detail::estimator_step(sys, mode, dir, mtw, x, r);
        if (mode == Mode::row_action) {
          y = sub(x, x_ref);
        } else {
          y = r;
          scale(-1.0, y);
        }
        if (!chi) continue;
        Vec u = mtw.u;
        scale(1.0 / un, u);
        phi_span.extend(u);
        phi.push_back(std::move(u));
        if (phi_span.contains(y)) {
          sum += gram_determinant(phi);
          ++closed;
          done = true;
        }
      }
      if (!done) ++rep.skipped;
    }
    if (closed > 0) gmin = std::min(gmin, sum / static_cast<double>(closed));
  }
  if (std::isfinite(gmin)) rep.g_hat = gmin;
  return rep;
}

}  // namespace arcas
