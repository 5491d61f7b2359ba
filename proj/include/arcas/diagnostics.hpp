#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/subspace.hpp"
#include "arcas/tolerances.hpp"

namespace arcas {

struct ChiFlag {
  int value = 0;
  double score = 0.0;  // |w^T M y| / (||M^T w|| ||y||), 0 when y = 0
};

inline ChiFlag chi(const UnifiedView& view, const Vec& w, double eps_chi = kEpsChi,
                   double abs_floor = 0.0) {
  const Vec u = apply_mt(*view.sys, view.mode, w);
  const double un = norm2(u);
  if (un == 0.0) throw DegenerateDirectionError("chi: M^T w = 0");
  const double ny = norm2(view.y);
  ChiFlag f;
  if (ny <= abs_floor) return f;
  // w^T M y = (M^T w)^T y
  const double num = std::fabs(dot(u, view.y));
  f.score = num / (un * ny);
  f.value = num > un * std::max(eps_chi * ny, abs_floor) ? 1 : 0;
  return f;
}

// one contraction segment [tau, tau + nu + 1]
struct Segment {
  long tau = 0;
  long s = -1;         // first offset with an active chi flag, -1 if none seen
  long nu = -1;        // -1 for the zero-start trivial segment
  double det_G = 1.0;  // canonical Gram determinant of the chi-filtered directions
  double gamma = 0.0;  // 1 - det_G (0 for trivial segments)
  double ratio_observed = 0.0;  // ||y_{tau'}||^2 / ||y_tau||^2
  bool lemma_ok = true;         // span equality + independence held
  bool zero_start = false;      // ||y_tau|| at the noise floor
  Vec y_start;                  // y_tau
  std::vector<Vec> phi;         // chi-active unit directions, selection order
};

struct StoppingTimeReport {
  std::vector<Segment> segments;
  std::vector<long> taus;  // tau_0 < tau_1 < ... (segment boundaries, incl. final)
  bool incomplete_tail = false;  // trace ended inside an unclosed segment
  long steps_walked = 0;
  double norm_y0 = 0.0;
};

namespace detail {

// y_k for every recorded iterate: x_k - x* (row) or A x_k - b (column)
inline std::vector<Vec> error_sequence(const LinearSystem& sys, const SolveTrace& trace,
                                       const SvdOracle* oracle) {
  if (trace.level != TraceLevel::full_directions)
    throw DiagnosticsError("stopping-time detection needs a full-directions trace");
  std::vector<Vec> ys;
  ys.reserve(trace.entries.size());
  if (trace.mode == Mode::row_action) {
    if (oracle == nullptr)
      throw DiagnosticsError("row-action error tracking needs the solution-set oracle");
    const Vec x_star =
        project_onto_solution_set(sys, trace.entries.front().x, *oracle);
    for (const auto& e : trace.entries) ys.push_back(sub(e.x, x_star));
  } else {
    for (const auto& e : trace.entries) {
      Vec y = sys.A.matvec(e.x);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= sys.b[i];
      ys.push_back(std::move(y));
    }
  }
  return ys;
}

// the projection direction M^T w_k of the step recorded at entry k
inline Vec step_direction(const LinearSystem& sys, const SolveTrace& trace, long k) {
  const auto& e = trace.entries[static_cast<std::size_t>(k)];
  if (e.selected >= 0) {
    return trace.mode == Mode::row_action ? sys.A.row_copy(e.selected)
                                          : sys.A.col_copy(e.selected);
  }
  if (e.w.empty())
    throw DiagnosticsError("trace entry " + std::to_string(k) +
                           " carries no direction");
  return apply_mt(sys, trace.mode, e.w);
}

}  // namespace detail

// Walks a full-directions trace, declaring nu at the first flagged step whose
// next error folds back into the span of the flagged directions seen so far.
// The error recursion then puts y_tau itself in that span, so the iterate span
// V and the direction span Phi coincide at every declared nu; both sides of
// that equality plus the independence of the distinct nonzero Phi members are
// asserted, and a failure throws.
//
// Closing on the direction span rather than on V directly matters: a repeated
// direction lies inside V from its first use (it is a difference of recorded
// errors), so a V-containment rule would close segments whose direction span
// is strictly smaller than V and the equality being asserted would fail. Any
// k declared here still satisfies the V-containment condition, since the
// flagged directions all lie inside V.
inline StoppingTimeReport detect_stopping_times(const LinearSystem& sys,
                                                const SolveTrace& trace,
                                                const SvdOracle* oracle = nullptr) {
  const auto ys = detail::error_sequence(sys, trace, oracle);
  const long T = trace.iterations;  // entries 0..T; steps 0..T-1

  StoppingTimeReport report;
  report.norm_y0 = norm2(ys.front());
  const double quiet = kQuietFloor * (1.0 + report.norm_y0);

  long j = 0;
  report.taus.push_back(0);
  while (j < T) {
    const double ny_j = norm2(ys[static_cast<std::size_t>(j)]);
    Segment seg;
    seg.tau = j;

    if (ny_j <= quiet) {
      // at this scale the error is accumulated roundoff; single step, gamma 0
      seg.zero_start = true;
      seg.gamma = 0.0;
      seg.det_G = 1.0;
      seg.ratio_observed = 0.0;
      report.segments.push_back(seg);
      j += 1;
      report.taus.push_back(j);
      continue;
    }

    const double floor_seg = kAbsNoiseFloor * (1.0 + ny_j);
    SubspaceBasis phi_span(kEpsSub, floor_seg);
    // basis of V: the segment start plus every accepted direction; each
    // recorded error is the start minus a combination of exactly these
    SubspaceBasis v_span(kEpsSub, floor_seg);
    v_span.extend(ys[static_cast<std::size_t>(j)]);
    std::vector<Vec> phi;     // flagged unit directions, repeats kept
    bool indep_ok = true;
    bool closed = false;
    Vec closing_dir;

    for (long k = 0; j + k < T; ++k) {
      const auto& entry = trace.entries[static_cast<std::size_t>(j + k)];
      if (!entry.chi) continue;  // recorded no-op: y and both spans unchanged
      if (seg.s < 0) seg.s = k;
      Vec d = detail::step_direction(sys, trace, j + k);
      const double dn = norm2(d);
      if (dn == 0.0)
        throw DiagnosticsError("degenerate direction in trace at step " +
                               std::to_string(j + k));
      scale(1.0 / dn, d);
      bool colinear = false;
      for (const auto& p : phi)
        if (std::fabs(dot(d, p)) >= 1.0 - kColinear) { colinear = true; break; }
      const bool contained = phi_span.extend(d);
      if (contained && !colinear) indep_ok = false;  // distinct but dependent
      phi.push_back(d);
      // the closure decision has to stay coherent with the start-in-span
      // assertion below: both are measured against the segment scale, so a
      // fold-back admitted here leaves at most a tenth of the slack behind
      const auto& y_next = ys[static_cast<std::size_t>(j + k + 1)];
      const double rem_next = norm2(phi_span.remainder(y_next));
      if (rem_next <=
          std::max(kEpsSub * norm2(y_next), 0.1 * kLemmaSlack * ny_j)) {
        seg.nu = k;
        closed = true;
        closing_dir = std::move(d);
        break;
      }
      v_span.extend(d);
    }

    if (!closed) {
      report.incomplete_tail = true;
      break;
    }

    // both containments are between unit vectors and healthy-scale bases, so
    // they get a dedicated slack instead of the decision threshold
    Vec y_hat = ys[static_cast<std::size_t>(j)];
    scale(1.0 / ny_j, y_hat);
    const bool start_in_phi = norm2(phi_span.remainder(y_hat)) <= kLemmaSlack;
    const bool close_in_v = norm2(v_span.remainder(closing_dir)) <= kLemmaSlack;
    seg.lemma_ok = start_in_phi && close_in_v && indep_ok;
    if (!seg.lemma_ok)
      throw DiagnosticsError(
          "span/independence check failed on the segment starting at " +
          std::to_string(j) + " (nu = " + std::to_string(seg.nu) + ")");

    seg.det_G = gram_determinant(phi);
    seg.gamma = 1.0 - seg.det_G;
    seg.y_start = ys[static_cast<std::size_t>(j)];
    seg.phi = std::move(phi);
    const long next = j + seg.nu + 1;
    const double ny_next = norm2(ys[static_cast<std::size_t>(next)]);
    seg.ratio_observed = (ny_next * ny_next) / (ny_j * ny_j);
    report.segments.push_back(seg);
    j = next;
    report.taus.push_back(j);
  }
  report.steps_walked = j;
  return report;
}

struct MeanyReport {
  double lhs = 0.0;      // ||chained projection of y||^2
  double min_det = 1.0;  // over all maximal independent subsets (or canonical)
  double bound = 0.0;    // (1 - min_det) ||y||^2
  long subsets = 0;
  bool enumerated = true;  // false when only the canonical subset was used
  bool ok = true;
};

// chained-projection contraction against the enumerated Gram bound; the
// directions are the chi-active ones of a segment, y the segment's start
inline MeanyReport meany_check(const std::vector<Vec>& directions, const Vec& y,
                               double slack = kEpsRate) {
  const auto dirs = detail::normalize_directions(directions);
  {
    SubspaceBasis span(kEpsSub);
    for (const auto& d : dirs) span.extend(d);
    // stopping-time segments guarantee membership only up to kLemmaSlack
    if (norm2(span.remainder(y)) > kLemmaSlack * norm2(y))
      throw DiagnosticsError("meany_check: y lies outside the direction span");
  }
  MeanyReport rep;
  Vec z = y;
  for (const auto& d : dirs) axpy(-dot(d, z), d, z);
  rep.lhs = norm2_sq(z);
  try {
    const auto e = enumerate_maximal_subsets(dirs);
    rep.min_det = e.min_det;
    rep.subsets = e.independent_subsets;
  } catch (const EnumerationBudgetError&) {
    rep.enumerated = false;
    rep.min_det = gram_determinant(dirs);
  }
  rep.bound = (1.0 - rep.min_det) * norm2_sq(y);
  rep.ok = rep.lhs <= rep.bound + slack;
  return rep;
}

// max over recorded iterates of the null-space component drift, relative
inline double nullspace_drift(const LinearSystem& sys, const SolveTrace& trace,
                              const SvdOracle& oracle) {
  if (trace.mode != Mode::row_action)
    throw DiagnosticsError("null-space drift applies to row-action traces");
  if (trace.level != TraceLevel::full_directions)
    throw DiagnosticsError("null-space drift needs a full-directions trace");
  if (static_cast<long>(trace.entries.front().x.size()) != sys.d())
    throw DimensionError("trace iterates do not match the system width");
  const Vec p0 = oracle.project_nullspace(trace.entries.front().x);
  const double scale = 1.0 + norm2(trace.entries.front().x);
  double worst = 0.0;
  for (const auto& e : trace.entries) {
    const Vec pk = oracle.project_nullspace(e.x);
    worst = std::max(worst, norm2(sub(pk, p0)) / scale);
  }
  return worst;
}

}  // namespace arcas
