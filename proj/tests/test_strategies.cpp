#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/strategies.hpp"
#include "arcas/system.hpp"
#include "test_helpers.hpp"

using arcas::ConfigError;
using arcas::Direction;
using arcas::LinearSystem;
using arcas::Matrix;
using arcas::Mode;
using arcas::SolveConfig;
using arcas::SpecError;
using arcas::Vec;

namespace {

LinearSystem two_rows_one_zero() {
  LinearSystem sys;
  sys.A = Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  sys.b = {1.0, 0.0};
  return sys;
}

// drive a strategy by hand so each selection can be checked against the
// residual it saw
template <typename Check>
void drive(const LinearSystem& sys, Mode mode, arcas::Strategy& s, long steps,
           Check check) {
  s.reset(sys, mode, 42);
  Vec x(static_cast<std::size_t>(sys.d()), 0.0);
  Vec r = arcas::residual(sys, x);
  for (long k = 0; k < steps; ++k) {
    Direction d = s.select(sys, mode, x, r);
    check(d, r);
    const auto mtw = arcas::detail::mtw_of(sys, mode, d);
    const double num = d.is_index() && mode == Mode::row_action
                           ? r[static_cast<std::size_t>(d.index)]
                           : (mode == Mode::row_action ? arcas::dot(d.dense, r)
                                                       : arcas::dot(mtw.u, r));
    const double t = num / mtw.usq;
    if (mode == Mode::row_action) {
      arcas::axpy(t, mtw.u, x);
    } else if (d.is_index()) {
      x[static_cast<std::size_t>(d.index)] += t;
    } else {
      arcas::axpy(t, d.dense, x);
    }
    r = arcas::residual(sys, x);
  }
}

}  // namespace

TEST_CASE("same seed gives identical traces, different seeds differ") {
  const auto sys = helpers::random_consistent(12, 5, 31);
  SolveConfig cfg;
  cfg.max_iterations = 60;
  cfg.tol = 1e-12;
  cfg.seed = 9;
  const Vec x0(5, 0.0);
  for (const std::string spec : {"iid", "sketch", "cyclic:reshuffle=sweep",
                                 "topm:m=4", "skm:sample=3"}) {
    auto a = arcas::parse_strategy(spec, sys, Mode::row_action);
    auto b = arcas::parse_strategy(spec, sys, Mode::row_action);
    const auto ta = arcas::solve(sys, Mode::row_action, *a, cfg, x0);
    const auto tb = arcas::solve(sys, Mode::row_action, *b, cfg, x0);
    REQUIRE(ta.entries.size() == tb.entries.size());
    for (std::size_t i = 0; i < ta.entries.size(); ++i) {
      CHECK(ta.entries[i].selected == tb.entries[i].selected);
      CHECK(ta.entries[i].norm_residual == tb.entries[i].norm_residual);
    }
  }
  auto a = arcas::make_iid();
  auto b = arcas::make_iid();
  SolveConfig other = cfg;
  other.seed = 10;
  const auto ta = arcas::solve(sys, Mode::row_action, *a, cfg, x0);
  const auto tb = arcas::solve(sys, Mode::row_action, *b, other, x0);
  bool any_diff = ta.entries.size() != tb.entries.size();
  for (std::size_t i = 0; !any_diff && i + 1 < std::min(ta.entries.size(), tb.entries.size()); ++i)
    any_diff = ta.entries[i].selected != tb.entries[i].selected;
  CHECK(any_diff);
}

TEST_CASE("clone reproduces the stream mid-run") {
  const auto sys = helpers::random_consistent(8, 4, 77);
  auto s = arcas::make_greedy_subset_random(3);
  s->reset(sys, Mode::row_action, 5);
  Vec x(4, 0.0);
  Vec r = arcas::residual(sys, x);
  for (int k = 0; k < 5; ++k) (void)s->select(sys, Mode::row_action, x, r);
  auto c = s->clone();
  for (int k = 0; k < 10; ++k) {
    const auto d1 = s->select(sys, Mode::row_action, x, r);
    const auto d2 = c->select(sys, Mode::row_action, x, r);
    CHECK(d1.index == d2.index);
  }
}

TEST_CASE("iid covers every row and honors custom weights") {
  const auto sys = helpers::random_consistent(5, 3, 3);
  Vec x(3, 0.0);
  const Vec r = arcas::residual(sys, x);

  auto uni = arcas::make_iid();
  uni->reset(sys, Mode::row_action, 1);
  std::set<long> seen;
  for (int k = 0; k < 400; ++k)
    seen.insert(uni->select(sys, Mode::row_action, x, r).index);
  CHECK(seen == std::set<long>{0, 1, 2, 3, 4});
  CHECK(uni->declared_N() == 1);
  CHECK_FALSE(uni->declared_pi().has_value());

  auto one = arcas::make_iid(Vec{0.0, 0.0, 1.0, 0.0, 0.0});
  one->reset(sys, Mode::row_action, 1);
  for (int k = 0; k < 50; ++k)
    CHECK(one->select(sys, Mode::row_action, x, r).index == 2);
}

TEST_CASE("iid custom weight validation") {
  const auto sys = helpers::random_consistent(4, 3, 8);
  Vec x(3, 0.0);
  CHECK_THROWS_AS(arcas::make_iid(Vec{1.0, 1.0})->reset(sys, Mode::row_action, 0),
                  SpecError);
  CHECK_THROWS_AS(
      arcas::make_iid(Vec{1.0, -0.5, 1.0, 1.0})->reset(sys, Mode::row_action, 0),
      SpecError);
  CHECK_THROWS_AS(
      arcas::make_iid(Vec{0.0, 0.0, 0.0, 0.0})->reset(sys, Mode::row_action, 0),
      SpecError);
  const auto zr = two_rows_one_zero();
  CHECK_THROWS_AS(arcas::make_iid(Vec{1.0, 1.0})->reset(zr, Mode::row_action, 0),
                  SpecError);
  // zero row excluded by a zero weight is fine
  CHECK_NOTHROW(arcas::make_iid(Vec{1.0, 0.0})->reset(zr, Mode::row_action, 0));
}

TEST_CASE("iid rownorm2 prefers heavy rows") {
  LinearSystem sys;
  sys.A = Matrix::from_rows({{0.1, 0.0}, {0.0, 10.0}});
  sys.b = {0.1, 10.0};
  auto s = arcas::make_iid_rownorm2();
  s->reset(sys, Mode::row_action, 123);
  Vec x(2, 0.0);
  const Vec r = arcas::residual(sys, x);
  int light = 0;
  for (int k = 0; k < 1000; ++k)
    if (s->select(sys, Mode::row_action, x, r).index == 0) ++light;
  // P(row 0) = 0.01/100.01, so even 20 hits would be wildly off
  CHECK(light < 20);
}

TEST_CASE("sketch returns dense directions of the mode's length") {
  const auto sys = helpers::random_consistent(6, 4, 11);
  Vec x(4, 0.0);
  const Vec r = arcas::residual(sys, x);
  auto s = arcas::make_sketch();
  s->reset(sys, Mode::row_action, 1);
  auto d = s->select(sys, Mode::row_action, x, r);
  CHECK_FALSE(d.is_index());
  CHECK(d.dense.size() == 6);
  s->reset(sys, Mode::column_action, 1);
  d = s->select(sys, Mode::column_action, x, r);
  CHECK(d.dense.size() == 4);
}

TEST_CASE("cyclic default order sweeps rows in order") {
  const auto sys = helpers::random_consistent(4, 4, 2);
  auto s = arcas::make_cyclic();
  s->reset(sys, Mode::row_action, 0);
  Vec x(4, 0.0);
  const Vec r = arcas::residual(sys, x);
  for (int k = 0; k < 9; ++k)
    CHECK(s->select(sys, Mode::row_action, x, r).index == k % 4);
  CHECK(s->declared_N() == 4);
  REQUIRE(s->declared_pi().has_value());
  CHECK(*s->declared_pi() == 1.0);
}

TEST_CASE("cyclic explicit order and state window") {
  LinearSystem sys;
  sys.A = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  sys.b = {1.0, 1.0};
  auto s = arcas::parse_strategy("cyclic:order=1+0", sys, Mode::row_action);
  s->reset(sys, Mode::row_action, 0);
  Vec x(2, 0.0);
  const Vec r = arcas::residual(sys, x);
  CHECK(s->select(sys, Mode::row_action, x, r).index == 1);
  CHECK(s->select(sys, Mode::row_action, x, r).index == 0);
  CHECK(s->state().pending.size() == 0);
  CHECK(s->select(sys, Mode::row_action, x, r).index == 1);
  CHECK(s->state().pending.size() == 1);

  auto st = arcas::parse_strategy("cyclic:encaps=1", sys, Mode::row_action);
  st->reset(sys, Mode::row_action, 0);
  CHECK(st->declared_N() == 1);
  CHECK_FALSE(st->declared_pi().has_value());
}

TEST_CASE("cyclic reshuffle visits every row each sweep") {
  const auto sys = helpers::random_consistent(6, 3, 17);
  auto s = arcas::parse_strategy("cyclic:reshuffle=sweep", sys, Mode::row_action);
  s->reset(sys, Mode::row_action, 99);
  Vec x(3, 0.0);
  const Vec r = arcas::residual(sys, x);
  std::vector<long> first_sweep, second_sweep;
  for (int k = 0; k < 6; ++k)
    first_sweep.push_back(s->select(sys, Mode::row_action, x, r).index);
  for (int k = 0; k < 6; ++k)
    second_sweep.push_back(s->select(sys, Mode::row_action, x, r).index);
  auto sorted = [](std::vector<long> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(first_sweep) == std::vector<long>{0, 1, 2, 3, 4, 5});
  CHECK(sorted(second_sweep) == std::vector<long>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("cyclic order validation happens at reset") {
  const auto zr = two_rows_one_zero();
  auto oor = arcas::parse_strategy("cyclic:order=5+0", zr, Mode::row_action);
  CHECK_THROWS_AS(oor->reset(zr, Mode::row_action, 0), SpecError);
  auto zero = arcas::parse_strategy("cyclic:order=1+0", zr, Mode::row_action);
  CHECK_THROWS_MATCHES(zero->reset(zr, Mode::row_action, 0), SpecError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("zero row")));
}

TEST_CASE("greedy rules pick the argmax of their score") {
  const auto sys = helpers::random_consistent(9, 5, 23);

  auto maxres = arcas::make_greedy(arcas::GreedyRule::max_abs_residual);
  drive(sys, Mode::row_action, *maxres, 12, [&](const Direction& d, const Vec& r) {
    long want = 0;
    for (long i = 0; i < sys.n(); ++i)
      if (std::fabs(r[static_cast<std::size_t>(i)]) >
          std::fabs(r[static_cast<std::size_t>(want)]))
        want = i;
    CHECK(d.index == want);
  });

  auto maxdist = arcas::make_greedy(arcas::GreedyRule::max_distance);
  drive(sys, Mode::row_action, *maxdist, 12, [&](const Direction& d, const Vec& r) {
    long want = -1;
    double best = -1.0;
    for (long i = 0; i < sys.n(); ++i) {
      const double s = std::fabs(r[static_cast<std::size_t>(i)]) /
                       std::sqrt(sys.A.row_norm_sq(i));
      if (s > best) {
        best = s;
        want = i;
      }
    }
    CHECK(d.index == want);
  });

  auto maxcol = arcas::make_greedy(arcas::GreedyRule::max_col_residual_distance);
  drive(sys, Mode::column_action, *maxcol, 12, [&](const Direction& d, const Vec& r) {
    const Vec atr = sys.A.matvec_t(r);
    long want = -1;
    double best = -1.0;
    for (long j = 0; j < sys.d(); ++j) {
      const double s = std::fabs(atr[static_cast<std::size_t>(j)]) /
                       std::sqrt(sys.A.col_norm_sq(j));
      if (s > best) {
        best = s;
        want = j;
      }
    }
    CHECK(d.index == want);
  });

  CHECK(maxres->mode_compat() == arcas::ModeCompat::row_only);
  CHECK(maxcol->mode_compat() == arcas::ModeCompat::column_only);
  REQUIRE(maxres->declared_pi().has_value());
  CHECK(*maxres->declared_pi() == 1.0);
}

TEST_CASE("greedy over an explicit basis") {
  const auto sys = helpers::random_consistent(4, 3, 51);
  std::vector<Vec> basis = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  auto s = arcas::make_greedy(arcas::GreedyRule::max_abs_residual, basis);
  drive(sys, Mode::row_action, *s, 8, [&](const Direction& d, const Vec& r) {
    REQUIRE_FALSE(d.is_index());
    long want = 0;
    for (long i = 0; i < sys.n(); ++i)
      if (std::fabs(r[static_cast<std::size_t>(i)]) >
          std::fabs(r[static_cast<std::size_t>(want)]))
        want = i;
    CHECK(d.dense[static_cast<std::size_t>(want)] == 1.0);
  });

  std::vector<Vec> short_basis = {{1, 0, 0, 0}, {0, 1, 0, 0}};
  auto bad = arcas::make_greedy(arcas::GreedyRule::max_abs_residual, short_basis);
  CHECK_THROWS_AS(bad->reset(sys, Mode::row_action, 0), SpecError);
  auto dist = arcas::make_greedy(arcas::GreedyRule::max_distance, basis);
  CHECK_THROWS_AS(dist->reset(sys, Mode::row_action, 0), SpecError);
}

TEST_CASE("topm selects inside the top-m score set") {
  const auto sys = helpers::random_consistent(10, 4, 13);
  const long m = 3;
  auto s = arcas::make_greedy_subset_random(m);
  drive(sys, Mode::row_action, *s, 20, [&](const Direction& d, const Vec& r) {
    std::vector<long> order(static_cast<std::size_t>(sys.n()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
      return std::fabs(r[static_cast<std::size_t>(a)]) >
             std::fabs(r[static_cast<std::size_t>(b)]);
    });
    order.resize(static_cast<std::size_t>(m));
    CHECK(std::find(order.begin(), order.end(), d.index) != order.end());
  });
  REQUIRE(s->declared_pi().has_value());
  CHECK(*s->declared_pi() == Catch::Approx(1.0 / 3.0));

  auto weighted = arcas::make_greedy_subset_random(m, arcas::WithinSubset::residual_weighted);
  REQUIRE(weighted->declared_pi().has_value());
  CHECK(*weighted->declared_pi() == 1.0);
}

TEST_CASE("topm size validation") {
  CHECK_THROWS_AS(arcas::make_greedy_subset_random(0), SpecError);
  const auto sys = helpers::random_consistent(3, 2, 4);
  auto big = arcas::make_greedy_subset_random(7);
  CHECK_THROWS_AS(big->reset(sys, Mode::row_action, 0), SpecError);
  // the parse-level rejection must name the parameter
  try {
    (void)arcas::parse_strategy("topm:m=0", sys, Mode::row_action);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'m'") != std::string::npos);
  }
}

TEST_CASE("skm with full sample is plain greedy, ties to smaller index") {
  const auto sys = helpers::random_consistent(7, 3, 29);
  auto s = arcas::make_random_subset_greedy(7);
  drive(sys, Mode::row_action, *s, 15, [&](const Direction& d, const Vec& r) {
    long want = 0;
    for (long i = 1; i < sys.n(); ++i)
      if (std::fabs(r[static_cast<std::size_t>(i)]) >
          std::fabs(r[static_cast<std::size_t>(want)]))
        want = i;
    CHECK(d.index == want);
  });
  REQUIRE(s->declared_pi().has_value());
  CHECK(*s->declared_pi() == 1.0);

  LinearSystem ties;
  ties.A = Matrix::from_rows({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  ties.b = {2.0, 2.0, 0.0};
  auto t = arcas::make_random_subset_greedy(3);
  t->reset(ties, Mode::row_action, 0);
  Vec x(2, 0.0);
  const Vec r = arcas::residual(ties, x);
  CHECK(t->select(ties, Mode::row_action, x, r).index == 0);
}

TEST_CASE("skm declared pi and sample validation") {
  const auto sys = helpers::random_consistent(8, 3, 6);
  auto s = arcas::make_random_subset_greedy(2);
  s->reset(sys, Mode::row_action, 0);
  REQUIRE(s->declared_pi().has_value());
  CHECK(*s->declared_pi() == Catch::Approx(0.25));
  auto w = arcas::make_random_subset_greedy(2, arcas::SubsetSampling::weighted);
  w->reset(sys, Mode::row_action, 0);
  CHECK_FALSE(w->declared_pi().has_value());
  auto big = arcas::make_random_subset_greedy(9);
  CHECK_THROWS_AS(big->reset(sys, Mode::row_action, 0), SpecError);
  CHECK_THROWS_AS(arcas::make_random_subset_greedy(0), SpecError);
}

TEST_CASE("grouped walks its partition and tags directions") {
  arcas::GeneratorSpec spec;
  spec.kind = "grouped";
  spec.n = 12;
  spec.d = 5;
  spec.num_groups = 3;
  spec.seed = 61;
  const auto [sys, x_true] = arcas::generate_system(spec);
  const auto groups = arcas::groups_of(sys);

  auto s = arcas::parse_strategy("grouped", sys, Mode::row_action);
  SolveConfig cfg;
  cfg.tol = 1e-10;
  cfg.max_iterations = 5000;
  cfg.trace_level = arcas::TraceLevel::full_directions;
  const Vec x0(5, 0.0);
  const auto trace = arcas::solve(sys, Mode::row_action, *s, cfg, x0);
  CHECK(trace.status == arcas::TerminalStatus::converged);
  CHECK(trace.group_swaps >= 1);
  for (const auto& e : trace.entries) {
    if (e.step_kind == "none") continue;
    REQUIRE(e.group >= 0);
    const auto& rows = groups[static_cast<std::size_t>(e.group)];
    CHECK(std::find(rows.begin(), rows.end(), e.selected) != rows.end());
  }
}

TEST_CASE("grouped leaves a group once its residual has dropped") {
  // two orthogonal groups; rho = 0.5 forces at least one swap before finish
  LinearSystem sys;
  sys.A = Matrix::from_rows({{1.0, 0.0}, {1.0, 1e-6}, {0.0, 1.0}, {1e-6, 1.0}});
  sys.b = {1.0, 1.0, 1.0, 1.0};
  std::vector<std::vector<long>> groups = {{0, 1}, {2, 3}};
  auto s = arcas::make_grouped(groups, [] { return arcas::make_cyclic(); }, 0.5);
  s->reset(sys, Mode::row_action, 3);
  Vec x(2, 0.0);
  Vec r = arcas::residual(sys, x);
  CHECK(s->select(sys, Mode::row_action, x, r).group == 0);
  const auto st = s->state();
  CHECK(st.group == 0);
  CHECK(st.group_visits == 1);
  CHECK(st.group_entry_residual > 0.0);
  // solving group 0 exactly sends its residual to ~0, so the next pick swaps
  x = {1.0, 0.0};
  r = arcas::residual(sys, x);
  CHECK(s->select(sys, Mode::row_action, x, r).group == 1);
}

TEST_CASE("grouped validation") {
  const auto sys = helpers::random_consistent(4, 3, 9);
  auto inner = [] { return arcas::make_cyclic(); };
  CHECK_THROWS_AS(arcas::make_grouped({{0, 1}, {1, 2, 3}}, inner)
                      ->reset(sys, Mode::row_action, 0),
                  SpecError);
  CHECK_THROWS_AS(arcas::make_grouped({{0, 1}}, inner)->reset(sys, Mode::row_action, 0),
                  SpecError);
  CHECK_THROWS_AS(arcas::make_grouped({{0, 1, 2, 9}}, inner)
                      ->reset(sys, Mode::row_action, 0),
                  SpecError);
  CHECK_THROWS_AS(arcas::make_grouped({{0, 1, 2, 3}}, inner, 1.5), SpecError);
  CHECK_THROWS_AS(arcas::make_grouped({{0, 1, 2, 3}}, inner)
                      ->reset(sys, Mode::column_action, 0),
                  SpecError);
  CHECK(arcas::make_grouped({{0, 1, 2, 3}}, inner)->mode_compat() ==
        arcas::ModeCompat::row_only);
}

TEST_CASE("parse_strategy rejects malformed specs") {
  const auto sys = helpers::random_consistent(5, 3, 1);
  const auto M = Mode::row_action;
  CHECK_THROWS_AS(arcas::parse_strategy("banana", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("iid:weights=banana", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("iid:banana=1", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("iid:novalue", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("topm:m=two", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("skm:sample=0", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("grouped:g=0", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("grouped:g=9", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("grouped:rho=1.5", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("grouped:inner=greedy", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("cyclic:reshuffle=maybe", sys, M), ConfigError);
  CHECK_THROWS_AS(arcas::parse_strategy("grouped", sys, M), ConfigError);
}

TEST_CASE("builtin specs all parse and respect mode compatibility") {
  const auto sys = helpers::random_consistent(6, 4, 44);
  for (const auto mode : {Mode::row_action, Mode::column_action}) {
    for (const auto& spec : arcas::builtin_strategy_specs(sys, mode)) {
      auto s = arcas::parse_strategy(spec, sys, mode);
      const auto compat = s->mode_compat();
      if (mode == Mode::row_action)
        CHECK(compat != arcas::ModeCompat::column_only);
      else
        CHECK(compat != arcas::ModeCompat::row_only);
      CHECK_NOTHROW(s->reset(sys, mode, 7));
    }
  }
}
