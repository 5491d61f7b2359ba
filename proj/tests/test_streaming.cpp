#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/streaming.hpp"
#include "arcas/system.hpp"
#include "test_helpers.hpp"

using arcas::Matrix;
using arcas::StreamPair;
using arcas::Vec;
using Catch::Approx;

namespace {

Matrix identity_cov(long d) {
  std::vector<Vec> rows(static_cast<std::size_t>(d),
                        Vec(static_cast<std::size_t>(d), 0.0));
  for (long i = 0; i < d; ++i) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return Matrix::from_rows(rows);
}

}  // namespace

TEST_CASE("streaming step frozen values") {
  const Vec x1 = arcas::streaming_step(Vec{0.0, 0.0}, Vec{1.0, 1.0}, 3.0);
  CHECK(x1[0] == Approx(1.5));
  CHECK(x1[1] == Approx(1.5));

  const Vec x2 = arcas::streaming_step(Vec{0.0}, Vec{2.0}, 4.0);
  CHECK(x2[0] == Approx(2.0));

  // consistent equation leaves the iterate alone
  const Vec same = arcas::streaming_step(Vec{1.5, 1.5}, Vec{1.0, 1.0}, 3.0);
  CHECK(same[0] == Approx(1.5));
  CHECK(same[1] == Approx(1.5));

  CHECK_THROWS_AS(arcas::streaming_step(Vec{0.0, 0.0}, Vec{0.0, 0.0}, 1.0),
                  arcas::ContractViolationError);
  CHECK_THROWS_AS(arcas::streaming_step(Vec{0.0, 0.0}, Vec{1.0}, 1.0),
                  arcas::DimensionError);
}

TEST_CASE("gaussian stream pairs satisfy beta = alpha . x_star exactly") {
  const Vec xs = {2.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(1), 7);
  for (int k = 0; k < 100; ++k) {
    const auto p = src->next();
    CHECK(p.beta == p.alpha[0] * 2.0);
  }
  CHECK(src->dim() == 1);
  CHECK(src->x_star()[0] == 2.0);
}

TEST_CASE("gaussian stream replays bit-identically under one seed") {
  const Vec xs = {1.0, -2.0, 0.5};
  auto a = arcas::make_gaussian_stream(xs, identity_cov(3), 41);
  auto b = arcas::make_gaussian_stream(xs, identity_cov(3), 41);
  for (int k = 0; k < 50; ++k) {
    const auto pa = a->next();
    const auto pb = b->next();
    CHECK(pa.alpha == pb.alpha);
    CHECK(pa.beta == pb.beta);
  }
}

TEST_CASE("identity covariance second moments") {
  const Vec xs = {0.0, 0.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(2), 2024);
  const long n = 100000;
  double s00 = 0.0, s11 = 0.0, s01 = 0.0;
  for (long k = 0; k < n; ++k) {
    const auto p = src->next();
    s00 += p.alpha[0] * p.alpha[0];
    s11 += p.alpha[1] * p.alpha[1];
    s01 += p.alpha[0] * p.alpha[1];
  }
  CHECK(s00 / n == Approx(1.0).margin(0.02));
  CHECK(s11 / n == Approx(1.0).margin(0.02));
  CHECK(s01 / n == Approx(0.0).margin(0.02));
  CHECK(src->zero_discards() == 0);
}

TEST_CASE("anisotropic covariance shapes the draws") {
  const Vec xs = {0.0, 0.0};
  Matrix cov = Matrix::from_rows({{4.0, 0.0}, {0.0, 0.25}});
  auto src = arcas::make_gaussian_stream(xs, cov, 5);
  const long n = 50000;
  double s00 = 0.0, s11 = 0.0;
  for (long k = 0; k < n; ++k) {
    const auto p = src->next();
    s00 += p.alpha[0] * p.alpha[0];
    s11 += p.alpha[1] * p.alpha[1];
  }
  CHECK(s00 / n == Approx(4.0).margin(0.1));
  CHECK(s11 / n == Approx(0.25).margin(0.01));
}

TEST_CASE("covariance validation") {
  const Vec xs = {0.0, 0.0};
  const Matrix asym = Matrix::from_rows({{1.0, 0.5}, {0.0, 1.0}});
  CHECK_THROWS_AS(arcas::make_gaussian_stream(xs, asym, 1), arcas::SpecError);
  const Matrix indef = Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  CHECK_THROWS_AS(arcas::make_gaussian_stream(xs, indef, 1), arcas::SpecError);
  const Matrix singular = Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(arcas::make_gaussian_stream(xs, singular, 1), arcas::SpecError);
  const Matrix wrong = Matrix::from_rows({{1.0}});
  CHECK_THROWS_AS(arcas::make_gaussian_stream(xs, wrong, 1),
                  arcas::DimensionError);
}

TEST_CASE("streaming step agrees with the row action on one-row systems") {
  arcas::Rng rng(99);
  for (int t = 0; t < 10000; ++t) {
    const Vec alpha = rng.normal_vector(3);
    if (arcas::norm2_sq(alpha) == 0.0) continue;
    const Vec x = rng.normal_vector(3);
    const double beta = rng.normal();
    arcas::LinearSystem sys;
    sys.A = Matrix::from_rows({alpha});
    sys.b = {beta};
    sys.consistency_checked = true;  // one nonzero row is always consistent
    const Vec via_stream = arcas::streaming_step(x, alpha, beta);
    const Vec via_row = arcas::row_action_step(sys, x, Vec{1.0});
    for (int i = 0; i < 3; ++i)
      CHECK(via_stream[static_cast<std::size_t>(i)] ==
            Approx(via_row[static_cast<std::size_t>(i)]).margin(1e-14));
  }
}

TEST_CASE("solve_streaming converges monotonically on random equations") {
  arcas::Rng seed_rng(7);
  Vec xs(10);
  for (auto& v : xs) v = seed_rng.normal();
  auto src = arcas::make_gaussian_stream(xs, identity_cov(10), 31);
  const Vec x0(10, 0.0);
  const auto trace = arcas::solve_streaming(*src, x0, 10000, 1e-6);
  CHECK(trace.status == arcas::TerminalStatus::converged);
  CHECK(trace.iterations <= 10000);
  for (std::size_t i = 1; i < trace.entries.size(); ++i)
    CHECK(trace.entries[i].norm_y <= trace.entries[i - 1].norm_y + 1e-15);
  CHECK(trace.entries.back().step_kind == "none");
  for (std::size_t i = 0; i + 1 < trace.entries.size(); ++i)
    CHECK(trace.entries[i].step_kind == "stream");
  CHECK(trace.entries.back().norm_y <= trace.tol_threshold);
}

TEST_CASE("solve_streaming edge cases") {
  const Vec xs = {1.0, 2.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(2), 3);
  const auto at_solution = arcas::solve_streaming(*src, xs, 100, 1e-8);
  CHECK(at_solution.status == arcas::TerminalStatus::converged);
  CHECK(at_solution.iterations == 0);
  CHECK(at_solution.entries.size() == 1);

  CHECK_THROWS_AS(arcas::solve_streaming(*src, xs, 0, 1e-8), arcas::ConfigError);
  CHECK_THROWS_AS(arcas::solve_streaming(*src, Vec{1.0}, 10, 1e-8),
                  arcas::DimensionError);

  auto tight = arcas::make_gaussian_stream(xs, identity_cov(2), 3);
  const auto exhausted = arcas::solve_streaming(*tight, Vec{9.0, 9.0}, 3, 1e-15);
  CHECK(exhausted.status == arcas::TerminalStatus::budget_exhausted);
  CHECK(exhausted.iterations == 3);
  CHECK(exhausted.entries.size() == 4);
}

TEST_CASE("recorded streams replay and exhaust") {
  const Vec xs = {1.0, -1.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(2), 17);
  const auto pairs = arcas::record_stream(*src, 25);
  REQUIRE(pairs.size() == 25);

  arcas::RecordedStream replay(pairs, xs);
  for (const auto& p : pairs) {
    const auto q = replay.next();
    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);
  }
  CHECK_THROWS_AS(replay.next(), arcas::SpecError);

  const StreamPair short_pair{Vec{1.0}, 1.0};
  CHECK_THROWS_AS(arcas::RecordedStream({short_pair}, xs), arcas::DimensionError);
}

TEST_CASE("stream csv round trip") {
  const Vec xs = {0.5, 2.0, -3.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(3), 23);
  const auto pairs = arcas::record_stream(*src, 12);

  std::stringstream buf;
  arcas::write_stream_csv(buf, pairs);
  const auto back = arcas::read_stream_csv(buf);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(back[i].alpha == pairs[i].alpha);
    CHECK(back[i].beta == pairs[i].beta);
  }

  std::stringstream bad("1.0,2.0,3.0\n1.0,oops,3.0\n");
  CHECK_THROWS_AS(arcas::read_stream_csv(bad), arcas::FormatError);
  std::stringstream ragged("1.0,2.0,3.0\n1.0,2.0\n");
  CHECK_THROWS_AS(arcas::read_stream_csv(ragged), arcas::FormatError);
  std::stringstream narrow("1.0\n");
  CHECK_THROWS_AS(arcas::read_stream_csv(narrow), arcas::FormatError);
}

TEST_CASE("a recorded stream drives the solver to the planted solution") {
  const Vec xs = {3.0, -1.0, 0.25, 4.0};
  auto src = arcas::make_gaussian_stream(xs, identity_cov(4), 9);
  const auto pairs = arcas::record_stream(*src, 2000);
  arcas::RecordedStream replay(pairs, xs);
  const auto trace = arcas::solve_streaming(replay, Vec(4, 0.0), 2000, 1e-6);
  CHECK(trace.status == arcas::TerminalStatus::converged);
}
