#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arcas/errors.hpp"
#include "arcas/matrix.hpp"
#include "arcas/mm_io.hpp"
#include "arcas/oracle.hpp"
#include "arcas/rng.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

// a consistent system Ax = b; immutable after construction
struct LinearSystem {
  Matrix A;
  Vec b;
  std::optional<Vec> x_true;     // known for generated systems
  std::string kind = "loaded";   // generator kind or "loaded"
  bool consistency_checked = false;
  bool consistency_warning_only = false;  // beyond oracle scale, accepted as-is
  long num_groups = 0;
  std::vector<long> row_group;   // group id per row; empty when ungrouped

  long n() const { return A.rows(); }
  long d() const { return A.cols(); }
};

inline Vec residual(const LinearSystem& sys, const Vec& x) {
  if (static_cast<long>(x.size()) != sys.d())
    throw DimensionError("residual: x length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(sys.d()));
  Vec r = sys.A.matvec(x);
  for (long i = 0; i < sys.n(); ++i)
    r[static_cast<std::size_t>(i)] = sys.b[static_cast<std::size_t>(i)] -
                                     r[static_cast<std::size_t>(i)];
  return r;
}

// x* = x0 + A^+(b - A x0); the nearest solution to x0
inline Vec project_onto_solution_set(const LinearSystem& sys, const Vec& x0,
                                     const SvdOracle& oracle) {
  Vec x = x0;
  axpy(1.0, oracle.pinv_apply(residual(sys, x0)), x);
  return x;
}

inline Vec project_onto_solution_set(const LinearSystem& sys, const Vec& x0) {
  SvdOracle oracle(sys.A);
  return project_onto_solution_set(sys, x0, oracle);
}

namespace detail {

inline void validate_system(LinearSystem& sys) {
  if (static_cast<long>(sys.b.size()) != sys.n())
    throw DimensionError("rhs length " + std::to_string(sys.b.size()) +
                         " does not match matrix rows " +
                         std::to_string(sys.n()));
  if (!sys.A.any_nonzero()) throw SpecError("matrix has no nonzero entry");
  if (sys.n() * sys.d() > kDenseEntryLimit) {
    sys.consistency_checked = false;
    sys.consistency_warning_only = true;
    return;
  }
  SvdOracle oracle(sys.A);
  const Vec xls = oracle.lstsq(sys.b);
  const double res = norm2(residual(sys, xls));
  const double bound = kEpsConsist * (1.0 + norm2(sys.b));
  if (res > bound)
    throw InconsistentSystemError(
        "system is inconsistent: least-squares residual " + format_double(res) +
        " exceeds " + format_double(bound));
  sys.consistency_checked = true;
}

// near-equal contiguous partition of {0..n-1} into g pieces
inline std::vector<long> contiguous_groups(long n, long g) {
  std::vector<long> group_of(static_cast<std::size_t>(n), 0);
  const long base = n / g;
  const long extra = n % g;
  long row = 0;
  for (long k = 0; k < g; ++k) {
    const long sz = base + (k < extra ? 1 : 0);
    for (long i = 0; i < sz; ++i) group_of[static_cast<std::size_t>(row++)] = k;
  }
  return group_of;
}

}  // namespace detail

inline LinearSystem load_system(const std::string& matrix_path,
                                const std::string& rhs_path) {
  LinearSystem sys;
  sys.A = read_matrix_market(matrix_path);
  sys.b = read_rhs(rhs_path);
  sys.kind = "loaded";
  detail::validate_system(sys);
  return sys;
}

inline LinearSystem make_system(Matrix A, Vec b) {
  LinearSystem sys;
  sys.A = std::move(A);
  sys.b = std::move(b);
  detail::validate_system(sys);
  return sys;
}

struct GeneratorSpec {
  std::string kind;     // random-consistent | block-orthogonal | grouped | rank-deficient
  long n = 0;
  long d = 0;
  long num_blocks = 0;  // block-orthogonal
  long num_groups = 0;  // grouped
  long rank = 0;        // rank-deficient
  std::uint64_t seed = 0;
};

// kind:n=..,d=..[,blocks=..][,groups=..][,rank=..][,seed=..], same grammar
// as strategy specs
inline GeneratorSpec parse_generator_spec(const std::string& text) {
  GeneratorSpec spec;
  spec.kind = text;
  std::string params;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    spec.kind = text.substr(0, colon);
    params = text.substr(colon + 1);
  }
  if (spec.kind != "random-consistent" && spec.kind != "block-orthogonal" &&
      spec.kind != "grouped" && spec.kind != "rank-deficient")
    throw ConfigError("unknown generator kind '" + spec.kind + "'");
  std::size_t pos = 0;
  while (pos < params.size()) {
    auto comma = params.find(',', pos);
    if (comma == std::string::npos) comma = params.size();
    const std::string item = params.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("generator parameter '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    long v = 0;
    try {
      std::size_t used = 0;
      v = std::stol(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw ConfigError("generator parameter '" + key + "' wants an integer, got '" +
                        val + "'");
    }
    if (key == "n") spec.n = v;
    else if (key == "d") spec.d = v;
    else if (key == "blocks") spec.num_blocks = v;
    else if (key == "groups") spec.num_groups = v;
    else if (key == "rank") spec.rank = v;
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(v);
    else throw ConfigError("unknown generator parameter '" + key + "'");
  }
  return spec;
}

inline std::pair<LinearSystem, Vec> generate_system(const GeneratorSpec& spec) {
  if (spec.n <= 0 || spec.d <= 0)
    throw SpecError("generator dimensions must be positive");
  Rng rng(derive_seed(spec.seed, 0x67656eULL));
  const long n = spec.n;
  const long d = spec.d;
  LinearSystem sys;
  sys.kind = spec.kind;

  if (spec.kind == "random-consistent" || spec.kind == "grouped") {
    std::vector<Vec> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) rows.push_back(rng.normal_vector(static_cast<std::size_t>(d)));
    sys.A = Matrix::from_rows(rows);
    if (spec.kind == "grouped") {
      const long g = spec.num_groups;
      if (g <= 0) throw SpecError("grouped generator needs num_groups >= 1");
      if (g > n) throw SpecError("num_groups exceeds row count");
      sys.num_groups = g;
      sys.row_group = detail::contiguous_groups(n, g);
    }
  } else if (spec.kind == "block-orthogonal") {
    const long bks = spec.num_blocks;
    if (bks <= 0) throw SpecError("block-orthogonal generator needs num_blocks >= 1");
    if (bks > n) throw SpecError("num_blocks exceeds row count");
    if (bks > d)
      throw SpecError("num_blocks exceeds dimension; representatives cannot be orthogonal");
    // orthonormal representatives via Gram-Schmidt with a reorthogonalization pass
    std::vector<Vec> reps;
    while (static_cast<long>(reps.size()) < bks) {
      Vec v = rng.normal_vector(static_cast<std::size_t>(d));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : reps) axpy(-dot(q, v), q, v);
      const double nv = norm2(v);
      if (nv < 1e-8) continue;  // unlucky draw, resample
      scale(1.0 / nv, v);
      reps.push_back(std::move(v));
    }
    sys.num_groups = bks;
    sys.row_group = detail::contiguous_groups(n, bks);
    std::vector<Vec> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      Vec row = reps[static_cast<std::size_t>(sys.row_group[static_cast<std::size_t>(i)])];
      scale(rng.uniform(0.5, 2.0), row);
      rows.push_back(std::move(row));
    }
    sys.A = Matrix::from_rows(rows);
  } else if (spec.kind == "rank-deficient") {
    const long r = spec.rank;
    if (r <= 0 || r > std::min(n, d))
      throw SpecError("rank must be in [1, min(n,d)]");
    // A = U V^T with Gaussian factors n x r and d x r
    std::vector<Vec> U, V;
    for (long i = 0; i < n; ++i) U.push_back(rng.normal_vector(static_cast<std::size_t>(r)));
    for (long j = 0; j < d; ++j) V.push_back(rng.normal_vector(static_cast<std::size_t>(r)));
    std::vector<Vec> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      Vec row(static_cast<std::size_t>(d), 0.0);
      for (long j = 0; j < d; ++j)
        row[static_cast<std::size_t>(j)] =
            dot(U[static_cast<std::size_t>(i)], V[static_cast<std::size_t>(j)]);
      rows.push_back(std::move(row));
    }
    sys.A = Matrix::from_rows(rows);
  } else {
    throw SpecError("unknown generator kind '" + spec.kind + "'");
  }

  Vec x_true = rng.normal_vector(static_cast<std::size_t>(d));
  sys.b = sys.A.matvec(x_true);
  sys.x_true = x_true;
  sys.consistency_checked = true;  // b built from A * x_true
  return {std::move(sys), std::move(x_true)};
}

}  // namespace arcas
