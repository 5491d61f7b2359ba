#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "arcas/errors.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

// incrementally maintained orthonormal basis; membership is a projection
// residual test with one reorthogonalization pass
class SubspaceBasis {
public:
  explicit SubspaceBasis(double eps = kEpsSub, double abs_floor = 0.0)
      : eps_(eps), abs_floor_(abs_floor) {}

  long dimension() const { return static_cast<long>(cols_.size()); }
  const std::vector<Vec>& columns() const { return cols_; }
  double tolerance() const { return eps_; }

  Vec remainder(const Vec& v) const {
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : cols_) axpy(-dot(q, r), q, r);
    return r;
  }

  bool contains(const Vec& v) const {
    const double nv = norm2(v);
    if (nv <= abs_floor_) return true;  // zero vector is in every subspace
    return norm2(remainder(v)) <= std::max(eps_ * nv, abs_floor_);
  }

  // contained iff no new column was needed
  bool extend(const Vec& v) {
    const double nv = norm2(v);
    if (nv <= abs_floor_) return true;
    Vec r = remainder(v);
    const double nr = norm2(r);
    if (nr <= std::max(eps_ * nv, abs_floor_)) return true;
    scale(1.0 / nr, r);
    cols_.push_back(std::move(r));
    return false;
  }

private:
  double eps_;
  double abs_floor_;
  std::vector<Vec> cols_;
};

inline std::pair<SubspaceBasis, bool> extend_subspace(SubspaceBasis basis,
                                                      const Vec& v) {
  const bool contained = basis.extend(v);
  return {std::move(basis), contained};
}

namespace detail {

inline std::vector<Vec> normalize_directions(const std::vector<Vec>& dirs) {
  if (dirs.empty()) throw Error("no directions given");
  std::vector<Vec> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) {
    const double n = norm2(d);
    if (n == 0.0) throw Error("zero direction");
    Vec u = d;
    scale(1.0 / n, u);
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace detail

// det(G^T G) of a maximal linearly independent subset of the normalized
// directions, as the product of squared Gram-Schmidt remainder norms under
// pivoted (largest remainder first) selection. Column order never changes
// the value, so any maximal subset of an independent family gives the same
// determinant.
inline double gram_determinant(const std::vector<Vec>& directions,
                               double eps = kEpsSub) {
  const auto dirs = detail::normalize_directions(directions);
  std::vector<char> used(dirs.size(), 0);
  SubspaceBasis basis(eps);
  double det = 1.0;
  for (;;) {
    double best = -1.0;
    long bi = -1;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (used[i]) continue;
      const double rem = norm2(basis.remainder(dirs[i]));
      if (rem > best) {
        best = rem;
        bi = static_cast<long>(i);
      }
    }
    if (bi < 0 || best <= eps) break;
    used[static_cast<std::size_t>(bi)] = 1;
    det *= best * best;
    basis.extend(dirs[static_cast<std::size_t>(bi)]);
  }
  return std::min(det, 1.0);
}

// all maximal linearly independent subsets share the matroid rank; enumerate
// subsets of that size and keep the independent ones
struct SubsetEnumeration {
  long rank = 0;
  double min_det = 1.0;
  long subsets_examined = 0;
  long independent_subsets = 0;
};

namespace detail {

// rank and, for a candidate subset, independence + determinant
inline double subset_det(const std::vector<Vec>& dirs,
                         const std::vector<int>& pick, double eps) {
  SubspaceBasis basis(eps);
  double det = 1.0;
  for (int i : pick) {
    const Vec rem = basis.remainder(dirs[static_cast<std::size_t>(i)]);
    const double nr = norm2(rem);
    if (nr <= eps) return -1.0;  // dependent
    det *= nr * nr;
    basis.extend(dirs[static_cast<std::size_t>(i)]);
  }
  return det;
}

inline long direction_rank(const std::vector<Vec>& dirs, double eps) {
  SubspaceBasis basis(eps);
  for (const auto& d : dirs) basis.extend(d);
  return basis.dimension();
}

}  // namespace detail

inline SubsetEnumeration enumerate_maximal_subsets(
    const std::vector<Vec>& directions, double eps = kEpsSub) {
  auto dirs = detail::normalize_directions(directions);
  // drop colinear duplicates; they cannot appear together in an independent set
  std::vector<Vec> unique;
  for (const auto& d : dirs) {
    bool dup = false;
    for (const auto& u : unique)
      if (std::fabs(dot(u, d)) >= 1.0 - eps) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(d);
  }
  if (static_cast<long>(unique.size()) > kEnumerationCap)
    throw EnumerationBudgetError(
        "subset enumeration over " + std::to_string(unique.size()) +
        " directions exceeds the cap of " + std::to_string(kEnumerationCap));

  SubsetEnumeration out;
  out.rank = detail::direction_rank(unique, eps);
  const long m = static_cast<long>(unique.size());
  // lexicographic combinations of size rank
  std::vector<int> idx(static_cast<std::size_t>(out.rank));
  for (long i = 0; i < out.rank; ++i) idx[static_cast<std::size_t>(i)] = static_cast<int>(i);
  if (out.rank == 0) return out;
  for (;;) {
    ++out.subsets_examined;
    const double det = detail::subset_det(unique, idx, eps);
    if (det >= 0.0) {
      ++out.independent_subsets;
      out.min_det = std::min(out.min_det, det);
    }
    long i = out.rank - 1;
    while (i >= 0 &&
           idx[static_cast<std::size_t>(i)] == m - out.rank + i)
      --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (long j = i + 1; j < out.rank; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

// 1 - min over all maximal linearly independent subsets H of det(H^T H)
inline double worst_case_gamma(const std::vector<Vec>& direction_set,
                               double eps = kEpsSub) {
  const auto e = enumerate_maximal_subsets(direction_set, eps);
  return 1.0 - e.min_det;
}

}  // namespace arcas
