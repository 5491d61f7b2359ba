#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "arcas/errors.hpp"

namespace arcas {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("dot: size mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
  for (auto& v : x) v *= alpha;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("sub: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("add: size mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace arcas
