#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "arcas/rng.hpp"
#include "arcas/subspace.hpp"
#include "test_helpers.hpp"

using arcas::SubspaceBasis;
using arcas::Vec;
using Catch::Approx;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("basis tracks dimension and membership") {
  SubspaceBasis basis;
  REQUIRE(basis.dimension() == 0);
  REQUIRE(basis.extend(Vec{1, 0, 0}) == false);  // new direction
  REQUIRE(basis.extend(Vec{2, 0, 0}) == true);   // already inside
  REQUIRE(basis.extend(Vec{0, 3, 0}) == false);
  REQUIRE(basis.dimension() == 2);
  REQUIRE(basis.contains(Vec{5, -2, 0}));
  REQUIRE_FALSE(basis.contains(Vec{0, 0, 1}));
  const Vec rem = basis.remainder(Vec{1, 1, 1});
  REQUIRE(rem[0] == Approx(0.0).margin(1e-14));
  REQUIRE(rem[1] == Approx(0.0).margin(1e-14));
  REQUIRE(rem[2] == Approx(1.0));
}

TEST_CASE("zero vector is in every subspace once a floor is set") {
  SubspaceBasis basis(1e-10, 1e-13);
  REQUIRE(basis.contains(Vec{0, 0}));
  REQUIRE(basis.extend(Vec{0, 0}) == true);
  REQUIRE(basis.dimension() == 0);
}

TEST_CASE("orthonormal pairs have unit gram determinant") {
  REQUIRE(arcas::gram_determinant({Vec{1, 0}, Vec{0, 1}}) == Approx(1.0));
  REQUIRE(arcas::gram_determinant({Vec{3, 0}, Vec{0, 0.2}}) == Approx(1.0));
}

TEST_CASE("45 degree pair halves the determinant") {
  // G = [[1, c],[c, 1]] with c = cos 45; det = 1 - 1/2
  REQUIRE(arcas::gram_determinant({Vec{1, 0}, Vec{kInvSqrt2, kInvSqrt2}}) ==
          Approx(0.5).margin(1e-12));
}

TEST_CASE("duplicates collapse instead of zeroing the determinant") {
  REQUIRE(arcas::gram_determinant({Vec{1, 0}, Vec{1, 0}, Vec{0, 1}}) ==
          Approx(1.0));
  REQUIRE(arcas::gram_determinant({Vec{1, 0}, Vec{-2, 0}}) == Approx(1.0));
}

TEST_CASE("canonical determinant ignores dependent extras, enumeration does not") {
  const std::vector<Vec> dirs = {Vec{1, 0}, Vec{0, 1}, Vec{kInvSqrt2, kInvSqrt2}};
  REQUIRE(arcas::gram_determinant(dirs) == Approx(1.0));
  const auto e = arcas::enumerate_maximal_subsets(dirs);
  REQUIRE(e.rank == 2);
  REQUIRE(e.independent_subsets == 3);
  REQUIRE(e.min_det == Approx(0.5).margin(1e-12));
  REQUIRE(arcas::worst_case_gamma(dirs) == Approx(0.5).margin(1e-12));
}

TEST_CASE("gram determinant matches the cofactor oracle on independent sets") {
  arcas::Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const long k = 2 + static_cast<long>(rng.uniform_below(5));  // 2..6
    std::vector<Vec> dirs;
    for (long i = 0; i < k; ++i) dirs.push_back(helpers::random_unit(6, rng));
    const double lib = arcas::gram_determinant(dirs);
    const double oracle = helpers::det_cofactor(helpers::gram_of(dirs));
    REQUIRE(lib == Approx(oracle).margin(1e-10));
  }
}

TEST_CASE("subset enumeration matches exhaustive search with dependencies") {
  arcas::Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vec> dirs;
    const long k = 3 + static_cast<long>(rng.uniform_below(3));  // 3..5
    for (long i = 0; i < k; ++i) dirs.push_back(helpers::random_unit(3, rng));
    // inject a dependency half the time
    if (trial % 2 == 0) {
      Vec mix(3, 0.0);
      arcas::axpy(0.7, dirs[0], mix);
      arcas::axpy(-0.4, dirs[1], mix);
      arcas::scale(1.0 / arcas::norm2(mix), mix);
      dirs.push_back(mix);
    }
    const auto e = arcas::enumerate_maximal_subsets(dirs);
    const double oracle = helpers::min_det_exhaustive(dirs);
    REQUIRE(e.min_det == Approx(oracle).margin(1e-10));
  }
}

TEST_CASE("enumeration refuses direction sets beyond the cap") {
  arcas::Rng rng(7);
  std::vector<Vec> dirs;
  for (int i = 0; i < 17; ++i) dirs.push_back(helpers::random_unit(6, rng));
  REQUIRE_THROWS_AS(arcas::enumerate_maximal_subsets(dirs),
                    arcas::EnumerationBudgetError);
}

TEST_CASE("degenerate inputs are rejected") {
  REQUIRE_THROWS_AS(arcas::gram_determinant({}), arcas::Error);
  REQUIRE_THROWS_AS(arcas::gram_determinant({Vec{0, 0}}), arcas::Error);
}
