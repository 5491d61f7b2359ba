#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "arcas/matrix.hpp"
#include "arcas/mm_io.hpp"

using arcas::Matrix;
using arcas::Vec;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

TEST_CASE("dense construction and products") {
  const Matrix m = Matrix::dense(2, 3, {1, 2, 3, 4, 5, 6});
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  REQUIRE(m.entry(0, 0) == 1.0);
  REQUIRE(m.entry(1, 2) == 6.0);
  REQUIRE(m.nnz() == 6);

  const Vec ax = m.matvec(Vec{1, 1, 1});
  REQUIRE(ax[0] == Approx(6.0));
  REQUIRE(ax[1] == Approx(15.0));

  const Vec atv = m.matvec_t(Vec{1, 1});
  REQUIRE(atv[0] == Approx(5.0));
  REQUIRE(atv[1] == Approx(7.0));
  REQUIRE(atv[2] == Approx(9.0));

  REQUIRE(m.row_norm_sq(0) == Approx(14.0));
  REQUIRE(m.col_norm_sq(1) == Approx(29.0));
  REQUIRE(m.row_dot(1, Vec{1, 0, 1}) == Approx(10.0));
  REQUIRE(m.col_dot(2, Vec{1, 1}) == Approx(9.0));
}

TEST_CASE("dense size validation") {
  REQUIRE_THROWS_AS(Matrix::dense(2, 2, {1, 2, 3}), arcas::DimensionError);
  REQUIRE_THROWS_AS(Matrix::dense(0, 2, {}), arcas::DimensionError);
  const Matrix m = Matrix::dense(2, 2, {1, 2, 3, 4});
  REQUIRE_THROWS_AS(m.entry(2, 0), arcas::DimensionError);
  REQUIRE_THROWS_AS(m.matvec(Vec{1, 2, 3}), arcas::DimensionError);
}

TEST_CASE("triplets sum duplicates") {
  const Matrix m = Matrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 5.0}});
  REQUIRE(m.entry(0, 0) == Approx(3.0));
  REQUIRE(m.entry(0, 1) == 0.0);
  REQUIRE(m.entry(1, 1) == Approx(5.0));
  REQUIRE_THROWS_AS(Matrix::from_triplets(2, 2, {{2, 0, 1.0}}), arcas::DimensionError);
}

TEST_CASE("transpose flips products") {
  const Matrix m = Matrix::dense(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix t = m.transposed();
  REQUIRE(t.rows() == 3);
  REQUIRE(t.cols() == 2);
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 3; ++j) REQUIRE(m.entry(i, j) == t.entry(j, i));
}

TEST_CASE("row and column copies agree with entries") {
  const Matrix m = Matrix::from_triplets(3, 2, {{0, 1, 2.0}, {2, 0, -1.5}});
  const Vec r0 = m.row_copy(0);
  REQUIRE(r0[0] == 0.0);
  REQUIRE(r0[1] == 2.0);
  const Vec c0 = m.col_copy(0);
  REQUIRE(c0[2] == -1.5);
  REQUIRE(m.any_nonzero());
  REQUIRE_FALSE(Matrix::dense_zero(2, 2).any_nonzero());
}

TEST_CASE("matrix market array round trip is exact") {
  const auto p = temp_file("arcas_mm_array.mtx");
  const Matrix m = Matrix::dense(3, 2, {1.0, -2.5, 1e-17, 3.0, 0.1, 123456789.123456789});
  arcas::write_matrix_market(m, p.string());
  const Matrix back = arcas::read_matrix_market(p.string());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 2);
  for (long i = 0; i < 3; ++i)
    for (long j = 0; j < 2; ++j) REQUIRE(back.entry(i, j) == m.entry(i, j));
  std::filesystem::remove(p);
}

TEST_CASE("matrix market coordinate file reads one-based entries") {
  const auto p = temp_file("arcas_mm_coord.mtx");
  write_text(p,
             "%%MatrixMarket matrix coordinate real general\n"
             "% a comment line\n"
             "3 3 2\n"
             "1 2 4.5\n"
             "3 1 -1\n");
  const Matrix m = arcas::read_matrix_market(p.string());
  REQUIRE(m.entry(0, 1) == Approx(4.5));
  REQUIRE(m.entry(2, 0) == Approx(-1.0));
  REQUIRE(m.entry(1, 1) == 0.0);
  std::filesystem::remove(p);
}

TEST_CASE("matrix market symmetric coordinate mirrors entries") {
  const auto p = temp_file("arcas_mm_sym.mtx");
  write_text(p,
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "2 2 2\n"
             "1 1 3\n"
             "2 1 7\n");
  const Matrix m = arcas::read_matrix_market(p.string());
  REQUIRE(m.entry(0, 1) == Approx(7.0));
  REQUIRE(m.entry(1, 0) == Approx(7.0));
  std::filesystem::remove(p);
}

TEST_CASE("matrix market format errors carry the line") {
  const auto p = temp_file("arcas_mm_bad.mtx");
  write_text(p, "%%MatrixMarket tensor coordinate real general\n1 1 0\n");
  REQUIRE_THROWS_AS(arcas::read_matrix_market(p.string()), arcas::FormatError);
  write_text(p, "%%MatrixMarket matrix coordinate complex general\n1 1 0\n");
  REQUIRE_THROWS_AS(arcas::read_matrix_market(p.string()), arcas::FormatError);
  write_text(p,
             "%%MatrixMarket matrix coordinate real general\n"
             "2 2 2\n"
             "1 1 1.0\n");
  REQUIRE_THROWS_AS(arcas::read_matrix_market(p.string()), arcas::FormatError);
  write_text(p,
             "%%MatrixMarket matrix coordinate real general\n"
             "2 2 1\n"
             "3 1 1.0\n");
  REQUIRE_THROWS_AS(arcas::read_matrix_market(p.string()), arcas::FormatError);
  REQUIRE_THROWS_AS(arcas::read_matrix_market("/nonexistent/x.mtx"), arcas::IoError);
  std::filesystem::remove(p);
}

TEST_CASE("rhs file round trip with comments") {
  const auto p = temp_file("arcas_rhs.txt");
  arcas::write_rhs(Vec{1.5, -2.0, 1e-9}, p.string());
  Vec b = arcas::read_rhs(p.string());
  REQUIRE(b.size() == 3);
  REQUIRE(b[0] == 1.5);
  REQUIRE(b[2] == 1e-9);

  write_text(p, "# header\n1.0 2.0\n3.0 # trailing\n");
  b = arcas::read_rhs(p.string());
  REQUIRE(b.size() == 3);
  REQUIRE(b[1] == 2.0);
  REQUIRE(b[2] == 3.0);

  write_text(p, "1.0\nnot_a_number\n");
  REQUIRE_THROWS_AS(arcas::read_rhs(p.string()), arcas::FormatError);
  write_text(p, "# only comments\n");
  REQUIRE_THROWS_AS(arcas::read_rhs(p.string()), arcas::FormatError);
  std::filesystem::remove(p);
}
