#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arcas/errors.hpp"
#include "arcas/matrix.hpp"

namespace arcas {

// shortest exact decimal round-trip for doubles; 17 significant digits
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double parse_real(const std::string& tok, const std::string& file, long ln) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw FormatError(file, ln, "expected a real number, got '" + tok + "'");
  return v;
}

inline long parse_long(const std::string& tok, const std::string& file, long ln) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw FormatError(file, ln, "expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace detail

// Matrix Market: coordinate and array, real or integer values,
// general and symmetric symmetry.
inline Matrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  std::string line;
  long ln = 0;

  if (!std::getline(in, line)) throw FormatError(path, 1, "empty file");
  ++ln;
  auto header = detail::split_ws(detail::lower(line));
  if (header.size() < 4 || header[0] != "%%matrixmarket" || header[1] != "matrix")
    throw FormatError(path, ln, "missing '%%MatrixMarket matrix' header");
  const std::string layout = header[2];
  const std::string field = header[3];
  const std::string symmetry = header.size() > 4 ? header[4] : "general";
  if (layout != "coordinate" && layout != "array")
    throw FormatError(path, ln, "unsupported layout '" + layout + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw FormatError(path, ln, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw FormatError(path, ln, "unsupported symmetry '" + symmetry + "'");

  auto next_data_line = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(in, line)) {
      ++ln;
      if (!line.empty() && line[0] == '%') continue;
      toks = detail::split_ws(line);
      if (toks.empty()) continue;
      return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_data_line(toks)) throw FormatError(path, ln, "missing size line");

  if (layout == "coordinate") {
    if (toks.size() != 3)
      throw FormatError(path, ln, "coordinate size line needs 'rows cols nnz'");
    const long n = detail::parse_long(toks[0], path, ln);
    const long d = detail::parse_long(toks[1], path, ln);
    const long nnz = detail::parse_long(toks[2], path, ln);
    if (n <= 0 || d <= 0 || nnz < 0)
      throw FormatError(path, ln, "bad sizes in coordinate header");
    if (symmetry == "symmetric" && n != d)
      throw FormatError(path, ln, "symmetric matrix must be square");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line(toks))
        throw FormatError(path, ln, "expected " + std::to_string(nnz) +
                                        " entries, file ended early");
      if (toks.size() != 3)
        throw FormatError(path, ln, "coordinate entry needs 'i j value'");
      const long i = detail::parse_long(toks[0], path, ln);
      const long j = detail::parse_long(toks[1], path, ln);
      const double v = detail::parse_real(toks[2], path, ln);
      if (i < 1 || i > n || j < 1 || j > d)
        throw FormatError(path, ln, "entry index out of range");
      trips.push_back({i - 1, j - 1, v});
      if (symmetry == "symmetric" && i != j) trips.push_back({j - 1, i - 1, v});
    }
    return Matrix::from_triplets(n, d, std::move(trips));
  }

  // array layout: values stored column-major; symmetric stores the lower
  // triangle (including the diagonal) of each column
  if (toks.size() != 2)
    throw FormatError(path, ln, "array size line needs 'rows cols'");
  const long n = detail::parse_long(toks[0], path, ln);
  const long d = detail::parse_long(toks[1], path, ln);
  if (n <= 0 || d <= 0) throw FormatError(path, ln, "bad sizes in array header");
  if (symmetry == "symmetric" && n != d)
    throw FormatError(path, ln, "symmetric matrix must be square");
  Vec data(static_cast<std::size_t>(n * d), 0.0);
  std::vector<std::string> pending;
  std::size_t pi = 0;
  auto next_value = [&]() -> double {
    while (pi >= pending.size()) {
      if (!next_data_line(pending)) throw FormatError(path, ln, "file ended before all values were read");
      pi = 0;
    }
    return detail::parse_real(pending[pi++], path, ln);
  };
  if (symmetry == "general") {
    for (long j = 0; j < d; ++j)
      for (long i = 0; i < n; ++i)
        data[static_cast<std::size_t>(i * d + j)] = next_value();
  } else {
    for (long j = 0; j < d; ++j)
      for (long i = j; i < n; ++i) {
        const double v = next_value();
        data[static_cast<std::size_t>(i * d + j)] = v;
        data[static_cast<std::size_t>(j * d + i)] = v;
      }
  }
  return Matrix::dense(n, d, std::move(data));
}

// dense matrices go out as array/general, sparse as coordinate/general
inline void write_matrix_market(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  if (m.is_dense()) {
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << " " << m.cols() << "\n";
    for (long j = 0; j < m.cols(); ++j)
      for (long i = 0; i < m.rows(); ++i)
        out << format_double(m.entry(i, j)) << "\n";
  } else {
    auto trips = m.to_triplets();
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << trips.size() << "\n";
    for (const auto& t : trips)
      out << (t.r + 1) << " " << (t.c + 1) << " " << format_double(t.v) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// right-hand sides: plain text, whitespace separated, '#' starts a comment
inline Vec read_rhs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rhs file: " + path);
  Vec out;
  std::string line;
  long ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (const auto& tok : detail::split_ws(line))
      out.push_back(detail::parse_real(tok, path, ln));
  }
  if (out.empty()) throw FormatError(path, ln, "rhs file holds no values");
  return out;
}

inline void write_rhs(const Vec& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (double v : b) out << format_double(v) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace arcas
