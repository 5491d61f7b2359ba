#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arcas/engine.hpp"
#include "arcas/errors.hpp"
#include "arcas/matrix.hpp"
#include "arcas/mm_io.hpp"
#include "arcas/rng.hpp"
#include "arcas/system.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

struct StreamPair {
  Vec alpha;
  double beta = 0.0;
};

// Pull-based equation source: each next() yields one (alpha, beta) with
// beta = alpha . x_star. A source is owned by a single consumer.
class StreamingSource {
 public:
  virtual ~StreamingSource() = default;
  virtual StreamPair next() = 0;
  virtual const Vec& x_star() const = 0;
  virtual long dim() const = 0;
  virtual long zero_discards() const { return 0; }
};

// alpha ~ N(0, covariance); zero draws are discarded and counted rather
// than passed downstream
class GaussianStream final : public StreamingSource {
 public:
  GaussianStream(Vec x_star, const Matrix& covariance, std::uint64_t seed)
      : x_star_(std::move(x_star)), rng_(seed) {
    const long d = static_cast<long>(x_star_.size());
    if (covariance.rows() != d || covariance.cols() != d)
      throw DimensionError("gaussian stream: covariance must be d x d");
    Eigen::MatrixXd sigma(d, d);
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) sigma(i, j) = covariance.entry(i, j);
    const double scale_ref = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale_ref)
      throw SpecError("gaussian stream: covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.info() != Eigen::Success)
      throw SpecError("gaussian stream: eigendecomposition failed");
    const double lmin = eig.eigenvalues().minCoeff();
    if (lmin <= kEpsRank * scale_ref)
      throw SpecError("gaussian stream: covariance is not positive definite "
                      "(lambda_min = " + format_double(lmin) + ")");
    // factor L with L L^T = covariance; alpha = L z for standard normal z
    const Eigen::MatrixXd L =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal();
    factor_.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0);
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j)
        factor_[static_cast<std::size_t>(i * d + j)] = L(i, j);
  }

  StreamPair next() override {
    const long d = dim();
    StreamPair p;
    p.alpha.assign(static_cast<std::size_t>(d), 0.0);
    while (true) {
      Vec z(static_cast<std::size_t>(d));
      for (auto& v : z) v = rng_.normal();
      for (long i = 0; i < d; ++i) {
        double s = 0.0;
        for (long j = 0; j < d; ++j)
          s += factor_[static_cast<std::size_t>(i * d + j)] * z[static_cast<std::size_t>(j)];
        p.alpha[static_cast<std::size_t>(i)] = s;
      }
      if (norm2_sq(p.alpha) > 0.0) break;
      ++discards_;
    }
    p.beta = dot(p.alpha, x_star_);
    return p;
  }

  const Vec& x_star() const override { return x_star_; }
  long dim() const override { return static_cast<long>(x_star_.size()); }
  long zero_discards() const override { return discards_; }

 private:
  Vec x_star_;
  Vec factor_;  // row-major d x d
  Rng rng_;
  long discards_ = 0;
};

inline std::unique_ptr<StreamingSource> make_gaussian_stream(
    Vec x_star, const Matrix& covariance, std::uint64_t seed) {
  return std::make_unique<GaussianStream>(std::move(x_star), covariance, seed);
}

// fixed pair list, e.g. loaded from a replay file
class RecordedStream final : public StreamingSource {
 public:
  RecordedStream(std::vector<StreamPair> pairs, Vec x_star)
      : pairs_(std::move(pairs)), x_star_(std::move(x_star)) {
    for (const auto& p : pairs_)
      if (p.alpha.size() != x_star_.size())
        throw DimensionError("recorded stream: pair width does not match x_star");
  }

  StreamPair next() override {
    if (pos_ >= pairs_.size())
      throw SpecError("recorded stream exhausted after " +
                      std::to_string(pairs_.size()) + " pairs");
    return pairs_[pos_++];
  }

  const Vec& x_star() const override { return x_star_; }
  long dim() const override { return static_cast<long>(x_star_.size()); }

 private:
  std::vector<StreamPair> pairs_;
  Vec x_star_;
  std::size_t pos_ = 0;
};

inline std::vector<StreamPair> record_stream(StreamingSource& source, long count) {
  std::vector<StreamPair> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(source.next());
  return out;
}

// replay rows: alpha_1,...,alpha_d,beta
inline void write_stream_csv(std::ostream& out, const std::vector<StreamPair>& pairs) {
  for (const auto& p : pairs) {
    for (double a : p.alpha) out << format_double(a) << ",";
    out << format_double(p.beta) << "\n";
  }
}

inline void write_stream_csv(const std::string& path,
                             const std::vector<StreamPair>& pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_stream_csv(out, pairs);
}

inline std::vector<StreamPair> read_stream_csv(std::istream& in,
                                               const std::string& name = "<stream>") {
  std::vector<StreamPair> pairs;
  std::string line;
  std::size_t width = 0;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(name, lineno, "bad number '" + cell + "'");
      }
    }
    if (vals.size() < 2)
      throw FormatError(name, lineno, "need at least alpha_1 and beta");
    if (width == 0) width = vals.size();
    if (vals.size() != width) throw FormatError(name, lineno, "ragged row");
    StreamPair p;
    p.beta = vals.back();
    vals.pop_back();
    p.alpha = std::move(vals);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::vector<StreamPair> read_stream_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_stream_csv(in, path);
}

// x' = x + alpha (beta - alpha . x) / ||alpha||^2, the row-action update on
// the single equation alpha^T x = beta
inline Vec streaming_step(const Vec& x, const Vec& alpha, double beta) {
  if (alpha.size() != x.size())
    throw DimensionError("streaming_step: alpha and x lengths differ");
  const double asq = norm2_sq(alpha);
  if (asq <= 0.0)
    throw ContractViolationError("streaming_step: zero alpha");
  Vec out = x;
  axpy((beta - dot(alpha, x)) / asq, alpha, out);
  return out;
}

// Consumes pairs until the error to x_star passes tol * (1 + ||x_star||) or
// the budget runs out. No finite residual exists here, so norm_residual
// carries the error norm as well.
inline SolveTrace solve_streaming(StreamingSource& source, const Vec& x0,
                                  long budget, double tol) {
  if (static_cast<long>(x0.size()) != source.dim())
    throw DimensionError("solve_streaming: x0 length must equal source dim");
  if (budget < 1) throw ConfigError("solve_streaming: budget must be >= 1");
  const Vec& xs = source.x_star();

  SolveTrace trace;
  trace.mode = Mode::row_action;
  trace.level = TraceLevel::norms;
  trace.norm_b = norm2(xs);
  trace.tol_threshold = tol * (1.0 + trace.norm_b);

  Vec x = x0;
  double err = norm2(sub(x, xs));
  const double chi_floor = kAbsNoiseFloor * (1.0 + err);
  for (long k = 0;; ++k) {
    TraceEntry e;
    e.norm_y = err;
    e.norm_residual = err;
    if (err <= trace.tol_threshold) {
      e.step_kind = "none";
      trace.entries.push_back(std::move(e));
      trace.status = TerminalStatus::converged;
      trace.iterations = k;
      break;
    }
    if (k >= budget) {
      e.step_kind = "none";
      trace.entries.push_back(std::move(e));
      trace.status = TerminalStatus::budget_exhausted;
      trace.iterations = k;
      break;
    }
    const StreamPair p = source.next();
    const double num = p.beta - dot(p.alpha, x);
    const double an = norm2(p.alpha);
    e.chi = std::fabs(num) > an * std::max(kEpsChi * err, chi_floor) ? 1 : 0;
    e.step_kind = "stream";
    trace.entries.push_back(std::move(e));
    x = streaming_step(x, p.alpha, p.beta);
    err = norm2(sub(x, xs));
  }
  return trace;
}

}  // namespace arcas
