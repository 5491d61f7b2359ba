#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "arcas/matrix.hpp"
#include "arcas/tolerances.hpp"
#include "arcas/vec.hpp"

namespace arcas {

// Dense SVD oracle. Diagnostic only: consistency checks, projections onto the
// solution set, null-space bases, numerical rank. The iterative path never
// calls it.
class SvdOracle {
public:
  explicit SvdOracle(const Matrix& A) : n_(A.rows()), d_(A.cols()) {
    if (n_ * d_ > kDenseEntryLimit)
      throw OracleUnavailableError(
          "dense SVD oracle limited to " + std::to_string(kDenseEntryLimit) +
          " entries; got " + std::to_string(n_ * d_));
    Eigen::MatrixXd M(n_, d_);
    if (A.is_dense()) {
      const Vec& data = A.dense_data();
      for (long i = 0; i < n_; ++i)
        for (long j = 0; j < d_; ++j)
          M(i, j) = data[static_cast<std::size_t>(i * d_ + j)];
    } else {
      M.setZero();
      for (const auto& t : A.to_triplets()) M(t.r, t.c) = t.v;
    }
    svd_.compute(M, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd_.singularValues();
    sigma_max_ = sv.size() > 0 ? sv(0) : 0.0;
    rank_ = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kEpsRank * sigma_max_) ++rank_;
  }

  long rank() const { return rank_; }
  double sigma_max() const { return sigma_max_; }
  double sigma(long i) const { return svd_.singularValues()(i); }

  // A^+ r, truncated at the numerical rank
  Vec pinv_apply(const Vec& r) const {
    if (static_cast<long>(r.size()) != n_)
      throw DimensionError("pinv_apply: length mismatch");
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), n_);
    Eigen::VectorXd z = svd_.matrixU().transpose() * rv;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d_);
    const auto& sv = svd_.singularValues();
    for (long i = 0; i < rank_; ++i)
      w += (z(i) / sv(i)) * svd_.matrixV().col(i);
    return Vec(w.data(), w.data() + d_);
  }

  Vec lstsq(const Vec& b) const { return pinv_apply(b); }

  // orthonormal basis of null(A): trailing right singular vectors
  std::vector<Vec> nullspace_basis() const {
    std::vector<Vec> basis;
    for (long i = rank_; i < d_; ++i) {
      Eigen::VectorXd c = svd_.matrixV().col(i);
      basis.emplace_back(c.data(), c.data() + d_);
    }
    return basis;
  }

  // component of x in null(A)
  Vec project_nullspace(const Vec& x) const {
    if (static_cast<long>(x.size()) != d_)
      throw DimensionError("project_nullspace: length mismatch");
    Vec out(static_cast<std::size_t>(d_), 0.0);
    for (long i = rank_; i < d_; ++i) {
      Eigen::VectorXd c = svd_.matrixV().col(i);
      double coef = 0.0;
      for (long j = 0; j < d_; ++j) coef += c(j) * x[static_cast<std::size_t>(j)];
      for (long j = 0; j < d_; ++j) out[static_cast<std::size_t>(j)] += coef * c(j);
    }
    return out;
  }

  // orthonormal basis of row(A): leading right singular vectors
  std::vector<Vec> rowspace_basis() const {
    std::vector<Vec> basis;
    for (long i = 0; i < rank_; ++i) {
      Eigen::VectorXd c = svd_.matrixV().col(i);
      basis.emplace_back(c.data(), c.data() + d_);
    }
    return basis;
  }

  // orthonormal basis of range(A): leading left singular vectors
  std::vector<Vec> range_basis() const {
    std::vector<Vec> basis;
    for (long i = 0; i < rank_; ++i) {
      Eigen::VectorXd c = svd_.matrixU().col(i);
      basis.emplace_back(c.data(), c.data() + n_);
    }
    return basis;
  }

private:
  long n_;
  long d_;
  long rank_ = 0;
  double sigma_max_ = 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
};

}  // namespace arcas
