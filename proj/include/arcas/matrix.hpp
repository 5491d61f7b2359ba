#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "arcas/errors.hpp"
#include "arcas/vec.hpp"

namespace arcas {

// one (row, col, value) entry of a sparse description; duplicates are summed
struct Triplet {
  long r;
  long c;
  double v;
};

// dense row-major below this many entries, CSR (+ CSC companion) above
inline constexpr long kDenseEntryLimit = 1'000'000;

class Matrix {
public:
  Matrix() = default;

  static Matrix dense(long n, long d, Vec data) {
    if (n <= 0 || d <= 0)
      throw DimensionError("matrix dimensions must be positive");
    if (static_cast<long>(data.size()) != n * d)
      throw DimensionError("dense data size does not match n*d");
    Matrix m;
    m.n_ = n;
    m.d_ = d;
    m.dense_ = std::move(data);
    m.is_dense_ = true;
    m.finish_();
    return m;
  }

  static Matrix dense_zero(long n, long d) {
    return dense(n, d, Vec(static_cast<std::size_t>(n * d), 0.0));
  }

  static Matrix from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw DimensionError("from_rows: no rows");
    const long n = static_cast<long>(rows.size());
    const long d = static_cast<long>(rows[0].size());
    Vec data;
    data.reserve(static_cast<std::size_t>(n * d));
    for (const auto& r : rows) {
      if (static_cast<long>(r.size()) != d)
        throw DimensionError("from_rows: ragged rows");
      data.insert(data.end(), r.begin(), r.end());
    }
    return dense(n, d, std::move(data));
  }

  static Matrix from_triplets(long n, long d, std::vector<Triplet> trips) {
    if (n <= 0 || d <= 0)
      throw DimensionError("matrix dimensions must be positive");
    for (const auto& t : trips)
      if (t.r < 0 || t.r >= n || t.c < 0 || t.c >= d)
        throw DimensionError("triplet index out of range");
    if (n * d <= kDenseEntryLimit) {
      Vec data(static_cast<std::size_t>(n * d), 0.0);
      for (const auto& t : trips)
        data[static_cast<std::size_t>(t.r * d + t.c)] += t.v;
      return dense(n, d, std::move(data));
    }
    Matrix m;
    m.n_ = n;
    m.d_ = d;
    m.is_dense_ = false;
    std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.r, a.c) < std::tie(b.r, b.c);
    });
    m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t i = 0; i < trips.size(); ++i) {
      if (i > 0 && trips[i].r == trips[i - 1].r && trips[i].c == trips[i - 1].c) {
        m.vals_.back() += trips[i].v;
        continue;
      }
      m.cols_.push_back(trips[i].c);
      m.vals_.push_back(trips[i].v);
      ++m.row_ptr_[static_cast<std::size_t>(trips[i].r) + 1];
    }
    for (long i = 0; i < n; ++i)
      m.row_ptr_[static_cast<std::size_t>(i) + 1] +=
          m.row_ptr_[static_cast<std::size_t>(i)];
    m.build_csc_();
    m.finish_();
    return m;
  }

  long rows() const { return n_; }
  long cols() const { return d_; }
  bool is_dense() const { return is_dense_; }

  long nnz() const {
    if (!is_dense_) return static_cast<long>(vals_.size());
    long c = 0;
    for (double v : dense_)
      if (v != 0.0) ++c;
    return c;
  }

  double entry(long i, long j) const {
    check_rc_(i, j);
    if (is_dense_) return dense_[static_cast<std::size_t>(i * d_ + j)];
    for (long p = row_ptr_[static_cast<std::size_t>(i)];
         p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
      if (cols_[static_cast<std::size_t>(p)] == j)
        return vals_[static_cast<std::size_t>(p)];
    return 0.0;
  }

  // b - A x convenience lives in system.hpp; here only the raw products
  Vec matvec(std::span<const double> x) const {
    if (static_cast<long>(x.size()) != d_)
      throw DimensionError("matvec: x length != cols");
    Vec out(static_cast<std::size_t>(n_), 0.0);
    if (is_dense_) {
      for (long i = 0; i < n_; ++i) {
        const double* r = &dense_[static_cast<std::size_t>(i * d_)];
        double s = 0.0;
        for (long j = 0; j < d_; ++j) s += r[j] * x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s;
      }
    } else {
      for (long i = 0; i < n_; ++i) {
        double s = 0.0;
        for (long p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
          s += vals_[static_cast<std::size_t>(p)] *
               x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])];
        out[static_cast<std::size_t>(i)] = s;
      }
    }
    return out;
  }

  Vec matvec_t(std::span<const double> v) const {
    if (static_cast<long>(v.size()) != n_)
      throw DimensionError("matvec_t: v length != rows");
    Vec out(static_cast<std::size_t>(d_), 0.0);
    if (is_dense_) {
      for (long i = 0; i < n_; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        const double* r = &dense_[static_cast<std::size_t>(i * d_)];
        for (long j = 0; j < d_; ++j) out[static_cast<std::size_t>(j)] += vi * r[j];
      }
    } else {
      for (long i = 0; i < n_; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        if (vi == 0.0) continue;
        for (long p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
          out[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])] +=
              vi * vals_[static_cast<std::size_t>(p)];
      }
    }
    return out;
  }

  Vec row_copy(long i) const {
    check_rc_(i, 0);
    Vec out(static_cast<std::size_t>(d_), 0.0);
    if (is_dense_) {
      const double* r = &dense_[static_cast<std::size_t>(i * d_)];
      out.assign(r, r + d_);
    } else {
      for (long p = row_ptr_[static_cast<std::size_t>(i)];
           p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
        out[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])] =
            vals_[static_cast<std::size_t>(p)];
    }
    return out;
  }

  Vec col_copy(long j) const {
    check_rc_(0, j);
    Vec out(static_cast<std::size_t>(n_), 0.0);
    if (is_dense_) {
      for (long i = 0; i < n_; ++i)
        out[static_cast<std::size_t>(i)] = dense_[static_cast<std::size_t>(i * d_ + j)];
    } else {
      for (long p = col_ptr_[static_cast<std::size_t>(j)];
           p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p)
        out[static_cast<std::size_t>(csc_rows_[static_cast<std::size_t>(p)])] =
            csc_vals_[static_cast<std::size_t>(p)];
    }
    return out;
  }

  double row_dot(long i, std::span<const double> x) const {
    check_rc_(i, 0);
    if (static_cast<long>(x.size()) != d_) throw DimensionError("row_dot length");
    double s = 0.0;
    if (is_dense_) {
      const double* r = &dense_[static_cast<std::size_t>(i * d_)];
      for (long j = 0; j < d_; ++j) s += r[j] * x[static_cast<std::size_t>(j)];
    } else {
      for (long p = row_ptr_[static_cast<std::size_t>(i)];
           p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
        s += vals_[static_cast<std::size_t>(p)] *
             x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])];
    }
    return s;
  }

  double col_dot(long j, std::span<const double> v) const {
    check_rc_(0, j);
    if (static_cast<long>(v.size()) != n_) throw DimensionError("col_dot length");
    double s = 0.0;
    if (is_dense_) {
      for (long i = 0; i < n_; ++i)
        s += dense_[static_cast<std::size_t>(i * d_ + j)] * v[static_cast<std::size_t>(i)];
    } else {
      for (long p = col_ptr_[static_cast<std::size_t>(j)];
           p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p)
        s += csc_vals_[static_cast<std::size_t>(p)] *
             v[static_cast<std::size_t>(csc_rows_[static_cast<std::size_t>(p)])];
    }
    return s;
  }

  // x += alpha * (row i)
  void add_row_multiple(long i, double alpha, std::span<double> x) const {
    check_rc_(i, 0);
    if (static_cast<long>(x.size()) != d_) throw DimensionError("add_row_multiple");
    if (is_dense_) {
      const double* r = &dense_[static_cast<std::size_t>(i * d_)];
      for (long j = 0; j < d_; ++j) x[static_cast<std::size_t>(j)] += alpha * r[j];
    } else {
      for (long p = row_ptr_[static_cast<std::size_t>(i)];
           p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
        x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])] +=
            alpha * vals_[static_cast<std::size_t>(p)];
    }
  }

  // v += alpha * (column j)
  void add_col_multiple(long j, double alpha, std::span<double> v) const {
    check_rc_(0, j);
    if (static_cast<long>(v.size()) != n_) throw DimensionError("add_col_multiple");
    if (is_dense_) {
      for (long i = 0; i < n_; ++i)
        v[static_cast<std::size_t>(i)] += alpha * dense_[static_cast<std::size_t>(i * d_ + j)];
    } else {
      for (long p = col_ptr_[static_cast<std::size_t>(j)];
           p < col_ptr_[static_cast<std::size_t>(j) + 1]; ++p)
        v[static_cast<std::size_t>(csc_rows_[static_cast<std::size_t>(p)])] +=
            alpha * csc_vals_[static_cast<std::size_t>(p)];
    }
  }

  double row_norm_sq(long i) const {
    check_rc_(i, 0);
    return row_norms_sq_[static_cast<std::size_t>(i)];
  }
  double col_norm_sq(long j) const {
    check_rc_(0, j);
    return col_norms_sq_[static_cast<std::size_t>(j)];
  }
  const Vec& row_norms_sq() const { return row_norms_sq_; }
  const Vec& col_norms_sq() const { return col_norms_sq_; }

  Matrix transposed() const {
    if (is_dense_) {
      Vec data(static_cast<std::size_t>(n_ * d_));
      for (long i = 0; i < n_; ++i)
        for (long j = 0; j < d_; ++j)
          data[static_cast<std::size_t>(j * n_ + i)] =
              dense_[static_cast<std::size_t>(i * d_ + j)];
      return dense(d_, n_, std::move(data));
    }
    std::vector<Triplet> trips;
    trips.reserve(vals_.size());
    for (long i = 0; i < n_; ++i)
      for (long p = row_ptr_[static_cast<std::size_t>(i)];
           p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
        trips.push_back({cols_[static_cast<std::size_t>(p)], i,
                         vals_[static_cast<std::size_t>(p)]});
    return from_triplets(d_, n_, std::move(trips));
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> trips;
    if (is_dense_) {
      for (long i = 0; i < n_; ++i)
        for (long j = 0; j < d_; ++j) {
          const double v = dense_[static_cast<std::size_t>(i * d_ + j)];
          if (v != 0.0) trips.push_back({i, j, v});
        }
    } else {
      for (long i = 0; i < n_; ++i)
        for (long p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p)
          trips.push_back({i, cols_[static_cast<std::size_t>(p)],
                           vals_[static_cast<std::size_t>(p)]});
    }
    return trips;
  }

  const Vec& dense_data() const {
    if (!is_dense_) throw Error("dense_data: matrix stored sparse");
    return dense_;
  }

  bool any_nonzero() const {
    if (is_dense_) {
      for (double v : dense_)
        if (v != 0.0) return true;
      return false;
    }
    for (double v : vals_)
      if (v != 0.0) return true;
    return false;
  }

private:
  void check_rc_(long i, long j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= d_)
      throw DimensionError("matrix index out of range");
  }

  void build_csc_() {
    col_ptr_.assign(static_cast<std::size_t>(d_) + 1, 0);
    for (long c : cols_) ++col_ptr_[static_cast<std::size_t>(c) + 1];
    for (long j = 0; j < d_; ++j)
      col_ptr_[static_cast<std::size_t>(j) + 1] += col_ptr_[static_cast<std::size_t>(j)];
    csc_rows_.resize(vals_.size());
    csc_vals_.resize(vals_.size());
    std::vector<long> next(col_ptr_.begin(), col_ptr_.end() - 1);
    for (long i = 0; i < n_; ++i)
      for (long p = row_ptr_[static_cast<std::size_t>(i)];
           p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
        const long j = cols_[static_cast<std::size_t>(p)];
        const long q = next[static_cast<std::size_t>(j)]++;
        csc_rows_[static_cast<std::size_t>(q)] = i;
        csc_vals_[static_cast<std::size_t>(q)] = vals_[static_cast<std::size_t>(p)];
      }
  }

  void finish_() {
    row_norms_sq_.assign(static_cast<std::size_t>(n_), 0.0);
    col_norms_sq_.assign(static_cast<std::size_t>(d_), 0.0);
    if (is_dense_) {
      for (long i = 0; i < n_; ++i)
        for (long j = 0; j < d_; ++j) {
          const double v = dense_[static_cast<std::size_t>(i * d_ + j)];
          row_norms_sq_[static_cast<std::size_t>(i)] += v * v;
          col_norms_sq_[static_cast<std::size_t>(j)] += v * v;
        }
    } else {
      for (long i = 0; i < n_; ++i)
        for (long p = row_ptr_[static_cast<std::size_t>(i)];
             p < row_ptr_[static_cast<std::size_t>(i) + 1]; ++p) {
          const double v = vals_[static_cast<std::size_t>(p)];
          row_norms_sq_[static_cast<std::size_t>(i)] += v * v;
          col_norms_sq_[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])] +=
              v * v;
        }
    }
  }

  long n_ = 0;
  long d_ = 0;
  bool is_dense_ = true;
  Vec dense_;
  // CSR
  std::vector<long> row_ptr_;
  std::vector<long> cols_;
  Vec vals_;
  // CSC companion, built once
  std::vector<long> col_ptr_;
  std::vector<long> csc_rows_;
  Vec csc_vals_;
  Vec row_norms_sq_;
  Vec col_norms_sq_;
};

}  // namespace arcas
