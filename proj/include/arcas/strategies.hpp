#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "arcas/engine.hpp"
#include "arcas/errors.hpp"
#include "arcas/rng.hpp"
#include "arcas/system.hpp"
#include "arcas/tolerances.hpp"

namespace arcas {

namespace detail {

inline long side_count(const LinearSystem& sys, Mode mode) {
  return mode == Mode::row_action ? sys.n() : sys.d();
}

inline double index_norm_sq(const LinearSystem& sys, Mode mode, long i) {
  return mode == Mode::row_action ? sys.A.row_norm_sq(i) : sys.A.col_norm_sq(i);
}

inline std::vector<long> nonzero_indices(const LinearSystem& sys, Mode mode) {
  std::vector<long> idx;
  const long m = side_count(sys, mode);
  for (long i = 0; i < m; ++i)
    if (index_norm_sq(sys, mode, i) > 0.0) idx.push_back(i);
  if (idx.empty()) throw SpecError("system has no usable rows/columns");
  return idx;
}

// per-index greedy score: |r_i| over rows, |(A^T r)_j| over columns
inline Vec index_scores(const LinearSystem& sys, Mode mode, const Vec& r) {
  if (mode == Mode::row_action) {
    Vec s(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) s[i] = std::fabs(r[i]);
    return s;
  }
  Vec s = sys.A.matvec_t(r);
  for (auto& v : s) v = std::fabs(v);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------- iid

enum class IidWeights { uniform, rownorm2, custom };

class IidStrategy final : public Strategy {
public:
  IidStrategy(IidWeights kind, Vec custom = {})
      : weights_kind_(kind), custom_(std::move(custom)) {}

  std::string kind() const override { return "iid"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override { return std::nullopt; }
  ModeCompat mode_compat() const override { return ModeCompat::both; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    rng_ = Rng(seed);
    pool_ = detail::nonzero_indices(sys, mode);
    weights_.clear();
    if (weights_kind_ == IidWeights::rownorm2) {
      for (long i : pool_) weights_.push_back(detail::index_norm_sq(sys, mode, i));
    } else if (weights_kind_ == IidWeights::custom) {
      const long m = detail::side_count(sys, mode);
      if (static_cast<long>(custom_.size()) != m)
        throw SpecError("iid weight vector length " + std::to_string(custom_.size()) +
                        " does not match " + std::to_string(m));
      double total = 0.0;
      for (long i = 0; i < m; ++i) {
        const double w = custom_[static_cast<std::size_t>(i)];
        if (w < 0.0) throw SpecError("iid weights must be nonnegative");
        if (w > 0.0 && detail::index_norm_sq(sys, mode, i) == 0.0)
          throw SpecError("iid weight on zero row/column " + std::to_string(i));
        total += w;
      }
      if (total <= 0.0) throw SpecError("iid weights sum to zero");
      pool_.clear();
      for (long i = 0; i < m; ++i)
        if (custom_[static_cast<std::size_t>(i)] > 0.0) {
          pool_.push_back(i);
          weights_.push_back(custom_[static_cast<std::size_t>(i)]);
        }
    }
  }

  Direction select(const LinearSystem&, Mode, const Vec&, const Vec&) override {
    Direction d;
    if (weights_.empty()) {
      d.index = pool_[static_cast<std::size_t>(
          rng_.uniform_below(pool_.size()))];
    } else {
      d.index = pool_[static_cast<std::size_t>(rng_.weighted_index(weights_))];
    }
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<IidStrategy>(*this);
  }

private:
  IidWeights weights_kind_;
  Vec custom_;
  std::vector<long> pool_;
  Vec weights_;
  Rng rng_{0};
};

inline std::unique_ptr<Strategy> make_iid() {
  return std::make_unique<IidStrategy>(IidWeights::uniform);
}
inline std::unique_ptr<Strategy> make_iid_rownorm2() {
  return std::make_unique<IidStrategy>(IidWeights::rownorm2);
}
inline std::unique_ptr<Strategy> make_iid(Vec weights) {
  return std::make_unique<IidStrategy>(IidWeights::custom, std::move(weights));
}

// ------------------------------------------------------------- sketch

// dense Gaussian sketch: w ~ N(0, I) each step
class SketchStrategy final : public Strategy {
public:
  std::string kind() const override { return "sketch"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override { return std::nullopt; }
  ModeCompat mode_compat() const override { return ModeCompat::both; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    rng_ = Rng(seed);
    len_ = detail::side_count(sys, mode);
  }

  Direction select(const LinearSystem&, Mode, const Vec&, const Vec&) override {
    Direction d;
    d.dense = rng_.normal_vector(static_cast<std::size_t>(len_));
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<SketchStrategy>(*this);
  }

private:
  long len_ = 0;
  Rng rng_{0};
};

inline std::unique_ptr<Strategy> make_sketch() {
  return std::make_unique<SketchStrategy>();
}

// ------------------------------------------------------------- cyclic

enum class Reshuffle { never, each_sweep };
// the two ways a cycle can be described: auxiliary state carrying the
// remaining permutation (window 1), or a history window of one full cycle
enum class CyclicWindow { state, cycle };

class CyclicStrategy final : public Strategy {
public:
  CyclicStrategy(std::vector<long> order, Reshuffle reshuffle, CyclicWindow window)
      : explicit_order_(std::move(order)), reshuffle_(reshuffle), window_(window) {}

  std::string kind() const override { return "cyclic"; }
  long declared_N() const override {
    return window_ == CyclicWindow::cycle
               ? std::max<long>(1, static_cast<long>(order_.size()))
               : 1;
  }
  std::optional<double> declared_pi() const override {
    if (window_ == CyclicWindow::cycle) return 1.0;
    return std::nullopt;
  }
  ModeCompat mode_compat() const override { return ModeCompat::both; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    rng_ = Rng(seed);
    if (explicit_order_.empty()) {
      order_ = detail::nonzero_indices(sys, mode);
    } else {
      const long m = detail::side_count(sys, mode);
      for (long i : explicit_order_) {
        if (i < 0 || i >= m)
          throw SpecError("cyclic order index " + std::to_string(i) + " out of range");
        if (detail::index_norm_sq(sys, mode, i) == 0.0)
          throw SpecError("cyclic order references zero row/column " + std::to_string(i));
      }
      order_ = explicit_order_;
    }
    if (order_.empty()) throw SpecError("cyclic order is empty");
    pending_.clear();
    refill_();
  }

  Direction select(const LinearSystem&, Mode, const Vec&, const Vec&) override {
    if (pending_.empty()) refill_();
    Direction d;
    d.index = pending_.front();
    pending_.erase(pending_.begin());
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<CyclicStrategy>(*this);
  }

  StrategyState state() const override {
    StrategyState s;
    s.pending = pending_;
    return s;
  }

private:
  void refill_() {
    pending_ = order_;
    if (reshuffle_ == Reshuffle::each_sweep) rng_.shuffle(pending_);
  }

  std::vector<long> explicit_order_;
  Reshuffle reshuffle_;
  CyclicWindow window_;
  std::vector<long> order_;
  std::vector<long> pending_;
  Rng rng_{0};
};

inline std::unique_ptr<Strategy> make_cyclic(
    std::vector<long> order = {}, Reshuffle reshuffle = Reshuffle::never,
    CyclicWindow window = CyclicWindow::cycle) {
  return std::make_unique<CyclicStrategy>(std::move(order), reshuffle, window);
}

// ------------------------------------------------------------- greedy

enum class GreedyRule { max_abs_residual, max_distance, max_col_residual_distance };

class GreedyStrategy final : public Strategy {
public:
  explicit GreedyStrategy(GreedyRule rule, std::vector<Vec> basis = {})
      : rule_(rule), basis_(std::move(basis)) {}

  std::string kind() const override { return "greedy"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override { return 1.0; }
  ModeCompat mode_compat() const override {
    return rule_ == GreedyRule::max_col_residual_distance ? ModeCompat::column_only
                                                          : ModeCompat::row_only;
  }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t) override {
    if (!basis_.empty()) {
      if (rule_ == GreedyRule::max_distance)
        throw SpecError("max-distance rule works on the rows themselves, not a basis");
      const long want = mode == Mode::row_action ? sys.n() : sys.d();
      for (const auto& h : basis_) {
        if (static_cast<long>(h.size()) != want)
          throw SpecError("greedy basis vector has wrong length");
        if (norm2_sq(h) == 0.0) throw SpecError("greedy basis vector is zero");
      }
      SvdOracle oracle(Matrix::from_rows(basis_));
      if (oracle.rank() != want)
        throw SpecError("greedy basis does not span the space");
    }
  }

  Direction select(const LinearSystem& sys, Mode mode, const Vec&,
                   const Vec& r) override {
    Direction d;
    double best = -1.0;
    if (rule_ == GreedyRule::max_abs_residual && basis_.empty()) {
      for (long i = 0; i < sys.n(); ++i) {
        const double s = std::fabs(r[static_cast<std::size_t>(i)]);
        if (s > best && sys.A.row_norm_sq(i) > 0.0) {
          best = s;
          d.index = i;
        }
      }
    } else if (rule_ == GreedyRule::max_abs_residual) {
      long bi = -1;
      for (long i = 0; i < static_cast<long>(basis_.size()); ++i) {
        const double s = std::fabs(dot(basis_[static_cast<std::size_t>(i)], r));
        if (s > best) {
          best = s;
          bi = i;
        }
      }
      d.dense = basis_[static_cast<std::size_t>(bi)];
    } else if (rule_ == GreedyRule::max_distance) {
      for (long i = 0; i < sys.n(); ++i) {
        const double nsq = sys.A.row_norm_sq(i);
        if (nsq == 0.0) continue;
        const double s = std::fabs(r[static_cast<std::size_t>(i)]) / std::sqrt(nsq);
        if (s > best) {
          best = s;
          d.index = i;
        }
      }
    } else if (basis_.empty()) {
      // |(A^T r)_j| / ||col_j|| over nonzero columns
      const Vec atr = sys.A.matvec_t(r);
      for (long j = 0; j < sys.d(); ++j) {
        const double nsq = sys.A.col_norm_sq(j);
        if (nsq == 0.0) continue;
        const double s = std::fabs(atr[static_cast<std::size_t>(j)]) / std::sqrt(nsq);
        if (s > best) {
          best = s;
          d.index = j;
        }
      }
    } else {
      const Vec atr = sys.A.matvec_t(r);
      long bi = -1;
      for (long i = 0; i < static_cast<long>(basis_.size()); ++i) {
        const Vec& c = basis_[static_cast<std::size_t>(i)];
        const Vec ac = sys.A.matvec(c);
        const double acn = norm2(ac);
        if (acn == 0.0) continue;
        const double s = std::fabs(dot(c, atr)) / acn;
        if (s > best) {
          best = s;
          bi = i;
        }
      }
      if (bi < 0)
        throw ContractViolationError("greedy column basis maps entirely to zero");
      d.dense = basis_[static_cast<std::size_t>(bi)];
    }
    (void)mode;
    if (!d.is_index() && d.dense.empty())
      throw ContractViolationError("greedy rule found no usable candidate");
    // a spanning candidate set cannot score all-zero against a nonzero residual
    if (best == 0.0 && norm2(r) > 0.0)
      throw ContractViolationError("greedy scores all zero with nonzero residual");
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<GreedyStrategy>(*this);
  }

private:
  GreedyRule rule_;
  std::vector<Vec> basis_;
};

inline std::unique_ptr<Strategy> make_greedy(GreedyRule rule,
                                             std::vector<Vec> basis = {}) {
  return std::make_unique<GreedyStrategy>(rule, std::move(basis));
}

// ------------------------------------------------ greedy subset + random

enum class WithinSubset { uniform, residual_weighted };

class GreedySubsetRandomStrategy final : public Strategy {
public:
  GreedySubsetRandomStrategy(long m, WithinSubset within) : m_(m), within_(within) {
    if (m_ < 1) throw SpecError("subset size m must be >= 1");
  }

  std::string kind() const override { return "topm"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override {
    if (within_ == WithinSubset::uniform) return 1.0 / static_cast<double>(m_);
    return 1.0;  // zero-residual candidates carry zero weight
  }
  ModeCompat mode_compat() const override { return ModeCompat::both; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    rng_ = Rng(seed);
    pool_ = detail::nonzero_indices(sys, mode);
    if (m_ > static_cast<long>(pool_.size()))
      throw SpecError("subset size m = " + std::to_string(m_) +
                      " exceeds usable rows/columns (" +
                      std::to_string(pool_.size()) + ")");
  }

  Direction select(const LinearSystem& sys, Mode mode, const Vec&,
                   const Vec& r) override {
    const Vec scores = detail::index_scores(sys, mode, r);
    // top-m by score; ties for the last slot go to the smallest index
    std::vector<long> top = pool_;
    std::stable_sort(top.begin(), top.end(), [&](long a, long b) {
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    top.resize(static_cast<std::size_t>(m_));
    Direction d;
    if (within_ == WithinSubset::uniform) {
      d.index = top[static_cast<std::size_t>(rng_.uniform_below(top.size()))];
    } else {
      Vec w;
      double total = 0.0;
      for (long i : top) {
        w.push_back(scores[static_cast<std::size_t>(i)]);
        total += w.back();
      }
      if (total <= 0.0) {
        d.index = top[static_cast<std::size_t>(rng_.uniform_below(top.size()))];
      } else {
        d.index = top[static_cast<std::size_t>(rng_.weighted_index(w))];
      }
    }
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<GreedySubsetRandomStrategy>(*this);
  }

private:
  long m_;
  WithinSubset within_;
  std::vector<long> pool_;
  Rng rng_{0};
};

inline std::unique_ptr<Strategy> make_greedy_subset_random(
    long m, WithinSubset within = WithinSubset::uniform) {
  return std::make_unique<GreedySubsetRandomStrategy>(m, within);
}

// ------------------------------------------------ random subset + greedy

enum class SubsetSampling { uniform_without_replacement, weighted };

class RandomSubsetGreedyStrategy final : public Strategy {
public:
  RandomSubsetGreedyStrategy(long sample_size, SubsetSampling sampling)
      : q_(sample_size), sampling_(sampling) {
    if (q_ < 1) throw SpecError("sample size must be >= 1");
  }

  std::string kind() const override { return "skm"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override {
    if (sampling_ == SubsetSampling::uniform_without_replacement)
      return static_cast<double>(q_) / static_cast<double>(n_side_);
    return std::nullopt;
  }
  ModeCompat mode_compat() const override { return ModeCompat::both; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    rng_ = Rng(seed);
    pool_ = detail::nonzero_indices(sys, mode);
    n_side_ = detail::side_count(sys, mode);
    if (q_ > static_cast<long>(pool_.size()))
      throw SpecError("sample size " + std::to_string(q_) +
                      " exceeds usable rows/columns (" +
                      std::to_string(pool_.size()) + ")");
    norms_.clear();
    if (sampling_ == SubsetSampling::weighted)
      for (long i : pool_) norms_.push_back(detail::index_norm_sq(sys, mode, i));
  }

  Direction select(const LinearSystem& sys, Mode mode, const Vec&,
                   const Vec& r) override {
    std::vector<long> sample;
    if (sampling_ == SubsetSampling::uniform_without_replacement) {
      const auto picks =
          rng_.sample_without_replacement(static_cast<int>(pool_.size()),
                                          static_cast<int>(q_));
      for (int p : picks) sample.push_back(pool_[static_cast<std::size_t>(p)]);
    } else {
      Vec w = norms_;
      for (long t = 0; t < q_; ++t) {
        const int p = rng_.weighted_index(w);
        sample.push_back(pool_[static_cast<std::size_t>(p)]);
        w[static_cast<std::size_t>(p)] = 0.0;
      }
    }
    const Vec scores = detail::index_scores(sys, mode, r);
    Direction d;
    double best = -1.0;
    for (long i : sample) {
      const double s = scores[static_cast<std::size_t>(i)];
      if (s > best || (s == best && i < d.index)) {
        best = s;
        d.index = i;
      }
    }
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<RandomSubsetGreedyStrategy>(*this);
  }

private:
  long q_;
  SubsetSampling sampling_;
  std::vector<long> pool_;
  Vec norms_;
  long n_side_ = 1;
  Rng rng_{0};
};

inline std::unique_ptr<Strategy> make_random_subset_greedy(
    long sample_size,
    SubsetSampling sampling = SubsetSampling::uniform_without_replacement) {
  return std::make_unique<RandomSubsetGreedyStrategy>(sample_size, sampling);
}

// ------------------------------------------------------------ grouped

using StrategyFactory = std::function<std::unique_ptr<Strategy>()>;

// works one row-group at a time: runs the inner strategy inside the current
// group until the group's residual falls to rho of its entry value (or the
// visit cap), then moves to the next group round-robin
class GroupedStrategy final : public Strategy {
public:
  GroupedStrategy(std::vector<std::vector<long>> groups, StrategyFactory inner,
                  double rho, long max_visits)
      : groups_(std::move(groups)), inner_factory_(std::move(inner)), rho_(rho),
        max_visits_(max_visits) {
    if (rho_ <= 0.0 || rho_ >= 1.0) throw SpecError("rho must lie in (0,1)");
    if (!inner_factory_) throw SpecError("grouped strategy needs an inner factory");
  }

  GroupedStrategy(const GroupedStrategy& o)
      : groups_(o.groups_), inner_factory_(o.inner_factory_), rho_(o.rho_),
        max_visits_(o.max_visits_), subsystems_(o.subsystems_), cg_(o.cg_),
        entry_res_(o.entry_res_), visits_(o.visits_), floor_(o.floor_) {
    for (const auto& s : o.inners_) inners_.push_back(s->clone());
  }

  std::string kind() const override { return "grouped"; }
  long declared_N() const override { return 1; }
  std::optional<double> declared_pi() const override { return std::nullopt; }
  ModeCompat mode_compat() const override { return ModeCompat::row_only; }

  void reset(const LinearSystem& sys, Mode mode, std::uint64_t seed) override {
    if (mode != Mode::row_action)
      throw SpecError("grouped strategy is row-action only");
    validate_partition_(sys);
    if (max_visits_ <= 0) {
      std::size_t largest = 0;
      for (const auto& g : groups_) largest = std::max(largest, g.size());
      max_visits_ = 10 * static_cast<long>(largest);
    }
    build_subsystems_(sys);
    inners_.clear();
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      inners_.push_back(inner_factory_());
      inners_.back()->reset(*subsystems_[g], Mode::row_action,
                            derive_seed(seed, g + 1));
    }
    cg_ = -1;
    entry_res_ = -1.0;
    visits_ = 0;
    floor_ = kAbsNoiseFloor * (1.0 + norm2(sys.b));
  }

  Direction select(const LinearSystem& sys, Mode mode, const Vec& x,
                   const Vec& r) override {
    (void)sys;
    const long G = static_cast<long>(groups_.size());
    auto group_res = [&](long g) {
      double s = 0.0;
      for (long i : groups_[static_cast<std::size_t>(g)])
        s += r[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
      return std::sqrt(s);
    };

    bool need_switch = cg_ < 0;
    if (!need_switch) {
      const double rg = group_res(cg_);
      need_switch = rg <= std::max(rho_ * entry_res_, floor_) || visits_ >= max_visits_;
    }
    if (need_switch) {
      long next = cg_ < 0 ? 0 : (cg_ + 1) % G;
      for (long tries = 0; tries < G; ++tries) {
        if (group_res(next) > floor_) break;
        next = (next + 1) % G;  // all quiet: land wherever the scan ends
      }
      cg_ = next;
      entry_res_ = group_res(cg_);
      visits_ = 0;
    }
    ++visits_;

    const auto& rows = groups_[static_cast<std::size_t>(cg_)];
    Vec sub_r(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      sub_r[i] = r[static_cast<std::size_t>(rows[i])];
    Direction local = inners_[static_cast<std::size_t>(cg_)]->select(
        *subsystems_[static_cast<std::size_t>(cg_)], mode, x, sub_r);
    Direction d;
    d.group = static_cast<int>(cg_);
    if (local.is_index()) {
      d.index = rows[static_cast<std::size_t>(local.index)];
    } else {
      d.dense.assign(r.size(), 0.0);
      for (std::size_t i = 0; i < rows.size(); ++i)
        d.dense[static_cast<std::size_t>(rows[i])] = local.dense[i];
    }
    return d;
  }

  std::unique_ptr<Strategy> clone() const override {
    return std::make_unique<GroupedStrategy>(*this);
  }

  StrategyState state() const override {
    StrategyState s;
    s.group = static_cast<int>(cg_);
    s.group_entry_residual = entry_res_;
    s.group_visits = visits_;
    return s;
  }

private:
  void validate_partition_(const LinearSystem& sys) {
    std::vector<char> seen(static_cast<std::size_t>(sys.n()), 0);
    if (groups_.empty()) throw SpecError("grouped strategy needs at least one group");
    for (const auto& g : groups_) {
      if (g.empty()) throw SpecError("grouped strategy has an empty group");
      for (long i : g) {
        if (i < 0 || i >= sys.n())
          throw SpecError("group row index " + std::to_string(i) + " out of range");
        if (seen[static_cast<std::size_t>(i)])
          throw SpecError("group row index " + std::to_string(i) + " repeated");
        seen[static_cast<std::size_t>(i)] = 1;
      }
    }
    for (long i = 0; i < sys.n(); ++i)
      if (!seen[static_cast<std::size_t>(i)])
        throw SpecError("groups do not cover row " + std::to_string(i));
  }

  void build_subsystems_(const LinearSystem& sys) {
    subsystems_.clear();
    for (const auto& g : groups_) {
      std::vector<Vec> rows;
      Vec b;
      for (long i : g) {
        rows.push_back(sys.A.row_copy(i));
        b.push_back(sys.b[static_cast<std::size_t>(i)]);
      }
      auto sub = std::make_shared<LinearSystem>();
      sub->A = Matrix::from_rows(rows);
      sub->b = std::move(b);
      // row subsets of a consistent system stay consistent; skip the oracle
      sub->consistency_checked = sys.consistency_checked;
      sub->kind = sys.kind;
      subsystems_.push_back(std::move(sub));
    }
  }

  std::vector<std::vector<long>> groups_;
  StrategyFactory inner_factory_;
  double rho_;
  long max_visits_;
  std::vector<std::shared_ptr<LinearSystem>> subsystems_;
  std::vector<std::unique_ptr<Strategy>> inners_;
  long cg_ = -1;
  double entry_res_ = -1.0;
  long visits_ = 0;
  double floor_ = 0.0;
};

inline std::unique_ptr<Strategy> make_grouped(std::vector<std::vector<long>> groups,
                                              StrategyFactory inner, double rho = 0.5,
                                              long max_visits = 0) {
  return std::make_unique<GroupedStrategy>(std::move(groups), std::move(inner), rho,
                                           max_visits);
}

// groups taken from the system's own partition metadata
inline std::vector<std::vector<long>> groups_of(const LinearSystem& sys) {
  if (sys.num_groups <= 0 || sys.row_group.empty())
    throw SpecError("system carries no group partition");
  std::vector<std::vector<long>> groups(static_cast<std::size_t>(sys.num_groups));
  for (long i = 0; i < sys.n(); ++i)
    groups[static_cast<std::size_t>(sys.row_group[static_cast<std::size_t>(i)])]
        .push_back(i);
  return groups;
}

// ------------------------------------------- spec-string construction

// grammar: kind[:param=value,...]; list-valued params use '+' separators
inline std::unique_ptr<Strategy> parse_strategy(const std::string& spec,
                                                const LinearSystem& sys,
                                                Mode mode) {
  std::string kind = spec;
  std::string params;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    kind = spec.substr(0, colon);
    params = spec.substr(colon + 1);
  }
  std::vector<std::pair<std::string, std::string>> kv;
  std::size_t pos = 0;
  while (pos < params.size()) {
    auto comma = params.find(',', pos);
    if (comma == std::string::npos) comma = params.size();
    const std::string item = params.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("strategy parameter '" + item + "' is not key=value");
    kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    for (auto it = kv.begin(); it != kv.end(); ++it)
      if (it->first == key) {
        auto v = it->second;
        kv.erase(it);
        return v;
      }
    return std::nullopt;
  };
  auto to_long = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const long out = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "' wants an integer, got '" + v + "'");
    }
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + key + "' wants a real number, got '" + v + "'");
    }
  };

  std::unique_ptr<Strategy> out;
  try {
    if (kind == "iid") {
      const auto w = take("weights").value_or("uniform");
      if (w == "uniform") out = make_iid();
      else if (w == "rownorm2") out = make_iid_rownorm2();
      else throw ConfigError("parameter 'weights' must be uniform or rownorm2, got '" + w + "'");
    } else if (kind == "sketch") {
      out = make_sketch();
    } else if (kind == "cyclic") {
      std::vector<long> order;
      if (const auto o = take("order")) {
        std::size_t p = 0;
        while (p < o->size()) {
          auto plus = o->find('+', p);
          if (plus == std::string::npos) plus = o->size();
          order.push_back(to_long("order", o->substr(p, plus - p)));
          p = plus + 1;
        }
      }
      const auto rs = take("reshuffle").value_or("never");
      Reshuffle reshuffle;
      if (rs == "never") reshuffle = Reshuffle::never;
      else if (rs == "sweep" || rs == "each-sweep") reshuffle = Reshuffle::each_sweep;
      else throw ConfigError("parameter 'reshuffle' must be never or sweep, got '" + rs + "'");
      const auto en = take("encaps").value_or("cycle");
      CyclicWindow window;
      if (en == "cycle" || en == "window") window = CyclicWindow::cycle;
      else if (en == "1" || en == "state") window = CyclicWindow::state;
      else throw ConfigError("parameter 'encaps' must be cycle or 1, got '" + en + "'");
      out = make_cyclic(std::move(order), reshuffle, window);
    } else if (kind == "greedy") {
      const auto rule = take("rule").value_or("maxres");
      if (rule == "maxres") out = make_greedy(GreedyRule::max_abs_residual);
      else if (rule == "maxdist") out = make_greedy(GreedyRule::max_distance);
      else if (rule == "maxcol") out = make_greedy(GreedyRule::max_col_residual_distance);
      else throw ConfigError("parameter 'rule' must be maxres, maxdist or maxcol, got '" + rule + "'");
    } else if (kind == "topm") {
      const long m = to_long("m", take("m").value_or("10"));
      if (m < 1) throw ConfigError("parameter 'm' must be >= 1, got " + std::to_string(m));
      const auto within = take("within").value_or("uniform");
      if (within == "uniform")
        out = make_greedy_subset_random(m, WithinSubset::uniform);
      else if (within == "weighted" || within == "residual-weighted")
        out = make_greedy_subset_random(m, WithinSubset::residual_weighted);
      else throw ConfigError("parameter 'within' must be uniform or weighted, got '" + within + "'");
    } else if (kind == "skm") {
      const long q = to_long("sample", take("sample").value_or(
                                            std::to_string(std::max<long>(
                                                1, detail::side_count(sys, mode) / 4))));
      if (q < 1) throw ConfigError("parameter 'sample' must be >= 1, got " + std::to_string(q));
      const auto s = take("sampling").value_or("uniform");
      if (s == "uniform")
        out = make_random_subset_greedy(q, SubsetSampling::uniform_without_replacement);
      else if (s == "weighted")
        out = make_random_subset_greedy(q, SubsetSampling::weighted);
      else throw ConfigError("parameter 'sampling' must be uniform or weighted, got '" + s + "'");
    } else if (kind == "grouped") {
      std::vector<std::vector<long>> groups;
      if (const auto g = take("g")) {
        const long G = to_long("g", *g);
        if (G < 1) throw ConfigError("parameter 'g' must be >= 1, got " + std::to_string(G));
        if (G > sys.n()) throw ConfigError("parameter 'g' exceeds row count");
        const auto of = detail::contiguous_groups(sys.n(), G);
        groups.resize(static_cast<std::size_t>(G));
        for (long i = 0; i < sys.n(); ++i)
          groups[static_cast<std::size_t>(of[static_cast<std::size_t>(i)])].push_back(i);
      } else {
        groups = groups_of(sys);
      }
      const double rho = to_double("rho", take("rho").value_or("0.5"));
      if (rho <= 0.0 || rho >= 1.0)
        throw ConfigError("parameter 'rho' must lie in (0,1)");
      const long max_visits = to_long("max_visits", take("max_visits").value_or("0"));
      const auto inner = take("inner").value_or("cyclic");
      StrategyFactory factory;
      if (inner == "cyclic") factory = [] { return make_cyclic(); };
      else if (inner == "iid") factory = [] { return make_iid(); };
      else throw ConfigError("parameter 'inner' must be cyclic or iid, got '" + inner + "'");
      out = make_grouped(std::move(groups), std::move(factory), rho, max_visits);
    } else {
      throw ConfigError("unknown strategy kind '" + kind + "'");
    }
  } catch (const SpecError& e) {
    throw ConfigError(std::string("strategy '") + spec + "': " + e.what());
  }
  if (!kv.empty())
    throw ConfigError("unknown parameter '" + kv.front().first + "' for strategy '" +
                      kind + "'");
  return out;
}

// every shipped strategy, with parameters valid for the given system
inline std::vector<std::string> builtin_strategy_specs(const LinearSystem& sys,
                                                       Mode mode) {
  const long m = detail::side_count(sys, mode);
  const long topm = std::min<long>(5, m);
  const long sample = std::min<long>(3, m);
  std::vector<std::string> specs = {
      "iid",
      "iid:weights=rownorm2",
      "sketch",
      "cyclic",
      "cyclic:reshuffle=sweep",
      "topm:m=" + std::to_string(topm),
      "topm:m=" + std::to_string(topm) + ",within=weighted",
      "skm:sample=" + std::to_string(sample),
  };
  if (mode == Mode::row_action) {
    specs.push_back("greedy:rule=maxres");
    specs.push_back("greedy:rule=maxdist");
    specs.push_back("grouped:g=" + std::to_string(std::min<long>(2, sys.n())));
  } else {
    specs.push_back("greedy:rule=maxcol");
  }
  return specs;
}

// the subset of the above carrying an exploration guarantee
inline std::vector<std::string> builtin_exploratory_specs(const LinearSystem& sys,
                                                          Mode mode) {
  auto specs = builtin_strategy_specs(sys, mode);
  std::erase_if(specs, [](const std::string& s) {
    return s.rfind("grouped", 0) == 0;
  });
  return specs;
}

}  // namespace arcas
