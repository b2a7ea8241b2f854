#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/filtered_space.hpp"
#include "dyadic/grid.hpp"

namespace dyadic {

/// Piecewise-constant cadlag paths on the master grid, one per outcome.
/// Value at time t is values(max{k : t_k <= t}); the left limit at t_0 is X_0.
class ProcessPaths {
 public:
  /// `values` is row-major: index k * |Omega| + w.
  ProcessPaths(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw Error(ErrorCode::SpaceMismatch, "null space");
    if (values_.size() != space_->num_times() * space_->num_outcomes())
      throw Error(ErrorCode::SpaceMismatch,
                  "process has " + std::to_string(values_.size()) + " values, expected " +
                      std::to_string(space_->num_times() * space_->num_outcomes()));
    adapted_ = compute_adapted();
  }

  ProcessPaths(SpacePtr space, const std::vector<RandomVariable>& rows)
      : ProcessPaths(space, flatten(*space, rows)) {}

  static ProcessPaths constant(SpacePtr space, double c) {
    const std::size_t n = space->num_times() * space->num_outcomes();
    return ProcessPaths(std::move(space), std::vector<double>(n, c));
  }

  /// Same path on every outcome.
  static ProcessPaths deterministic(SpacePtr space, std::span<const double> path) {
    if (path.size() != space->num_times())
      throw Error(ErrorCode::SpaceMismatch, "deterministic path has wrong length");
    std::vector<double> values;
    values.reserve(space->num_times() * space->num_outcomes());
    for (double v : path)
      for (std::size_t w = 0; w < space->num_outcomes(); ++w) values.push_back(v);
    return ProcessPaths(std::move(space), std::move(values));
  }

  const SpacePtr& space_ptr() const { return space_; }
  const FilteredSpace& space() const { return *space_; }
  std::size_t num_times() const { return space_->num_times(); }
  std::size_t num_outcomes() const { return space_->num_outcomes(); }
  std::size_t last_index() const { return space_->last_index(); }

  double operator()(std::size_t k, std::size_t w) const { return values_[k * num_outcomes() + w]; }

  std::span<const double> row_view(std::size_t k) const {
    space_->grid().check_index(k);
    return std::span<const double>(values_).subspan(k * num_outcomes(), num_outcomes());
  }
  RandomVariable row(std::size_t k) const {
    const auto r = row_view(k);
    return RandomVariable(std::vector<double>(r.begin(), r.end()));
  }
  RandomVariable terminal() const { return row(last_index()); }

  std::vector<double> path(std::size_t w) const {
    std::vector<double> out(num_times());
    for (std::size_t k = 0; k < num_times(); ++k) out[k] = (*this)(k, w);
    return out;
  }

  std::span<const double> values() const { return values_; }
  bool adapted() const { return adapted_; }

  friend ProcessPaths operator+(const ProcessPaths& a, const ProcessPaths& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
  }
  friend ProcessPaths operator-(const ProcessPaths& a, const ProcessPaths& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
  }
  friend ProcessPaths operator*(double c, const ProcessPaths& a) {
    std::vector<double> v(a.values_);
    for (double& x : v) x *= c;
    return ProcessPaths(a.space_, std::move(v));
  }
  friend ProcessPaths operator-(const ProcessPaths& a) { return -1.0 * a; }

 private:
  static std::vector<double> flatten(const FilteredSpace& space,
                                     const std::vector<RandomVariable>& rows) {
    if (rows.size() != space.num_times())
      throw Error(ErrorCode::SpaceMismatch, "process has " + std::to_string(rows.size()) +
                                                " rows, expected " +
                                                std::to_string(space.num_times()));
    std::vector<double> out;
    out.reserve(space.num_times() * space.num_outcomes());
    for (const auto& r : rows) {
      check_outcomes(space, r);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

  template <class Op>
  static ProcessPaths combine(const ProcessPaths& a, const ProcessPaths& b, Op op) {
    if (a.space_ != b.space_)
      throw Error(ErrorCode::SpaceMismatch, "processes live on different spaces");
    std::vector<double> v(a.values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a.values_[i], b.values_[i]);
    return ProcessPaths(a.space_, std::move(v));
  }

  bool compute_adapted() const {
    for (std::size_t k = 0; k < num_times(); ++k) {
      const auto& part = space_->partition(k);
      const double* r = values_.data() + k * num_outcomes();
      for (const auto& block : part.blocks())
        for (std::size_t w : block)
          if (std::abs(r[w] - r[block.front()]) > kTolerance) return false;
    }
    return true;
  }

  SpacePtr space_;
  std::vector<double> values_;
  bool adapted_ = false;
};

/// Marks "never" for a grid stopping time; compares above every grid index.
inline constexpr std::size_t kInfinity = std::numeric_limits<std::size_t>::max();

/// A random master-grid index (or kInfinity). Construction does not require
/// the stopping property; check it with is_stopping_time().
class GridStoppingTime {
 public:
  GridStoppingTime(SpacePtr space, std::vector<std::size_t> index)
      : space_(std::move(space)), index_(std::move(index)) {
    if (!space_) throw Error(ErrorCode::SpaceMismatch, "null space");
    if (index_.size() != space_->num_outcomes())
      throw Error(ErrorCode::SpaceMismatch, "stopping time has wrong outcome count");
    for (std::size_t k : index_)
      if (k != kInfinity) space_->grid().check_index(k);
  }

  static GridStoppingTime deterministic(SpacePtr space, std::size_t k) {
    const std::size_t n = space->num_outcomes();
    return GridStoppingTime(std::move(space), std::vector<std::size_t>(n, k));
  }

  /// Throws NotStoppingTime unless {tau <= t_k} is F_{t_k}-measurable for all k.
  static GridStoppingTime checked(SpacePtr space, std::vector<std::size_t> index) {
    GridStoppingTime t(std::move(space), std::move(index));
    if (!t.is_stopping_time())
      throw Error(ErrorCode::NotStoppingTime, "{tau <= t} is not F_t-measurable");
    return t;
  }

  const SpacePtr& space_ptr() const { return space_; }
  const FilteredSpace& space() const { return *space_; }
  std::size_t size() const { return index_.size(); }
  std::size_t operator[](std::size_t w) const { return index_[w]; }
  bool finite(std::size_t w) const { return index_[w] != kInfinity; }
  std::span<const std::size_t> indices() const { return index_; }

  double time(std::size_t w) const {
    return finite(w) ? space_->grid().time(index_[w]) : std::numeric_limits<double>::infinity();
  }

  bool is_stopping_time() const {
    for (std::size_t k = 0; k < space_->num_times(); ++k) {
      for (const auto& block : space_->partition(k).blocks()) {
        const bool first = index_[block.front()] <= k;
        for (std::size_t w : block)
          if ((index_[w] <= k) != first) return false;
      }
    }
    return true;
  }

  friend bool operator==(const GridStoppingTime& a, const GridStoppingTime& b) {
    return a.space_ == b.space_ && a.index_ == b.index_;
  }

 private:
  SpacePtr space_;
  std::vector<std::size_t> index_;
};

inline GridStoppingTime pointwise_min(const GridStoppingTime& a, const GridStoppingTime& b) {
  std::vector<std::size_t> out(a.size());
  for (std::size_t w = 0; w < a.size(); ++w) out[w] = std::min(a[w], b[w]);
  return GridStoppingTime(a.space_ptr(), std::move(out));
}

inline GridStoppingTime pointwise_max(const GridStoppingTime& a, const GridStoppingTime& b) {
  std::vector<std::size_t> out(a.size());
  for (std::size_t w = 0; w < a.size(); ++w) out[w] = std::max(a[w], b[w]);
  return GridStoppingTime(a.space_ptr(), std::move(out));
}

/// Pointwise increasing finite family of stopping times.
class OptionalPartition {
 public:
  OptionalPartition() = default;

  explicit OptionalPartition(std::vector<GridStoppingTime> members)
      : members_(std::move(members)) {
    for (std::size_t i = 1; i < members_.size(); ++i) {
      if (members_[i].space_ptr() != members_[0].space_ptr())
        throw Error(ErrorCode::SpaceMismatch, "partition members on different spaces");
      for (std::size_t w = 0; w < members_[i].size(); ++w)
        if (members_[i][w] < members_[i - 1][w])
          throw Error(ErrorCode::NotIncreasing,
                      "member " + std::to_string(i) + " below member " + std::to_string(i - 1));
    }
  }

  /// Deterministic partition at the given master indices (sorted ascending).
  static OptionalPartition deterministic(const SpacePtr& space,
                                         std::span<const std::size_t> indices) {
    std::vector<GridStoppingTime> members;
    for (std::size_t k : indices) members.push_back(GridStoppingTime::deterministic(space, k));
    return OptionalPartition(std::move(members));
  }

  /// The level-n dyadics D_n as a deterministic partition.
  static OptionalPartition dyadic(const SpacePtr& space, int level) {
    const auto idx = space->grid().subgrid(level);
    return deterministic(space, idx);
  }

  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  const GridStoppingTime& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<GridStoppingTime>& members() const { return members_; }

  /// pi(omega) as a set of master indices (kInfinity included when attained).
  std::set<std::size_t> value_set(std::size_t w) const {
    std::set<std::size_t> out;
    for (const auto& m : members_) out.insert(m[w]);
    return out;
  }

 private:
  std::vector<GridStoppingTime> members_;
};

inline void check_same_space(const ProcessPaths& p, const GridStoppingTime& t) {
  if (p.space_ptr() != t.space_ptr())
    throw Error(ErrorCode::SpaceMismatch, "process and stopping time on different spaces");
}

inline void check_same_space(const ProcessPaths& a, const ProcessPaths& b) {
  if (a.space_ptr() != b.space_ptr())
    throw Error(ErrorCode::SpaceMismatch, "processes on different spaces");
}

/// X_- : result[k] = X[k-1], result[0] = X[0].
inline ProcessPaths left_limit_process(const ProcessPaths& p) {
  const std::size_t n = p.num_outcomes();
  std::vector<double> v(p.values().begin(), p.values().end());
  for (std::size_t k = p.num_times() - 1; k >= 1; --k)
    for (std::size_t w = 0; w < n; ++w) v[k * n + w] = p(k - 1, w);
  return ProcessPaths(p.space_ptr(), std::move(v));
}

/// Delta X = X - X_-, zero at t_0.
inline ProcessPaths jump_process(const ProcessPaths& p) {
  const std::size_t n = p.num_outcomes();
  std::vector<double> v(p.values().size(), 0.0);
  for (std::size_t k = 1; k < p.num_times(); ++k)
    for (std::size_t w = 0; w < n; ++w) v[k * n + w] = p(k, w) - p(k - 1, w);
  return ProcessPaths(p.space_ptr(), std::move(v));
}

/// var(A)_k = var(A)_{k-1} + |A_k - A_{k-1}|, var(A)_0 = 0.
inline ProcessPaths variation_process(const ProcessPaths& a) {
  const std::size_t n = a.num_outcomes();
  std::vector<double> v(a.values().size(), 0.0);
  for (std::size_t k = 1; k < a.num_times(); ++k)
    for (std::size_t w = 0; w < n; ++w)
      v[k * n + w] = v[(k - 1) * n + w] + std::abs(a(k, w) - a(k - 1, w));
  return ProcessPaths(a.space_ptr(), std::move(v));
}

struct JordanSplit {
  ProcessPaths plus;
  ProcessPaths minus;
};

/// A^{+-} = (var(A) +- A) / 2 for A_0 = 0.
inline JordanSplit jordan_split(const ProcessPaths& a) {
  for (std::size_t w = 0; w < a.num_outcomes(); ++w)
    if (std::abs(a(0, w)) > kTolerance)
      throw Error(ErrorCode::NonzeroStart, "A_0 = " + std::to_string(a(0, w)) + " on outcome " +
                                               std::to_string(w));
  const ProcessPaths var = variation_process(a);
  return {0.5 * (var + a), 0.5 * (var - a)};
}

inline bool is_increasing(const ProcessPaths& p, double tol = kTolerance) {
  for (std::size_t k = 1; k < p.num_times(); ++k)
    for (std::size_t w = 0; w < p.num_outcomes(); ++w)
      if (p(k, w) < p(k - 1, w) - tol) return false;
  return true;
}

/// Per outcome sum_{k>=1} f[k-1] (g[k] - g[k-1]): the integral of f_- against g
/// on (0, 1], exact for grid step paths.
inline RandomVariable stieltjes_left(const ProcessPaths& f, const ProcessPaths& g) {
  check_same_space(f, g);
  if (!is_increasing(g)) throw Error(ErrorCode::NotIncreasing, "integrator is not increasing");
  RandomVariable out(g.num_outcomes(), 0.0);
  for (std::size_t k = 1; k < g.num_times(); ++k)
    for (std::size_t w = 0; w < g.num_outcomes(); ++w)
      out[w] += f(k - 1, w) * (g(k, w) - g(k - 1, w));
  return out;
}

/// Deterministic integrand version.
inline RandomVariable stieltjes_left(std::span<const double> f, const ProcessPaths& g) {
  if (f.size() != g.num_times())
    throw Error(ErrorCode::SpaceMismatch, "integrand path has wrong length");
  return stieltjes_left(ProcessPaths::deterministic(g.space_ptr(), f), g);
}

/// The level-n dyadics as exact times.
inline std::vector<DyadicTime> dyadic_partition(int level) {
  detail::check_level(level);
  std::vector<DyadicTime> out;
  const std::int64_t n = std::int64_t{1} << level;
  for (std::int64_t k = 0; k <= n; ++k) out.emplace_back(k, level);
  return out;
}

/// sum_i f(t_i) (g(t_{i+1}) - g(t_i)) over 0 = t_0 <= ... <= t_m = 1.
template <class F, class G>
double partition_sum(F&& f, G&& g, std::span<const DyadicTime> pi) {
  if (pi.size() < 2) throw Error(ErrorCode::BadPartition, "partition needs at least {0, 1}");
  if (pi.front() != DyadicTime{0, 0} || pi.back() != DyadicTime{1, 0})
    throw Error(ErrorCode::BadPartition, "partition must start at 0 and end at 1");
  for (std::size_t i = 1; i < pi.size(); ++i)
    if (pi[i] < pi[i - 1]) throw Error(ErrorCode::BadPartition, "partition not ordered");
  double out = 0.0;
  for (std::size_t i = 0; i + 1 < pi.size(); ++i) {
    const double a = pi[i].value();
    const double b = pi[i + 1].value();
    out += f(a) * (g(b) - g(a));
  }
  return out;
}

enum class EvalMode { Value, LeftLimit };

/// P at tau (or at tau-); tau = infinity reads the terminal value in both modes.
inline RandomVariable evaluate_at(const ProcessPaths& p, const GridStoppingTime& tau,
                                  EvalMode mode = EvalMode::Value) {
  check_same_space(p, tau);
  RandomVariable out(p.num_outcomes(), 0.0);
  for (std::size_t w = 0; w < p.num_outcomes(); ++w) {
    if (!tau.finite(w)) {
      out[w] = p(p.last_index(), w);
    } else {
      std::size_t k = tau[w];
      if (mode == EvalMode::LeftLimit && k > 0) --k;
      out[w] = p(k, w);
    }
  }
  return out;
}

/// sum_{j>=1} N_{tau_{j-1}} (B_{tau_j} - B_{tau_{j-1}}), pathwise.
inline RandomVariable optional_partition_sum(const ProcessPaths& n, const ProcessPaths& b,
                                             const OptionalPartition& pi) {
  check_same_space(n, b);
  RandomVariable out(n.num_outcomes(), 0.0);
  for (std::size_t j = 1; j < pi.size(); ++j) {
    const RandomVariable n_prev = evaluate_at(n, pi[j - 1]);
    const RandomVariable b_prev = evaluate_at(b, pi[j - 1]);
    const RandomVariable b_next = evaluate_at(b, pi[j]);
    for (std::size_t w = 0; w < out.size(); ++w) out[w] += n_prev[w] * (b_next[w] - b_prev[w]);
  }
  return out;
}

/// The ordered family
///   s_0 ^ h_j,  s_n,  s_n v (h_j ^ s_{n+1}),  s_N,  s_N v h_j
/// whose value set is pi(omega) u pihat(omega) for every omega.
inline OptionalPartition merge_optional_partitions(const OptionalPartition& pi,
                                                   const OptionalPartition& pihat) {
  if (pi.empty()) return pihat;
  if (pihat.empty()) return pi;
  std::vector<GridStoppingTime> out;
  const std::size_t last = pi.size() - 1;
  for (const auto& h : pihat.members()) out.push_back(pointwise_min(pi[0], h));
  for (std::size_t n = 0; n < last; ++n) {
    out.push_back(pi[n]);
    for (const auto& h : pihat.members())
      out.push_back(pointwise_max(pi[n], pointwise_min(h, pi[n + 1])));
  }
  out.push_back(pi[last]);
  for (const auto& h : pihat.members()) out.push_back(pointwise_max(pi[last], h));
  return OptionalPartition(std::move(out));
}

/// x is F_sigma-measurable: constant on each F_{t_k}-block within {sigma = t_k}
/// (the terminal partition on {sigma = infinity}).
inline bool is_measurable_at(const RandomVariable& x, const GridStoppingTime& sigma,
                             double tol = kTolerance) {
  const auto& space = sigma.space();
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
    const std::size_t k = sigma.finite(w) ? sigma[w] : space.last_index();
    const auto key = std::make_pair(sigma[w], space.partition(k).block_of(w));
    const auto [it, inserted] = seen.emplace(key, x[w]);
    if (!inserted && std::abs(it->second - x[w]) > tol) return false;
  }
  return true;
}

/// B = 1_{0} B_0 + sum_n 1_{(s_{n-1}, s_n]} B_{s_n} pathwise, with B_{s_n}
/// F_{s_{n-1}}-measurable and B_0 F_0-measurable.
inline bool is_pi_predictable(const ProcessPaths& b, const OptionalPartition& pi,
                              double tol = kTolerance) {
  const auto& space = b.space();
  if (!is_measurable(space, b.row(0), 0, tol)) return false;
  for (std::size_t n = 1; n < pi.size(); ++n) {
    check_same_space(b, pi[n]);
    if (!is_measurable_at(evaluate_at(b, pi[n]), pi[n - 1], tol)) return false;
  }
  for (std::size_t w = 0; w < b.num_outcomes(); ++w) {
    for (std::size_t k = 1; k < b.num_times(); ++k) {
      double expected = 0.0;
      for (std::size_t n = 1; n < pi.size(); ++n) {
        if (pi[n - 1][w] < k && k <= pi[n][w]) {
          expected = pi[n].finite(w) ? b(pi[n][w], w) : b(b.last_index(), w);
          break;
        }
      }
      if (std::abs(b(k, w) - expected) > tol) return false;
    }
  }
  return true;
}

/// max over k, omega of |E[P_{k+1} | F_{t_k}] - P_k|.
inline double martingale_defect(const ProcessPaths& p) {
  if (!p.adapted()) throw Error(ErrorCode::NotAdapted, "martingale_defect needs an adapted process");
  double out = 0.0;
  for (std::size_t k = 0; k + 1 < p.num_times(); ++k) {
    const RandomVariable ce = conditional_expectation(p.space(), p.row(k + 1), k);
    const auto now = p.row_view(k);
    for (std::size_t w = 0; w < p.num_outcomes(); ++w) out = std::max(out, std::abs(ce[w] - now[w]));
  }
  return out;
}

/// The martingale E[x | F_{t_k}], k = 0..2^N.
inline ProcessPaths doob_martingale(const SpacePtr& space, const RandomVariable& terminal) {
  std::vector<RandomVariable> rows;
  rows.reserve(space->num_times());
  for (std::size_t k = 0; k < space->num_times(); ++k)
    rows.push_back(conditional_expectation(*space, terminal, k));
  return ProcessPaths(space, rows);
}

}  // namespace dyadic
