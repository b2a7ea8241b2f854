#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/paths.hpp"
#include "dyadic/real_set.hpp"

namespace dyadic {

/// inf{t >= 0 : X_t in C or X_{t-} in C} per outcome (X_{0-} = X_0). On the
/// grid the infimum is always attained.
inline GridStoppingTime first_approach_time(const ProcessPaths& x, const RealSet& c) {
  if (!c.is_closed()) throw Error(ErrorCode::NotClosed, "first-approach set must be closed");
  std::vector<std::size_t> out(x.num_outcomes(), kInfinity);
  for (std::size_t w = 0; w < x.num_outcomes(); ++w) {
    for (std::size_t k = 0; k < x.num_times(); ++k) {
      const double left = k == 0 ? x(0, w) : x(k - 1, w);
      if (c.contains(x(k, w)) || c.contains(left)) {
        out[w] = k;
        break;
      }
    }
  }
  return GridStoppingTime(x.space_ptr(), std::move(out));
}

/// inf{t > tau : Delta X_t in F}; requires d(0, F) > 0.
inline GridStoppingTime next_jump_time(const ProcessPaths& x, const RealSet& f,
                                       const GridStoppingTime& tau) {
  check_same_space(x, tau);
  if (!(f.distance(0.0) > 0.0)) throw Error(ErrorCode::ZeroInClosure, "d(0, F) = 0");
  std::vector<std::size_t> out(x.num_outcomes(), kInfinity);
  for (std::size_t w = 0; w < x.num_outcomes(); ++w) {
    if (!tau.finite(w)) continue;
    for (std::size_t k = tau[w] + 1; k < x.num_times(); ++k) {
      if (f.contains(x(k, w) - x(k - 1, w))) {
        out[w] = k;
        break;
      }
    }
  }
  return GridStoppingTime(x.space_ptr(), std::move(out));
}

namespace detail {

inline bool never(const GridStoppingTime& t) {
  for (std::size_t w = 0; w < t.size(); ++w)
    if (t.finite(w)) return false;
  return true;
}

/// sigma_{-1} = 0, sigma_{k+1} = inf{t > sigma_k : Delta X_t in F}.
inline void recursive_jump_times(const ProcessPaths& x, const RealSet& f,
                                 std::vector<GridStoppingTime>& out) {
  GridStoppingTime prev = GridStoppingTime::deterministic(x.space_ptr(), 0);
  for (;;) {
    GridStoppingTime next = next_jump_time(x, f, prev);
    if (never(next)) return;
    out.push_back(next);
    prev = std::move(next);
  }
}

/// n with 2^n < |y| <= 2^{n+1}, computed exactly from the binary exponent.
inline int shell_index(double y) {
  int e = 0;
  const double m = std::frexp(std::abs(y), &e);  // |y| = m 2^e, m in [1/2, 1)
  return m == 0.5 ? e - 2 : e - 1;
}

}  // namespace detail

/// Stopping times whose graphs are pairwise disjoint and cover
/// {(t, omega) : Delta X_t(omega) in F}. With d(0, F) > 0 the sequence is
/// strictly increasing; otherwise F is cut into dyadic shells, each handled
/// by the recursion, and the family is enumerated shell by shell.
inline std::vector<GridStoppingTime> exhaust_jumps(const ProcessPaths& x, const RealSet& f) {
  if (f.contains(0.0)) throw Error(ErrorCode::ZeroInF, "0 must not belong to F");
  std::vector<GridStoppingTime> out;
  if (f.distance(0.0) > 0.0) {
    detail::recursive_jump_times(x, f, out);
    return out;
  }
  // Shells not met by any jump contribute nothing.
  std::set<int> shells;
  for (std::size_t k = 1; k < x.num_times(); ++k)
    for (std::size_t w = 0; w < x.num_outcomes(); ++w) {
      const double jump = x(k, w) - x(k - 1, w);
      if (jump != 0.0 && f.contains(jump)) shells.insert(detail::shell_index(jump));
    }
  for (int n : shells) detail::recursive_jump_times(x, f.intersect(RealSet::annulus(n)), out);
  return out;
}

/// tau_n = inf_{k >= n} sigma_k; the tail beyond the list is its last element.
inline std::vector<GridStoppingTime> announcing_sequence(const std::vector<GridStoppingTime>& sigmas) {
  if (sigmas.empty()) throw Error(ErrorCode::EmptyList, "announcing sequence of nothing");
  std::vector<GridStoppingTime> out(sigmas.begin(), sigmas.end());
  for (std::size_t n = out.size() - 1; n-- > 0;) out[n] = pointwise_min(sigmas[n], out[n + 1]);
  return out;
}

inline constexpr double kMartingaleTolerance = 1e-12;

/// max over the given martingales of |E[M_tau] - E[M_{tau-}]|.
inline double fairness_defect(const GridStoppingTime& tau, const std::vector<ProcessPaths>& martingales,
                              double martingale_tol = kMartingaleTolerance) {
  double out = 0.0;
  for (const auto& m : martingales) {
    const double defect = martingale_defect(m);
    if (defect > martingale_tol)
      throw Error(ErrorCode::NotMartingale, "martingale defect " + std::to_string(defect));
    const double at = expectation(tau.space(), evaluate_at(m, tau, EvalMode::Value));
    const double before = expectation(tau.space(), evaluate_at(m, tau, EvalMode::LeftLimit));
    out = std::max(out, std::abs(at - before));
  }
  return out;
}

/// sigma_k = first approach of X to {|x| >= k}, one per threshold.
inline std::vector<GridStoppingTime> localize_bounded(const ProcessPaths& x,
                                                      const std::vector<double>& thresholds) {
  std::vector<GridStoppingTime> out;
  for (double k : thresholds) out.push_back(first_approach_time(x, RealSet::abs_at_least(k)));
  return out;
}

/// Thresholds 1, 2, ..., up to the first one above sup |X|.
inline std::vector<double> integer_thresholds(const ProcessPaths& x) {
  double sup = 0.0;
  for (double v : x.values()) sup = std::max(sup, std::abs(v));
  std::vector<double> out;
  for (double k = 1.0; k <= std::floor(sup) + 1.0; k += 1.0) out.push_back(k);
  return out;
}

struct StoppingTimeReport {
  bool is_stopping = false;
  bool is_grid_predictable = false;
  /// First master index where {tau <= t_k} fails F_{t_k}-measurability.
  std::optional<std::size_t> stopping_violation;
  /// First master index where {tau <= t_k} fails F_{t_{k-1}}-measurability
  /// (index 0 refers to {tau = 0} against F_0).
  std::optional<std::size_t> predictability_violation;
};

inline StoppingTimeReport classify_stopping_time(const GridStoppingTime& tau) {
  const auto& space = tau.space();
  auto event_measurable = [&](std::size_t event_k, std::size_t partition_k) {
    for (const auto& block : space.partition(partition_k).blocks()) {
      const bool first = tau[block.front()] <= event_k;
      for (std::size_t w : block)
        if ((tau[w] <= event_k) != first) return false;
    }
    return true;
  };
  StoppingTimeReport r;
  for (std::size_t k = 0; k < space.num_times() && !r.stopping_violation; ++k)
    if (!event_measurable(k, k)) r.stopping_violation = k;
  if (!event_measurable(0, 0)) r.predictability_violation = 0;
  for (std::size_t k = 1; k < space.num_times() && !r.predictability_violation; ++k)
    if (!event_measurable(k, k - 1)) r.predictability_violation = k;
  r.is_stopping = !r.stopping_violation;
  r.is_grid_predictable = !r.predictability_violation;
  return r;
}

/// The indicator process 1_{[tau, 1]} on the master grid.
inline ProcessPaths indicator_from(const GridStoppingTime& tau) {
  const auto& space = tau.space();
  const std::size_t n = space.num_outcomes();
  std::vector<double> v(space.num_times() * n, 0.0);
  for (std::size_t w = 0; w < n; ++w)
    if (tau.finite(w))
      for (std::size_t k = tau[w]; k < space.num_times(); ++k) v[k * n + w] = 1.0;
  return ProcessPaths(tau.space_ptr(), std::move(v));
}

/// Pointwise checks of an announcing certificate on the grid: members are
/// increasing stopping times, vanish on {tau = 0}, sit strictly below tau on
/// {tau > 0}, and the last one is the grid predecessor of tau (the terminal
/// index when tau = infinity). Returns a description of the first failure.
inline std::optional<std::string> announcing_failure(const GridStoppingTime& tau,
                                                     const std::vector<GridStoppingTime>& seq) {
  if (seq.empty()) return "empty announcing sequence";
  const auto& space = tau.space();
  if (classify_stopping_time(tau).predictability_violation == std::size_t{0})
    return "{tau = 0} is not F_0-measurable";
  for (std::size_t n = 0; n < seq.size(); ++n) {
    if (seq[n].space_ptr() != tau.space_ptr()) return "announcing member on another space";
    if (!seq[n].is_stopping_time()) return "member " + std::to_string(n) + " is not a stopping time";
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      if (n > 0 && seq[n][w] < seq[n - 1][w]) return "sequence decreases at member " + std::to_string(n);
      if (tau[w] == 0 && seq[n][w] != 0) return "member nonzero on {tau = 0}";
      if (tau[w] > 0 && !(seq[n][w] < tau[w])) return "member not strictly below tau";
    }
  }
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
    if (tau[w] == 0) continue;
    const std::size_t pred = tau.finite(w) ? tau[w] - 1 : space.last_index();
    if (seq.back()[w] != pred) return "last member is not the grid predecessor of tau";
  }
  return std::nullopt;
}

}  // namespace dyadic
