#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/compensator.hpp"
#include "dyadic/doob.hpp"
#include "dyadic/error.hpp"
#include "dyadic/paths.hpp"
#include "dyadic/real_set.hpp"
#include "dyadic/stopping.hpp"

namespace dyadic {

/// Doob martingales of the singleton indicators. Every martingale on the
/// space is a linear combination of these, so a linear identity in M holds
/// for all martingales iff it holds for each member.
inline std::vector<ProcessPaths> spanning_martingales(const SpacePtr& space) {
  std::vector<ProcessPaths> out;
  for (std::size_t w = 0; w < space->num_outcomes(); ++w) {
    RandomVariable x(space->num_outcomes(), 0.0);
    x[w] = 1.0;
    out.push_back(doob_martingale(space, x));
  }
  return out;
}

namespace detail {

inline void require_martingale(const ProcessPaths& m) {
  const double defect = martingale_defect(m);
  if (defect > kMartingaleTolerance)
    throw Error(ErrorCode::NotMartingale, "martingale defect " + std::to_string(defect));
}

inline void require_increasing_from_zero(const ProcessPaths& a) {
  if (!a.adapted()) throw Error(ErrorCode::NotAdapted, "A is not adapted");
  if (!is_increasing(a)) throw Error(ErrorCode::NotIncreasing, "A is not increasing");
  for (std::size_t w = 0; w < a.num_outcomes(); ++w)
    if (std::abs(a(0, w)) > kTolerance) throw Error(ErrorCode::NonzeroStart, "A_0 must vanish");
}

inline double product_mean(const ProcessPaths& m, const ProcessPaths& a, std::size_t k) {
  double out = 0.0;
  for (std::size_t w = 0; w < a.num_outcomes(); ++w) out += a.space().prob(w) * m(k, w) * a(k, w);
  return out;
}

}  // namespace detail

/// |E[M_n A_n] - E[sum_{k<=n} M_{k-1} (A_k - A_{k-1})]| at master index n.
inline double naturality_defect_discrete(const ProcessPaths& a, const ProcessPaths& m, std::size_t n) {
  check_same_space(a, m);
  a.space().grid().check_index(n);
  detail::require_martingale(m);
  detail::require_increasing_from_zero(a);
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t w = 0; w < a.num_outcomes(); ++w)
      sum += a.space().prob(w) * m(k - 1, w) * (a(k, w) - a(k - 1, w));
  return std::abs(detail::product_mean(m, a, n) - sum);
}

/// Largest discrete naturality defect over the spanning martingales and all
/// horizons.
inline double naturality_defect_over_basis(const ProcessPaths& a) {
  double out = 0.0;
  for (const auto& m : spanning_martingales(a.space_ptr()))
    for (std::size_t n = 0; n < a.num_times(); ++n)
      out = std::max(out, naturality_defect_discrete(a, m, n));
  return out;
}

/// |E[M_1 A_1] - E[int_0^1 M_{s-} dA_s]|.
inline double naturality_defect_continuous(const ProcessPaths& a, const ProcessPaths& m) {
  check_same_space(a, m);
  detail::require_martingale(m);
  detail::require_increasing_from_zero(a);
  const double lhs = detail::product_mean(m, a, a.last_index());
  return std::abs(lhs - expectation(a.space(), stieltjes_left(m, a)));
}

struct AlmostNaturalRow {
  int level = 0;
  /// E[M_1 approx_1]
  double lhs = 0.0;
  /// E[sum over the merged partition of M_- times the increment of approx]
  double rhs = 0.0;
  /// |lhs - rhs|
  double defect = 0.0;
  /// |rhs - E[int_0^1 M_{s-} dA_s]|, the distance to the direct form.
  double gap_to_direct = 0.0;
};

/// The identity E[M_1 A^n_1] = E[sum_pi M_- dA^n] along given dyadic
/// approximations of A, with pi the merge of D_{N_n} and the jump times of M
/// of size at least 1/n.
inline std::vector<AlmostNaturalRow> almost_naturality(const CompensatorApproximation& approx,
                                                       const ProcessPaths& a, const ProcessPaths& m) {
  check_same_space(a, m);
  detail::require_martingale(m);
  detail::require_increasing_from_zero(a);
  const auto& space = a.space_ptr();
  const double direct = expectation(*space, stieltjes_left(m, a));
  std::vector<AlmostNaturalRow> out;
  for (std::size_t i = 0; i < approx.steps.size(); ++i) {
    const DyadicStepProcess& step = approx.steps[i];
    const ProcessPaths path = step.to_paths();
    const double size = 1.0 / static_cast<double>(i + 1);
    const OptionalPartition jumps(exhaust_jumps(m, RealSet::abs_at_least(size)));
    const OptionalPartition pi = merge_optional_partitions(OptionalPartition::dyadic(space, step.level()), jumps);
    AlmostNaturalRow row;
    row.level = step.level();
    row.lhs = detail::product_mean(m, path, path.last_index());
    row.rhs = expectation(*space, optional_partition_sum(m, path, pi));
    row.defect = std::abs(row.lhs - row.rhs);
    row.gap_to_direct = std::abs(row.rhs - direct);
    out.push_back(row);
  }
  return out;
}

inline std::vector<AlmostNaturalRow> almost_naturality(const ProcessPaths& a, const ProcessPaths& m) {
  detail::require_increasing_from_zero(a);
  return almost_naturality(approximate_compensator(a), a, m);
}

/// |E[M_1 A_1] - E[sum_k M_k (A_k - A_{k-1})]|; vanishes for every adapted
/// increasing A.
inline double right_endpoint_identity_defect(const ProcessPaths& a, const ProcessPaths& m) {
  check_same_space(a, m);
  detail::require_martingale(m);
  detail::require_increasing_from_zero(a);
  double sum = 0.0;
  for (std::size_t k = 1; k < a.num_times(); ++k)
    for (std::size_t w = 0; w < a.num_outcomes(); ++w)
      sum += a.space().prob(w) * m(k, w) * (a(k, w) - a(k - 1, w));
  return std::abs(detail::product_mean(m, a, a.last_index()) - sum);
}

inline constexpr double kShadowTolerance = 1e-10;

struct PredictableMartingaleReport {
  bool is_martingale = false;
  bool is_grid_predictable = false;
  double max_abs_jump = 0.0;
  /// A grid-predictable martingale has no jumps.
  bool shadow_holds = true;
};

inline PredictableMartingaleReport predictable_martingale_check(const ProcessPaths& m) {
  PredictableMartingaleReport r;
  r.is_martingale = m.adapted() && martingale_defect(m) <= kMartingaleTolerance;
  r.is_grid_predictable = is_grid_predictable(m, m.space().master_level());
  for (std::size_t k = 1; k < m.num_times(); ++k)
    for (std::size_t w = 0; w < m.num_outcomes(); ++w)
      r.max_abs_jump = std::max(r.max_abs_jump, std::abs(m(k, w) - m(k - 1, w)));
  r.shadow_holds = !(r.is_martingale && r.is_grid_predictable) || r.max_abs_jump <= kShadowTolerance;
  return r;
}

struct SpecialDecomposition {
  ProcessPaths martingale;
  ProcessPaths compensator;
  /// sup_{s <= t} |Delta S_s|
  ProcessPaths jump_sup;
  std::vector<GridStoppingTime> localizers;
};

/// Canonical S = M + A with A grid-predictable and A_0 = 0, together with
/// the running maximal jump and its localizing first-approach times.
inline SpecialDecomposition special_decomposition(const ProcessPaths& s) {
  if (!s.adapted()) throw Error(ErrorCode::NotDecomposable, "S is not adapted");
  for (double v : s.values())
    if (!std::isfinite(v)) throw Error(ErrorCode::NotDecomposable, "S has non-finite values");
  const DoobDecomposition dd = discrete_doob(s, s.space().master_level());
  const std::size_t n = s.num_outcomes();
  std::vector<double> sup(s.values().size(), 0.0);
  for (std::size_t k = 1; k < s.num_times(); ++k)
    for (std::size_t w = 0; w < n; ++w)
      sup[k * n + w] = std::max(sup[(k - 1) * n + w], std::abs(s(k, w) - s(k - 1, w)));
  ProcessPaths jump_sup(s.space_ptr(), std::move(sup));
  auto localizers = localize_bounded(jump_sup, integer_thresholds(jump_sup));
  return {ProcessPaths(s.space_ptr(), dd.martingale), ProcessPaths(s.space_ptr(), dd.compensator),
          std::move(jump_sup), std::move(localizers)};
}

struct AnnouncedTime {
  GridStoppingTime tau;
  std::vector<GridStoppingTime> announcing;
};

struct ContinuityRow {
  double mean_jump_s = 0.0;  // E[Delta S_tau]
  double mean_jump_a = 0.0;  // E[Delta A_tau]
};

inline constexpr double kContinuityTolerance = 1e-10;

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  /// max over k, omega of |Delta A|
  double max_abs_jump_a = 0.0;
  double grid_step = 0.0;
  /// Every announced tau satisfies E[Delta S_tau] = E[Delta A_tau].
  bool identity_holds = true;
  /// Integrability of the localized martingale and variation; automatic on a
  /// finite space.
  bool localization_integrable = true;
};

inline ContinuityReport compensator_continuity_defect(const ProcessPaths& s,
                                                      const std::vector<AnnouncedTime>& taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    check_same_space(s, taus[i].tau);
    if (const auto failure = announcing_failure(taus[i].tau, taus[i].announcing))
      throw Error(ErrorCode::NotAnnounceable, "stopping time " + std::to_string(i) + ": " + *failure);
  }
  const SpecialDecomposition dec = special_decomposition(s);
  const auto& space = s.space();
  ContinuityReport r;
  r.grid_step = std::ldexp(1.0, -space.master_level());
  for (std::size_t k = 1; k < s.num_times(); ++k)
    for (std::size_t w = 0; w < s.num_outcomes(); ++w)
      r.max_abs_jump_a = std::max(r.max_abs_jump_a, std::abs(dec.compensator(k, w) - dec.compensator(k - 1, w)));
  auto mean_jump = [&](const ProcessPaths& p, const GridStoppingTime& tau) {
    return expectation(space, evaluate_at(p, tau, EvalMode::Value) - evaluate_at(p, tau, EvalMode::LeftLimit));
  };
  for (const auto& t : taus) {
    ContinuityRow row{mean_jump(s, t.tau), mean_jump(dec.compensator, t.tau)};
    if (std::abs(row.mean_jump_s - row.mean_jump_a) > kContinuityTolerance) r.identity_holds = false;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace dyadic
