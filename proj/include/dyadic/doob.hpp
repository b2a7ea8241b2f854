#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/filtered_space.hpp"
#include "dyadic/paths.hpp"

namespace dyadic {

/// A level-n predictable step process
///   B = 1_{0} B_0 + sum_{s in D_n \ {0}} 1_{(s - 2^-n, s]} B_s
/// with B_0 F_0-measurable and B_s F_{s - 2^-n}-measurable.
class DyadicStepProcess {
 public:
  /// `values[j]` is B at s = j / 2^level; values[0] is B_0.
  DyadicStepProcess(SpacePtr space, int level, std::vector<RandomVariable> values)
      : space_(std::move(space)), level_(level), values_(std::move(values)) {
    const std::size_t stride = space_->grid().stride(level_);
    if (values_.size() != (std::size_t{1} << level_) + 1)
      throw Error(ErrorCode::SpaceMismatch, "step process at level " + std::to_string(level_) +
                                                " needs " +
                                                std::to_string((1u << level_) + 1) + " values");
    for (const auto& v : values_) check_outcomes(*space_, v);
    if (!is_measurable(*space_, values_[0], 0))
      throw Error(ErrorCode::NotAdapted, "B_0 is not F_0-measurable");
    for (std::size_t j = 1; j < values_.size(); ++j)
      if (!is_measurable(*space_, values_[j], (j - 1) * stride))
        throw Error(ErrorCode::NotAdapted,
                    "B_s at s = " + std::to_string(j) + "/2^" + std::to_string(level_) +
                        " is not F_{s-2^-n}-measurable");
  }

  static DyadicStepProcess zero(SpacePtr space, int level) {
    const std::size_t n = space->num_outcomes();
    return DyadicStepProcess(space, level,
                             std::vector<RandomVariable>((std::size_t{1} << level) + 1,
                                                         RandomVariable(n, 0.0)));
  }

  const SpacePtr& space_ptr() const { return space_; }
  int level() const { return level_; }
  std::size_t steps() const { return values_.size() - 1; }
  const RandomVariable& initial() const { return values_[0]; }
  const RandomVariable& value(std::size_t j) const { return values_[j]; }
  const RandomVariable& terminal() const { return values_.back(); }

  /// Same process written at a finer level.
  DyadicStepProcess refine(int level) const {
    if (level < level_)
      throw Error(ErrorCode::LevelTooHigh, "cannot coarsen a step process");
    const std::size_t ratio = std::size_t{1} << (level - level_);
    std::vector<RandomVariable> v;
    v.reserve((std::size_t{1} << level) + 1);
    v.push_back(values_[0]);
    for (std::size_t j = 1; j < values_.size(); ++j)
      for (std::size_t r = 0; r < ratio; ++r) v.push_back(values_[j]);
    return DyadicStepProcess(space_, level, std::move(v));
  }

  /// Value on the master grid: B_0 at index 0, B_s on (s - 2^-n, s].
  ProcessPaths to_paths() const {
    const std::size_t stride = space_->grid().stride(level_);
    const std::size_t n = space_->num_outcomes();
    std::vector<double> out(space_->num_times() * n);
    for (std::size_t k = 0; k < space_->num_times(); ++k) {
      const std::size_t j = (k + stride - 1) / stride;
      const auto& v = values_[j];
      for (std::size_t w = 0; w < n; ++w) out[k * n + w] = v[w];
    }
    return ProcessPaths(space_, std::move(out));
  }

 private:
  SpacePtr space_;
  int level_;
  std::vector<RandomVariable> values_;
};

/// Convex (or any linear) combination of step processes, written at the
/// finest participating level.
inline DyadicStepProcess combine_steps(const std::vector<const DyadicStepProcess*>& parts,
                                       const std::vector<double>& weights) {
  if (parts.empty()) throw Error(ErrorCode::EmptyList, "no step processes to combine");
  int level = 0;
  for (const auto* p : parts) level = std::max(level, p->level());
  const auto& space = parts.front()->space_ptr();
  const std::size_t count = (std::size_t{1} << level) + 1;
  std::vector<RandomVariable> v(count, RandomVariable(space->num_outcomes(), 0.0));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const DyadicStepProcess fine = parts[i]->refine(level);
    for (std::size_t j = 0; j < count; ++j) v[j] += weights[i] * fine.value(j);
  }
  return DyadicStepProcess(space, level, std::move(v));
}

/// S = M + A along D_n.
struct DoobDecomposition {
  int level = 0;
  std::vector<RandomVariable> martingale;   // M at j / 2^n
  std::vector<RandomVariable> compensator;  // A at j / 2^n
};

/// Discrete-time Doob decomposition of the sampled process (S_t)_{t in D_n}:
///   A_j = sum_{i <= j} E[S_i - S_{i-1} | F_{(i-1)/2^n}],  M = S - A.
inline DoobDecomposition discrete_doob(const ProcessPaths& s, int level) {
  const auto& space = s.space();
  if (level > space.master_level())
    throw Error(ErrorCode::LevelTooHigh, "level " + std::to_string(level) + " above master " +
                                             std::to_string(space.master_level()));
  if (level < 0) throw Error(ErrorCode::OutOfRange, "negative level");
  if (!s.adapted()) throw Error(ErrorCode::NotAdapted, "Doob decomposition needs adapted S");
  const std::size_t stride = space.grid().stride(level);
  const std::size_t steps = std::size_t{1} << level;
  DoobDecomposition dd;
  dd.level = level;
  dd.compensator.emplace_back(space.num_outcomes(), 0.0);
  dd.martingale.push_back(s.row(0));
  for (std::size_t j = 1; j <= steps; ++j) {
    const RandomVariable increment = s.row(j * stride) - s.row((j - 1) * stride);
    RandomVariable a = dd.compensator.back() +
                       conditional_expectation(space, increment, (j - 1) * stride);
    dd.martingale.push_back(s.row(j * stride) - a);
    dd.compensator.push_back(std::move(a));
  }
  return dd;
}

struct ExtendedDoob {
  ProcessPaths martingale;        // E[M_1 | F_t] on the master grid
  DyadicStepProcess compensator;  // A_{k/2^n} on ((k-1)/2^n, k/2^n]
};

inline ExtendedDoob extend_doob(const SpacePtr& space, const DoobDecomposition& dd) {
  return {doob_martingale(space, dd.martingale.back()),
          DyadicStepProcess(space, dd.level, dd.compensator)};
}

/// P_0 is F_0-measurable and P is constant on each level-n interval
/// (s - 2^-n, s] with value F_{s - 2^-n}-measurable.
inline bool is_grid_predictable(const ProcessPaths& p, int level, double tol = kTolerance) {
  const auto& space = p.space();
  const std::size_t stride = space.grid().stride(level);
  if (!is_measurable(space, p.row(0), 0, tol)) return false;
  for (std::size_t right = stride; right < p.num_times(); right += stride) {
    const std::size_t left = right - stride;
    for (std::size_t k = left + 1; k < right; ++k)
      for (std::size_t w = 0; w < p.num_outcomes(); ++w)
        if (std::abs(p(k, w) - p(right, w)) > tol) return false;
    if (!is_measurable(space, p.row(right), left, tol)) return false;
  }
  return true;
}

/// Master-level Doob compensator of a submartingale S:
/// grid-predictable, increasing, A_0 = 0 and S - A a martingale.
inline ProcessPaths exact_compensator(const ProcessPaths& s) {
  if (!s.adapted()) throw Error(ErrorCode::NotAdapted, "compensator needs adapted S");
  const auto& space = s.space();
  for (std::size_t k = 0; k + 1 < s.num_times(); ++k) {
    const RandomVariable ce = conditional_expectation(space, s.row(k + 1), k);
    for (std::size_t w = 0; w < s.num_outcomes(); ++w)
      if (ce[w] < s(k, w) - kTolerance)
        throw Error(ErrorCode::NotSubmartingale,
                    "E[S_{k+1} | F_k] < S_k at k = " + std::to_string(k) + ", outcome " +
                        std::to_string(w));
  }
  const DoobDecomposition dd = discrete_doob(s, space.master_level());
  return ProcessPaths(s.space_ptr(), dd.compensator);
}

}  // namespace dyadic
