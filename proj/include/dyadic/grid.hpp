#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dyadic/error.hpp"

namespace dyadic {

inline constexpr int kMaxLevel = 30;

/// The binary rational numerator / 2^level. Arithmetic on these is exact.
class DyadicTime {
 public:
  constexpr DyadicTime() = default;
  constexpr DyadicTime(std::int64_t numerator, int level)
      : numerator_(numerator), level_(level) {}

  constexpr std::int64_t numerator() const { return numerator_; }
  constexpr int level() const { return level_; }

  double value() const { return std::ldexp(static_cast<double>(numerator_), -level_); }

  /// Numerator when written over 2^level; the value must lie on that grid.
  std::int64_t numerator_at(int level) const {
    if (level >= level_) return numerator_ << (level - level_);
    const int shift = level_ - level;
    if (numerator_ % (std::int64_t{1} << shift) != 0)
      throw Error(ErrorCode::OutOfRange, "time " + std::to_string(value()) +
                                             " is not on level " + std::to_string(level));
    return numerator_ >> shift;
  }

  friend std::strong_ordering operator<=>(const DyadicTime& a, const DyadicTime& b) {
    const int l = a.level_ > b.level_ ? a.level_ : b.level_;
    return a.numerator_at(l) <=> b.numerator_at(l);
  }
  friend bool operator==(const DyadicTime& a, const DyadicTime& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  std::int64_t numerator_ = 0;
  int level_ = 0;
};

/// Master grid {k / 2^N : k = 0..2^N} on the unit interval.
class DyadicGrid {
 public:
  explicit DyadicGrid(int master_level) : master_level_(master_level) {
    if (master_level < 1 || master_level > kMaxLevel)
      throw Error(ErrorCode::OutOfRange,
                  "master level " + std::to_string(master_level) + " outside [1, 30]");
  }

  int master_level() const { return master_level_; }
  std::size_t steps() const { return std::size_t{1} << master_level_; }
  std::size_t size() const { return steps() + 1; }

  DyadicTime at(std::size_t k) const {
    check_index(k);
    return {static_cast<std::int64_t>(k), master_level_};
  }
  double time(std::size_t k) const { return at(k).value(); }

  /// Master index of a time on the grid.
  std::size_t index_of(DyadicTime t) const {
    const auto k = t.numerator_at(master_level_);
    if (k < 0 || static_cast<std::size_t>(k) > steps())
      throw Error(ErrorCode::IndexOutOfGrid, "time " + std::to_string(t.value()) + " outside [0,1]");
    return static_cast<std::size_t>(k);
  }

  /// Master index of the exact binary rational `t`; throws if `t` is off grid.
  std::size_t index_of(double t) const {
    const double scaled = std::ldexp(t, master_level_);
    if (!(t >= 0.0 && t <= 1.0) || scaled != std::floor(scaled))
      throw Error(ErrorCode::IndexOutOfGrid, "time " + std::to_string(t) + " is not a grid point");
    return static_cast<std::size_t>(scaled);
  }

  /// Master indices of the level-n subgrid D_n.
  std::vector<std::size_t> subgrid(int level) const {
    if (level < 0 || level > master_level_)
      throw Error(ErrorCode::LevelTooHigh, "level " + std::to_string(level) +
                                               " above master level " +
                                               std::to_string(master_level_));
    const std::size_t stride = std::size_t{1} << (master_level_ - level);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= steps(); k += stride) out.push_back(k);
    return out;
  }

  /// Number of master steps per level-n step.
  std::size_t stride(int level) const {
    if (level < 0 || level > master_level_)
      throw Error(ErrorCode::LevelTooHigh, "level " + std::to_string(level) +
                                               " above master level " +
                                               std::to_string(master_level_));
    return std::size_t{1} << (master_level_ - level);
  }

  void check_index(std::size_t k) const {
    if (k > steps())
      throw Error(ErrorCode::IndexOutOfGrid,
                  "index " + std::to_string(k) + " outside grid of " + std::to_string(size()));
  }

 private:
  int master_level_;
};

namespace detail {

inline void check_level(int n) {
  if (n < 0 || n > 62) throw Error(ErrorCode::OutOfRange, "level " + std::to_string(n));
}

}  // namespace detail

/// max{ s in D_n : s < a } for a in (0, 1].
inline DyadicTime grid_predecessor(double a, int n) {
  detail::check_level(n);
  if (!(a > 0.0 && a <= 1.0))
    throw Error(ErrorCode::OutOfRange, "predecessor needs a in (0,1], got " + std::to_string(a));
  const double k = std::ceil(std::ldexp(a, n)) - 1.0;
  return {static_cast<std::int64_t>(k), n};
}

/// min{ t in D_n : t >= a } for a in [0, 1].
inline DyadicTime grid_successor(double a, int n) {
  detail::check_level(n);
  if (!(a >= 0.0 && a <= 1.0))
    throw Error(ErrorCode::OutOfRange, "successor needs a in [0,1], got " + std::to_string(a));
  return {static_cast<std::int64_t>(std::ceil(std::ldexp(a, n))), n};
}

inline DyadicTime grid_predecessor(DyadicTime a, int n) {
  detail::check_level(n);
  if (a.numerator() <= 0 || a > DyadicTime{1, 0})
    throw Error(ErrorCode::OutOfRange, "predecessor needs a in (0,1]");
  if (n >= a.level()) return {a.numerator_at(n) - 1, n};
  const std::int64_t step = std::int64_t{1} << (a.level() - n);
  return {(a.numerator() - 1) / step, n};
}

inline DyadicTime grid_successor(DyadicTime a, int n) {
  detail::check_level(n);
  if (a.numerator() < 0 || a > DyadicTime{1, 0})
    throw Error(ErrorCode::OutOfRange, "successor needs a in [0,1]");
  if (n >= a.level()) return {a.numerator_at(n), n};
  const std::int64_t step = std::int64_t{1} << (a.level() - n);
  return {(a.numerator() + step - 1) / step, n};
}

}  // namespace dyadic
