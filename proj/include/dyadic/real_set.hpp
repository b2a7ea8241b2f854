#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace dyadic {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }

  bool contains(double x) const {
    if (x > lo && x < hi) return true;
    return (x == lo && lo_closed) || (x == hi && hi_closed);
  }
};

/// Finite union of real intervals, kept sorted and disjoint. Each member is a
/// countable union of closed sets, which is all jump exhaustion needs; the
/// first-approach construction additionally asks for is_closed().
class RealSet {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  RealSet() = default;
  explicit RealSet(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }

  static RealSet closed(double lo, double hi) { return RealSet({{lo, hi, true, true}}); }
  static RealSet at_least(double a) { return RealSet({{a, kInf, true, false}}); }
  static RealSet at_most(double a) { return RealSet({{-kInf, a, false, true}}); }
  /// {x : |x| >= k}
  static RealSet abs_at_least(double k) {
    return RealSet({{-kInf, -k, false, true}, {k, kInf, true, false}});
  }
  /// (0, infinity)
  static RealSet positive() { return RealSet({{0.0, kInf, false, false}}); }
  /// R \ {0}
  static RealSet nonzero() { return RealSet({{-kInf, 0.0, false, false}, {0.0, kInf, false, false}}); }
  /// Dyadic shell {y : |y| in (2^n, 2^{n+1}]}.
  static RealSet annulus(int n) {
    const double a = std::ldexp(1.0, n);
    const double b = std::ldexp(1.0, n + 1);
    return RealSet({{-b, -a, true, false}, {a, b, false, true}});
  }

  const std::vector<Interval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  bool contains(double x) const {
    return std::any_of(parts_.begin(), parts_.end(), [x](const Interval& i) { return i.contains(x); });
  }

  /// d(x, B) = inf{|x - y| : y in B}; infinite for the empty set.
  double distance(double x) const {
    double out = kInf;
    for (const auto& i : parts_) {
      if (x < i.lo)
        out = std::min(out, i.lo - x);
      else if (x > i.hi)
        out = std::min(out, x - i.hi);
      else
        return 0.0;
    }
    return out;
  }

  /// Every finite endpoint belongs to the set.
  bool is_closed() const {
    return std::all_of(parts_.begin(), parts_.end(), [](const Interval& i) {
      return (std::isinf(i.lo) || i.lo_closed) && (std::isinf(i.hi) || i.hi_closed);
    });
  }

  RealSet intersect(const RealSet& other) const {
    std::vector<Interval> out;
    for (const auto& a : parts_) {
      for (const auto& b : other.parts_) {
        Interval c;
        if (a.lo > b.lo) {
          c.lo = a.lo;
          c.lo_closed = a.lo_closed;
        } else if (b.lo > a.lo) {
          c.lo = b.lo;
          c.lo_closed = b.lo_closed;
        } else {
          c.lo = a.lo;
          c.lo_closed = a.lo_closed && b.lo_closed;
        }
        if (a.hi < b.hi) {
          c.hi = a.hi;
          c.hi_closed = a.hi_closed;
        } else if (b.hi < a.hi) {
          c.hi = b.hi;
          c.hi_closed = b.hi_closed;
        } else {
          c.hi = a.hi;
          c.hi_closed = a.hi_closed && b.hi_closed;
        }
        if (!c.empty()) out.push_back(c);
      }
    }
    return RealSet(std::move(out));
  }

 private:
  void normalize() {
    std::erase_if(parts_, [](const Interval& i) { return i.empty(); });
    std::sort(parts_.begin(), parts_.end(), [](const Interval& a, const Interval& b) {
      if (a.lo != b.lo) return a.lo < b.lo;
      return a.lo_closed && !b.lo_closed;
    });
    std::vector<Interval> merged;
    for (const auto& i : parts_) {
      if (!merged.empty()) {
        Interval& last = merged.back();
        const bool touches = i.lo < last.hi || (i.lo == last.hi && (last.hi_closed || i.lo_closed));
        if (touches) {
          if (i.hi > last.hi) {
            last.hi = i.hi;
            last.hi_closed = i.hi_closed;
          } else if (i.hi == last.hi) {
            last.hi_closed = last.hi_closed || i.hi_closed;
          }
          continue;
        }
      }
      merged.push_back(i);
    }
    parts_ = std::move(merged);
  }

  std::vector<Interval> parts_;
};

}  // namespace dyadic
