#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/filtered_space.hpp"

namespace dyadic {

/// Convex weights lambda_start .. lambda_end over sequence positions.
struct ConvexWeights {
  std::size_t start = 0;
  std::vector<double> weights;

  std::size_t end() const { return start + weights.size() - 1; }
};

namespace detail {

/// Evidence of convergence on a finite sequence of errors: either the last
/// error vanishes, or the errors on the second half are at most half the
/// largest error overall.
inline bool converges_on_tail(const std::vector<double>& errors, double tol) {
  if (errors.empty()) return true;
  if (errors.back() <= tol) return true;
  const double all = *std::max_element(errors.begin(), errors.end());
  const double tail = *std::max_element(errors.begin() + errors.size() / 2, errors.end());
  return tail <= 0.5 * all + tol;
}

/// Greedy subsequence of positions with errors[n_i] <= 2^-(i+1).
inline std::vector<std::size_t> prune_geometric(const std::vector<double>& errors,
                                                const std::vector<std::size_t>& positions,
                                                double tol) {
  std::vector<std::size_t> out;
  for (std::size_t p : positions)
    if (errors[p] <= std::ldexp(1.0, -static_cast<int>(out.size() + 1)) + tol) out.push_back(p);
  return out;
}

}  // namespace detail

struct ConvexCombinationResult {
  /// weights[n] is forward-looking: it starts at position n.
  std::vector<ConvexWeights> weights;
  std::vector<RandomVariable> combined;
  RandomVariable limit;
  /// ||combined_n - limit||_1 <= 2^-(n+1) for every position n >= certified_from.
  std::size_t certified_from = 0;
  bool used_fallback = false;
  /// Positions selected by the fallback.
  std::vector<std::size_t> selected;
};

/// Forward convex combinations of a finite sequence converging in L^1.
///
/// The sequence itself is kept when its L^1 distances to the last term never
/// increase; failing that, the tail averages mean(seq[n..]) are kept under the
/// same test. Otherwise
/// positions are selected by coordinate bisection toward an accumulation
/// point, keeping at each step the half that holds the deepest term, and each
/// weight is a Dirac mass on the next selected position.
inline ConvexCombinationResult forward_convex_combinations(const FilteredSpace& space,
                                                           const std::vector<RandomVariable>& seq,
                                                           double tol = kTolerance) {
  if (seq.empty()) throw Error(ErrorCode::EmptyList, "no sequence to combine");
  for (const auto& x : seq) {
    check_outcomes(space, x);
    for (double v : x)
      if (!std::isfinite(v)) throw Error(ErrorCode::NoAccumulationPoint, "non-finite term");
  }
  const std::size_t len = seq.size();
  ConvexCombinationResult r;

  auto finish = [&](ConvexCombinationResult& res) {
    std::vector<double> gaps;
    for (const auto& c : res.combined) gaps.push_back(l1_norm(space, c - res.limit));
    res.certified_from = gaps.size();
    while (res.certified_from > 0 &&
           gaps[res.certified_from - 1] <= std::ldexp(1.0, -static_cast<int>(res.certified_from)) + tol)
      --res.certified_from;
  };

  // Non-increasing L^1 distances to the last term.
  auto cauchy = [&](const std::vector<RandomVariable>& c) {
    double previous = l1_norm(space, c[0] - c.back());
    for (std::size_t n = 1; n < c.size(); ++n) {
      const double gap = l1_norm(space, c[n] - c.back());
      if (gap > previous + tol) return false;
      previous = gap;
    }
    return true;
  };
  if (cauchy(seq)) {
    for (std::size_t n = 0; n < len; ++n) r.weights.push_back({n, {1.0}});
    r.combined = seq;
    r.limit = seq.back();
    finish(r);
    return r;
  }
  RandomVariable tail_sum(space.num_outcomes(), 0.0);
  std::vector<RandomVariable> averages(len, tail_sum);
  for (std::size_t n = len; n-- > 0;) {
    tail_sum += seq[n];
    averages[n] = (1.0 / static_cast<double>(len - n)) * tail_sum;
  }
  if (cauchy(averages)) {
    for (std::size_t n = 0; n < len; ++n)
      r.weights.push_back({n, std::vector<double>(len - n, 1.0 / static_cast<double>(len - n))});
    r.combined = std::move(averages);
    r.limit = seq.back();
    finish(r);
    return r;
  }

  std::vector<std::size_t> candidates(len);
  for (std::size_t n = 0; n < len; ++n) candidates[n] = n;
  const RandomVariable& deepest = seq.back();
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
    double lo = seq[candidates.front()][w];
    double hi = lo;
    for (std::size_t n : candidates) {
      lo = std::min(lo, seq[n][w]);
      hi = std::max(hi, seq[n][w]);
    }
    for (int depth = 0; depth < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++depth) {
      const double mid = 0.5 * (lo + hi);
      const bool upper = deepest[w] > mid;
      std::vector<std::size_t> kept;
      for (std::size_t n : candidates)
        if ((seq[n][w] > mid) == upper) kept.push_back(n);
      candidates = std::move(kept);
      (upper ? lo : hi) = mid;
    }
  }
  r.used_fallback = true;
  r.selected = candidates;
  r.limit = deepest;
  for (std::size_t n = 0; n < len; ++n) {
    const auto next = std::lower_bound(candidates.begin(), candidates.end(), n);
    if (next == candidates.end()) break;
    ConvexWeights cw{n, std::vector<double>(*next - n + 1, 0.0)};
    cw.weights.back() = 1.0;
    r.weights.push_back(std::move(cw));
    r.combined.push_back(seq[*next]);
  }
  finish(r);
  return r;
}

struct DominatedSubsequence {
  std::vector<std::size_t> indices;
  RandomVariable dominating;  // h
};

/// Given 0 <= f^n <= g^n, g^n -> g in L^1, E f^n -> E f and f^n -> f pointwise,
/// select positions n_i with ||g^{n_i} - g||_1 <= 2^-i and return them with
/// h = g + sum_i |g^{n_i} - g|, which dominates every f^{n_i}.
///
/// Convergence hypotheses are judged on the finite tail (see
/// detail::converges_on_tail); failures raise HypothesisViolated naming the
/// broken condition. `positions` restricts the search (all positions when empty).
inline DominatedSubsequence select_dominated_subsequence(
    const FilteredSpace& space, const RandomVariable& f, const RandomVariable& g,
    const std::vector<RandomVariable>& fseq, const std::vector<RandomVariable>& gseq,
    std::vector<std::size_t> positions = {}, double tol = kTolerance) {
  if (fseq.size() != gseq.size())
    throw Error(ErrorCode::HypothesisViolated, "f^n and g^n have different lengths");
  if (fseq.empty()) throw Error(ErrorCode::EmptyList, "empty sequence");
  if (positions.empty())
    for (std::size_t n = 0; n < fseq.size(); ++n) positions.push_back(n);
  check_outcomes(space, f);
  check_outcomes(space, g);

  for (std::size_t n : positions) {
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      if (fseq[n][w] < -tol || fseq[n][w] > gseq[n][w] + tol)
        throw Error(ErrorCode::HypothesisViolated,
                    "0 <= f^n <= g^n fails at position " + std::to_string(n) + ", outcome " +
                        std::to_string(w));
    }
  }

  std::vector<double> g_gap(fseq.size(), 0.0);
  std::vector<double> tail_g;
  std::vector<double> tail_mean;
  const double mean_f = expectation(space, f);
  for (std::size_t n : positions) {
    g_gap[n] = l1_norm(space, gseq[n] - g);
    tail_g.push_back(g_gap[n]);
    tail_mean.push_back(std::abs(expectation(space, fseq[n]) - mean_f));
  }
  if (!detail::converges_on_tail(tail_g, tol))
    throw Error(ErrorCode::HypothesisViolated, "g^n does not converge to g in L^1");
  if (!detail::converges_on_tail(tail_mean, tol))
    throw Error(ErrorCode::HypothesisViolated, "E[f^n] does not converge to E[f]");
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
    std::vector<double> err;
    for (std::size_t n : positions) err.push_back(std::abs(fseq[n][w] - f[w]));
    if (!detail::converges_on_tail(err, tol))
      throw Error(ErrorCode::HypothesisViolated,
                  "f^n does not converge to f on outcome " + std::to_string(w));
  }

  DominatedSubsequence out;
  out.indices = detail::prune_geometric(g_gap, positions, tol);
  out.dominating = g;
  for (std::size_t n : out.indices)
    for (std::size_t w = 0; w < space.num_outcomes(); ++w)
      out.dominating[w] += std::abs(gseq[n][w] - g[w]);
  return out;
}

}  // namespace dyadic
