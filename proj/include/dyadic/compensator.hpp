#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/convex.hpp"
#include "dyadic/doob.hpp"
#include "dyadic/error.hpp"
#include "dyadic/paths.hpp"
#include "dyadic/real_set.hpp"
#include "dyadic/stopping.hpp"

namespace dyadic {

struct CompensatorOptions {
  /// Strictly increasing levels in [0, master]; empty means 1..master.
  std::vector<int> levels;
  /// Tolerance for the convergence hypotheses of the subsequence selection.
  double selection_tol = 1e-10;
};

struct ConvergenceRow {
  int level = 0;
  /// max over grid times and outcomes of |approx_t - A_t|
  double max_abs_error = 0.0;
  /// average over grid times of E|approx_t - A_t|
  double mean_abs_error = 0.0;
};

struct CompensatorApproximation {
  /// Level N_i of each selected step process.
  std::vector<int> levels;
  std::vector<DyadicStepProcess> steps;
  /// Dominates var(steps[i])_1 for every i, outcome by outcome.
  RandomVariable dominating;
  /// Limit candidate B = A_0 + B^+ - B^-.
  ProcessPaths limit;
  std::vector<ConvergenceRow> convergence;
  /// probe_errors[i][k] = max over outcomes of |steps[i]_{t_k} - A_{t_k}|.
  std::vector<std::vector<double>> probe_errors;
  /// Extra probe times: 1 ^ sigma_j for the jump-exhausting times of B^+ and B^-.
  std::vector<GridStoppingTime> jump_probes;
  /// max over levels and probes of |E[A^n_tau] - (E[A_{theta_n}] - E[A_0])|
  /// with theta_n the level-n successor of tau, for the uncombined Doob
  /// compensators A^n of A - A_0.
  double successor_identity_defect = 0.0;
  /// Positions (into the requested level list) that survived selection.
  std::vector<std::size_t> selected_positions;
};

namespace detail {

inline std::vector<int> resolve_levels(const FilteredSpace& space, std::vector<int> levels) {
  if (levels.empty())
    for (int n = 1; n <= space.master_level(); ++n) levels.push_back(n);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) throw Error(ErrorCode::OutOfRange, "negative level");
    if (levels[i] > space.master_level())
      throw Error(ErrorCode::LevelTooHigh, "level " + std::to_string(levels[i]) + " above master " +
                                               std::to_string(space.master_level()));
    if (i > 0 && levels[i] <= levels[i - 1])
      throw Error(ErrorCode::OutOfRange, "levels must be strictly increasing");
  }
  return levels;
}

/// Doob compensators of one increasing part, their forward convex
/// combinations, and the limit candidate B = P - E[M_hat | F_t].
struct PartPipeline {
  std::vector<DyadicStepProcess> combined;
  ProcessPaths limit;
};

inline PartPipeline run_part(const ProcessPaths& part, const std::vector<int>& levels) {
  const SpacePtr& space = part.space_ptr();
  std::vector<DyadicStepProcess> raw;
  std::vector<RandomVariable> terminals;
  for (int n : levels) {
    const ExtendedDoob ext = extend_doob(space, discrete_doob(part, n));
    terminals.push_back(ext.martingale.terminal());
    raw.push_back(ext.compensator);
  }
  const ConvexCombinationResult cc = forward_convex_combinations(*space, terminals);
  std::vector<DyadicStepProcess> combined;
  for (const ConvexWeights& cw : cc.weights) {
    std::vector<const DyadicStepProcess*> parts;
    for (std::size_t m = cw.start; m <= cw.end(); ++m) parts.push_back(&raw[m]);
    combined.push_back(combine_steps(parts, cw.weights));
  }
  return {std::move(combined), part - doob_martingale(space, cc.limit)};
}

inline GridStoppingTime capped(const GridStoppingTime& sigma) {
  std::vector<std::size_t> idx(sigma.indices().begin(), sigma.indices().end());
  for (auto& k : idx)
    if (k == kInfinity) k = sigma.space().last_index();
  return GridStoppingTime(sigma.space_ptr(), std::move(idx));
}

/// Runs the dominated-subsequence selection at every probe of one part and
/// returns the surviving positions together with h for that part.
inline DominatedSubsequence select_part(const PartPipeline& p, const std::vector<GridStoppingTime>& probes,
                                        std::vector<std::size_t> positions, double tol) {
  const FilteredSpace& space = p.limit.space();
  std::vector<ProcessPaths> paths;
  std::vector<RandomVariable> gseq;
  for (const auto& s : p.combined) {
    paths.push_back(s.to_paths());
    gseq.push_back(paths.back().terminal());
  }
  const RandomVariable g = p.limit.terminal();
  DominatedSubsequence out;
  for (const auto& tau : probes) {
    std::vector<RandomVariable> fseq;
    for (const auto& path : paths) fseq.push_back(evaluate_at(path, tau));
    out = select_dominated_subsequence(space, evaluate_at(p.limit, tau), g, fseq, gseq, positions, tol);
    positions = out.indices;
  }
  return out;
}

}  // namespace detail

/// Dyadic approximation of an adapted finite-variation process A by
/// predictable step processes built from discrete Doob compensators.
///
/// A - A_0 is split into increasing parts; for each part the level-n Doob
/// compensators are averaged with forward convex weights chosen so that the
/// martingale terminal values converge, a limit candidate B is formed, and a
/// subsequence is selected along which every probe time (each grid time and
/// each jump time of B) converges under a common dominating variable. When A
/// is grid-predictable and the last level is the master level, the last step
/// process equals A on the grid.
inline CompensatorApproximation approximate_compensator(const ProcessPaths& a,
                                                        const CompensatorOptions& options = {}) {
  const SpacePtr& space = a.space_ptr();
  if (!a.adapted()) throw Error(ErrorCode::NotAdapted, "compensator approximation needs adapted A");
  for (double v : a.values())
    if (!std::isfinite(v)) throw Error(ErrorCode::NotFiniteVariation, "A has non-finite values");
  const std::vector<int> levels = detail::resolve_levels(*space, options.levels);

  const RandomVariable a0 = a.row(0);
  const ProcessPaths shifted = a - ProcessPaths(space, std::vector<RandomVariable>(a.num_times(), a0));
  const JordanSplit split = jordan_split(shifted);
  const detail::PartPipeline plus = detail::run_part(split.plus, levels);
  const detail::PartPipeline minus = detail::run_part(split.minus, levels);

  std::vector<GridStoppingTime> probes;
  for (std::size_t k = 0; k < a.num_times(); ++k) probes.push_back(GridStoppingTime::deterministic(space, k));
  CompensatorApproximation r{{}, {}, {}, ProcessPaths::constant(space, 0.0), {}, {}, {}, 0.0, {}};
  for (const auto* part : {&plus, &minus})
    for (const auto& sigma : exhaust_jumps(part->limit, RealSet::nonzero()))
      r.jump_probes.push_back(detail::capped(sigma));
  probes.insert(probes.end(), r.jump_probes.begin(), r.jump_probes.end());

  std::vector<std::size_t> positions(levels.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  positions = detail::select_part(plus, probes, positions, options.selection_tol).indices;
  positions = detail::select_part(minus, probes, positions, options.selection_tol).indices;
  r.selected_positions = positions;

  // h for the final subsequence: g + sum_i |g^{n_i} - g| for each part.
  r.dominating = RandomVariable(a.num_outcomes(), 0.0);
  for (std::size_t w = 0; w < a.num_outcomes(); ++w) r.dominating[w] = std::abs(a0[w]);
  for (const auto* part : {&plus, &minus}) {
    const RandomVariable g = part->limit.terminal();
    r.dominating += g;
    for (std::size_t i : positions)
      for (std::size_t w = 0; w < a.num_outcomes(); ++w)
        r.dominating[w] += std::abs(part->combined[i].terminal()[w] - g[w]);
  }

  const DyadicStepProcess initial(space, 0, {a0, a0});
  for (std::size_t i : positions) {
    r.steps.push_back(combine_steps({&initial, &plus.combined[i], &minus.combined[i]}, {1.0, 1.0, -1.0}));
    r.levels.push_back(r.steps.back().level());
  }
  r.limit = ProcessPaths(space, std::vector<RandomVariable>(a.num_times(), a0)) + plus.limit - minus.limit;

  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const ProcessPaths approx = r.steps[i].to_paths();
    ConvergenceRow row{r.levels[i], 0.0, 0.0};
    std::vector<double> per_time;
    for (std::size_t k = 0; k < a.num_times(); ++k) {
      RandomVariable err(a.num_outcomes(), 0.0);
      double worst = 0.0;
      for (std::size_t w = 0; w < a.num_outcomes(); ++w) {
        err[w] = std::abs(approx(k, w) - a(k, w));
        worst = std::max(worst, err[w]);
      }
      per_time.push_back(worst);
      row.max_abs_error = std::max(row.max_abs_error, worst);
      row.mean_abs_error += expectation(*space, err);
    }
    row.mean_abs_error /= static_cast<double>(a.num_times());
    r.convergence.push_back(row);
    r.probe_errors.push_back(std::move(per_time));
  }

  for (int n : levels) {
    const ProcessPaths step = DyadicStepProcess(space, n, discrete_doob(shifted, n).compensator).to_paths();
    for (const auto& tau : probes) {
      std::vector<std::size_t> theta(a.num_outcomes());
      for (std::size_t w = 0; w < a.num_outcomes(); ++w) {
        const std::size_t k = tau.finite(w) ? tau[w] : a.last_index();
        const std::size_t stride = space->grid().stride(n);
        theta[w] = (k + stride - 1) / stride * stride;
      }
      const GridStoppingTime successor(space, std::move(theta));
      const double lhs = expectation(*space, evaluate_at(step, tau));
      const double rhs = expectation(*space, evaluate_at(shifted, successor));
      r.successor_identity_defect = std::max(r.successor_identity_defect, std::abs(lhs - rhs));
    }
  }
  return r;
}

}  // namespace dyadic
