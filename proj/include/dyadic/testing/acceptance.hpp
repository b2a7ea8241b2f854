#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadic/compensator.hpp"
#include "dyadic/convex.hpp"
#include "dyadic/diagnostics.hpp"
#include "dyadic/doob.hpp"
#include "dyadic/dyadic_stop.hpp"
#include "dyadic/io.hpp"
#include "dyadic/paths.hpp"
#include "dyadic/scenarios.hpp"
#include "dyadic/stopping.hpp"
#include "dyadic/testing/generators.hpp"
#include "dyadic/testing/oracles.hpp"

namespace dyadic::testing {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace acceptance {

inline constexpr double kExact = 1e-10;
inline constexpr double kDoobSeconds = 10.0;
inline constexpr double kSelftestSeconds = 60.0;
inline constexpr double kScalingTolerance = 0.05;
inline constexpr std::size_t kDoobSpaces = 200;
inline constexpr std::size_t kStopSamples = 100;
inline constexpr std::size_t kJumpScenarios = 200;
inline constexpr std::size_t kNaturalScenarios = 200;
inline constexpr std::size_t kSubseqInputs = 100;

/// Collects failures; the first few are kept for the report line.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary(const std::string& good) const {
    return ok() ? good : std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed: " + notes_;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string notes_;
};

inline std::string num(double x) { return io::format_double(x); }

inline double max_diff(const std::vector<RandomVariable>& a, const std::vector<RandomVariable>& b) {
  double out = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) out = std::max(out, max_abs_difference(a[j], b[j]));
  return out;
}

/// Sampled-grid martingale defect of M along D_n.
inline double level_martingale_defect(const FilteredSpace& space, const std::vector<RandomVariable>& m, int level) {
  const std::size_t stride = space.grid().stride(level);
  double out = 0.0;
  for (std::size_t j = 1; j < m.size(); ++j)
    out = std::max(out, max_abs_difference(conditional_expectation(space, m[j], (j - 1) * stride), m[j - 1]));
  return out;
}

inline CriterionResult doob_exactness(std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t i = 0; i < kDoobSpaces; ++i) {
    const SpacePtr space = random_space(rng);
    const ProcessPaths s = random_adapted(rng, space);
    const int level = static_cast<int>(rng.index(0, static_cast<std::size_t>(space->master_level())));
    const DoobDecomposition dd = discrete_doob(s, level);
    const std::size_t stride = space->grid().stride(level);
    const double defect = level_martingale_defect(*space, dd.martingale, level);
    t.expect(defect <= kExact, "martingale defect " + num(defect));
    t.expect(max_abs_difference(dd.compensator[0], RandomVariable(space->num_outcomes(), 0.0)) == 0.0, "A_0 != 0");
    for (std::size_t j = 1; j < dd.compensator.size(); ++j)
      t.expect(is_measurable(*space, dd.compensator[j], (j - 1) * stride, kExact), "A not predictable");
    const LinearSolve oracle = brute_force_doob(s, level);
    t.expect(oracle.unique(), "decomposition equations not uniquely solvable");
    const double gap = max_diff(dd.compensator, oracle.compensator);
    worst = std::max(worst, gap);
    t.expect(gap <= kExact, "oracle gap " + num(gap));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.expect(seconds < kDoobSeconds, "runtime " + num(seconds) + " s");
  return {1, "doob_exactness", t.ok(), t.summary("200 spaces, max oracle gap " + num(worst) + ", " + num(seconds) + " s"), 0.0};
}

inline void audit_approximation(Tally& t, const ProcessPaths& a, const CompensatorApproximation& approx,
                                const std::string& label) {
  for (std::size_t i = 0; i < approx.steps.size(); ++i) {
    const ProcessPaths path = approx.steps[i].to_paths();
    const ProcessPaths var = variation_process(path);
    for (std::size_t w = 0; w < a.num_outcomes(); ++w) {
      t.expect(path(0, w) == a(0, w), label + ": approximation misses A_0");
      t.expect(var(var.last_index(), w) <= approx.dominating[w] + kExact, label + ": var exceeds h");
    }
  }
  if (is_grid_predictable(a, a.space().master_level())) {
    const double top = approx.convergence.back().max_abs_error;
    t.expect(approx.levels.back() == a.space().master_level(), label + ": master level not selected");
    t.expect(top <= kExact, label + ": top-level error " + num(top));
  }
}

inline CriterionResult sum_doob(std::uint64_t seed) {
  Tally t;
  std::size_t cases = 0;
  for (auto kind : {ScenarioKind::BernoulliCounting, ScenarioKind::DeterministicJump, ScenarioKind::PredictableJump,
                    ScenarioKind::InaccessibleJump, ScenarioKind::ReflectedWalk}) {
    for (int level = 1; level <= 3; ++level) {
      ScenarioConfig c;
      c.kind = kind;
      c.master_level = level;
      c.seed = seed;
      const Scenario s = generate_scenario(c);
      for (const char* name : {"A", "S"}) {
        const ProcessPaths& a = s.process(name);
        audit_approximation(t, a, approximate_compensator(a), std::string(to_string(kind)) + "/" + name);
        ++cases;
      }
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < 50; ++i, ++cases) {
    const SpacePtr space = random_space(rng);
    const ProcessPaths a = random_predictable(rng, space);
    audit_approximation(t, a, approximate_compensator(a), "random predictable");
  }
  // Pointwise convergence at every probe time for a deterministic jump: the
  // error is zero from some level on and stays zero.
  for (double jump : {0.5, 0.375, 0.6875}) {
    ScenarioConfig c;
    c.kind = ScenarioKind::DeterministicJump;
    c.master_level = 5;
    c.jump_time = jump;
    const Scenario s = generate_scenario(c);
    const CompensatorApproximation approx = approximate_compensator(s.process("S"));
    for (std::size_t k = 0; k < s.space->num_times(); ++k) {
      bool zero_seen = false;
      for (const auto& errs : approx.probe_errors) {
        if (errs[k] == 0.0) zero_seen = true;
        else t.expect(!zero_seen, "error at t_" + std::to_string(k) + " reappears after vanishing");
      }
      t.expect(zero_seen, "error at t_" + std::to_string(k) + " never vanishes");
    }
    ++cases;
  }
  return {2, "sum_doob_top_level_exactness", t.ok(), t.summary(std::to_string(cases) + " processes"), 0.0};
}

struct StopSample {
  GridStoppingTime tau;
  DyadicStopApproximation approx;
};

inline std::vector<StopSample> stop_samples(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StopSample> out;
  for (std::size_t i = 0; i < kStopSamples; ++i) {
    const SpacePtr space = random_space(rng);
    GridStoppingTime tau = random_predictable_stopping_time(rng, space);
    DyadicStopApproximation approx = dyadic_stop_approx(tau);
    out.push_back({std::move(tau), std::move(approx)});
  }
  return out;
}

inline CriterionResult dyadic_stop(std::uint64_t seed) {
  Tally t;
  const int master = 6;
  const SpacePtr one = build_constant_filtration(master, {1.0}, Partition::trivial(1));
  const DyadicStopApproximation half = dyadic_stop_approx(GridStoppingTime::deterministic(one, one->grid().index_of(0.5)));
  t.expect(half.levels.size() == static_cast<std::size_t>(master), "levels dropped for tau = 1/2");
  for (std::size_t i = 0; i < half.sigmas.size(); ++i) {
    const double expected = 0.5 - std::ldexp(1.0, -half.levels[i]);
    t.expect(half.sigmas[i].time(0) == expected,
             "sigma_" + std::to_string(half.levels[i]) + " = " + num(half.sigmas[i].time(0)));
  }
  std::size_t final_violations = 0;
  std::size_t outcomes = 0;
  for (const auto& [tau, approx] : stop_samples(seed)) {
    const auto& space = tau.space();
    for (std::size_t w = 0; w < space.num_outcomes(); ++w, ++outcomes) {
      for (std::size_t n = 0; n < approx.sigmas.size(); ++n) {
        const std::size_t s = approx.sigmas[n][w];
        if (tau[w] == 0) t.expect(s == 0, "sigma_n != 0 on {tau = 0}");
        const bool last = n + 1 == approx.sigmas.size();
        if (last && tau[w] > 0 && !(s < tau[w])) ++final_violations;
        if (last && tau[w] > 0 && tau.finite(w)) t.expect(s + 1 == tau[w], "final sigma is not the grid predecessor");
      }
    }
  }
  t.expect(final_violations == 0, std::to_string(final_violations) + " outcomes violate sigma < tau at the final level");
  return {3, "dyadic_stop", t.ok(),
          t.summary("sigma_n = 1/2 - 2^-n for n = 1.." + std::to_string(master) + "; 100 random tau, " +
                    std::to_string(outcomes) + " outcomes, 0 final-level violations"),
          0.0};
}

inline CriterionResult announcing(std::uint64_t seed) {
  Tally t;
  double worst = 0.0;
  for (const auto& [tau, approx] : stop_samples(seed)) {
    const auto seq = announcing_sequence(approx.sigmas);
    const auto failure = announcing_failure(tau, seq);
    t.expect(!failure, failure.value_or(""));
    const double defect = fairness_defect(tau, spanning_martingales(tau.space_ptr()));
    worst = std::max(worst, defect);
    t.expect(defect <= kExact, "fairness defect " + num(defect));
  }
  return {4, "announcing_implies_fair", t.ok(), t.summary("100 tau certified, max fairness defect " + num(worst)), 0.0};
}

inline void audit_exhaustion(Tally& t, const ProcessPaths& x, const RealSet& f, bool strict) {
  const auto family = exhaust_jumps(x, f);
  std::vector<std::vector<int>> hits(x.num_times(), std::vector<int>(x.num_outcomes(), 0));
  for (const auto& sigma : family) {
    const auto g = graph(sigma);
    for (std::size_t k = 0; k < x.num_times(); ++k)
      for (std::size_t w = 0; w < x.num_outcomes(); ++w) hits[k][w] += g[k][w];
  }
  for (std::size_t k = 0; k < x.num_times(); ++k)
    for (std::size_t w = 0; w < x.num_outcomes(); ++w) {
      const bool jump = k > 0 && f.contains(x(k, w) - x(k - 1, w));
      t.expect(hits[k][w] == (jump ? 1 : 0), jump ? "jump not covered exactly once" : "graph off the jump set");
    }
  if (strict)
    for (std::size_t j = 1; j < family.size(); ++j)
      for (std::size_t w = 0; w < x.num_outcomes(); ++w)
        if (family[j - 1].finite(w)) t.expect(family[j][w] > family[j - 1][w], "not strictly increasing");
}

inline CriterionResult exhaust(std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  std::size_t annulus_runs = 0;
  for (std::size_t i = 0; i < kJumpScenarios; ++i) {
    const SpacePtr space = random_space(rng, {16, 5, 0.35});
    ProcessPaths x = random_jumpy(rng, space);
    if (rng.coin()) x = 0.3 * x;
    audit_exhaustion(t, x, RealSet::positive(), false);
    audit_exhaustion(t, x, RealSet::nonzero(), false);
    audit_exhaustion(t, x, RealSet::abs_at_least(0.5), true);
    audit_exhaustion(t, x, RealSet::closed(1.0, 2.0), true);
    ++annulus_runs;
  }
  return {5, "exhaust_predictable_jumps", t.ok(),
          t.summary(std::to_string(annulus_runs) + " scenarios, coverage and disjointness exact"), 0.0};
}

inline CriterionResult naturality(std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  std::size_t predictable = 0;
  for (std::size_t i = 0; i < kNaturalScenarios; ++i) {
    const SpacePtr space = random_space(rng);
    const ProcessPaths a = random_increasing(rng, space, rng.coin());
    const bool grid = is_grid_predictable(a, space->master_level());
    predictable += grid ? 1 : 0;
    const double defect = naturality_defect_over_basis(a);
    t.expect((defect <= kExact) == grid, "defect " + num(defect) + " vs predictable " + (grid ? "true" : "false"));
    for (const auto& m : spanning_martingales(space))
      t.expect(right_endpoint_identity_defect(a, m) <= kExact, "right-endpoint identity fails");
  }
  const SpacePtr two = space_two();
  const ProcessPaths a = rows(two, {{0, 0}, {1, 0}, {1, 0}});
  const ProcessPaths m = rows(two, {{0, 0}, {1, -1}, {1, -1}});
  const double defect = naturality_defect_discrete(a, m, 2);
  t.expect(defect == 0.5, "two-outcome defect " + num(defect));
  return {6, "naturality_iff_predictable", t.ok(),
          t.summary("200 scenarios (" + std::to_string(predictable) + " predictable), two-outcome defect 1/2"), 0.0};
}

inline CriterionResult partition_sums() {
  Tally t;
  auto f = [](double s) { return s * s; };
  auto g = [](double s) { return s; };
  for (int k = 1; k <= 10; ++k) {
    const auto pi = dyadic_partition(k);
    const double sum = partition_sum(f, g, pi);
    const double n = std::ldexp(1.0, k);
    const double closed = ((n - 1.0) * n * (2.0 * n - 1.0) / 6.0) / (n * n * n);
    t.expect(std::abs(sum - closed) <= 1e-15, "k = " + std::to_string(k) + " sum " + num(sum));
    t.expect(std::abs(sum - 1.0 / 3.0) <= std::ldexp(1.0, -k), "k = " + std::to_string(k) + " too far from 1/3");
    if (k == 2) t.expect(sum == 14.0 / 64.0, "k = 2 sum " + num(sum));
  }
  return {7, "approx_sum_int", t.ok(), t.summary("k = 1..10 match the closed form, k = 2 gives 14/64"), 0.0};
}

inline CriterionResult subsequence(std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  constexpr std::size_t kTerms = 12;
  std::size_t raised = 0;
  std::size_t bad_inputs = 0;
  for (std::size_t i = 0; i < kSubseqInputs; ++i) {
    const std::size_t n = rng.index(1, 8);
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    const SpacePtr space = build_constant_filtration(1, weights, Partition::discrete(n));
    RandomVariable f(n, 0.0);
    RandomVariable g(n, 0.0);
    RandomVariable r(n, 0.0);
    for (std::size_t w = 0; w < n; ++w) {
      f[w] = rng.uniform(0.0, 1.0);
      g[w] = f[w] + rng.uniform(0.0, 1.0);
      r[w] = rng.uniform(0.0, 1.0);
    }
    std::vector<RandomVariable> fseq;
    std::vector<RandomVariable> gseq;
    for (std::size_t m = 0; m < kTerms; ++m) {
      const double scale = std::ldexp(1.0, -static_cast<int>(m));
      RandomVariable fm(n, 0.0);
      RandomVariable gm(n, 0.0);
      for (std::size_t w = 0; w < n; ++w) {
        gm[w] = g[w] + r[w] * scale;
        fm[w] = f[w] + rng.uniform(-f[w], r[w]) * scale;
      }
      fseq.push_back(fm);
      gseq.push_back(gm);
    }
    const DominatedSubsequence sel = select_dominated_subsequence(*space, f, g, fseq, gseq);
    t.expect(!sel.indices.empty(), "empty subsequence");
    std::vector<double> errs;
    for (std::size_t j = 0; j < sel.indices.size(); ++j) {
      const std::size_t m = sel.indices[j];
      t.expect(l1_norm(*space, gseq[m] - g) <= std::ldexp(1.0, -static_cast<int>(j + 1)) + kTolerance,
               "gap schedule broken");
      double e = 0.0;
      for (std::size_t w = 0; w < n; ++w) {
        t.expect(fseq[m][w] <= sel.dominating[w] + kExact, "f^{n_i} exceeds h");
        e = std::max(e, std::abs(fseq[m][w] - f[w]));
      }
      errs.push_back(e);
    }
    t.expect(errs.back() <= std::ldexp(1.0, -static_cast<int>(kTerms) + 2), "no pointwise convergence");

    // Each of the three hypotheses broken in turn.
    auto expect_violation = [&](const RandomVariable& f0, const RandomVariable& g0,
                                const std::vector<RandomVariable>& fs, const std::vector<RandomVariable>& gs) {
      ++bad_inputs;
      try {
        select_dominated_subsequence(*space, f0, g0, fs, gs);
        t.expect(false, "violating input accepted");
      } catch (const Error& e) {
        t.expect(e.code() == ErrorCode::HypothesisViolated, "wrong error code");
        ++raised;
      }
    };
    auto above = fseq;
    above[3] = gseq[3] + RandomVariable(n, 0.5);
    expect_violation(f, g, above, gseq);
    auto wobble = gseq;
    for (std::size_t m = 1; m < kTerms; m += 2) wobble[m] = wobble[m] + RandomVariable(n, 1.0);
    expect_violation(f, g, fseq, wobble);
    if (n >= 2) {
      // Mean-preserving oscillation: only the pointwise hypothesis fails.
      const RandomVariable lifted = f + RandomVariable(n, 1.0);
      const RandomVariable roof = g + RandomVariable(n, 3.0);
      RandomVariable swing(n, 0.0);
      swing[0] = 0.5;
      swing[1] = -0.5;
      std::vector<RandomVariable> drift;
      std::vector<RandomVariable> roomy;
      for (std::size_t m = 0; m < kTerms; ++m) {
        drift.push_back(fseq[m] + RandomVariable(n, 1.0) + (m % 2 == 1 ? swing : RandomVariable(n, 0.0)));
        roomy.push_back(gseq[m] + RandomVariable(n, 3.0));
      }
      expect_violation(lifted, roof, drift, roomy);
    }
  }
  return {8, "dominated_subsequence", t.ok(),
          t.summary("100 inputs dominated and convergent; " + std::to_string(raised) + "/" +
                    std::to_string(bad_inputs) + " violating inputs raised HypothesisViolated"),
          0.0};
}

inline CriterionResult continuity(std::uint64_t seed) {
  Rng rng(seed);
  Tally t;
  for (std::size_t i = 0; i < 200; ++i) {
    const SpacePtr space = random_space(rng);
    const auto pm = predictable_martingale_check(random_predictable_martingale(rng, space));
    t.expect(pm.is_martingale && pm.is_grid_predictable, "generator produced a non-predictable martingale");
    t.expect(pm.max_abs_jump <= kExact, "predictable martingale jumps by " + num(pm.max_abs_jump));
    t.expect(predictable_martingale_check(random_martingale(rng, space)).shadow_holds, "shadow fails");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const SpacePtr space = random_space(rng);
    const ProcessPaths s = random_adapted(rng, space);
    const GridStoppingTime tau = random_predictable_stopping_time(rng, space);
    const auto seq = announcing_sequence(dyadic_stop_approx(tau).sigmas);
    const ContinuityReport r = compensator_continuity_defect(s, {{tau, seq}});
    for (const auto& row : r.rows) worst = std::max(worst, std::abs(row.mean_jump_s - row.mean_jump_a));
    t.expect(r.identity_holds, "E[Delta S_tau] != E[Delta A_tau]");
  }
  std::vector<double> jumps;
  std::string scaling;
  for (int level : {2, 3, 4}) {
    ScenarioConfig c;
    c.kind = ScenarioKind::BernoulliCounting;
    c.master_level = level;
    c.lambda = 1.0;
    const Scenario s = generate_scenario(c);
    const ContinuityReport r = compensator_continuity_defect(s.process("S"), {});
    const double p = std::ldexp(1.0, -level);
    t.expect(std::abs(r.max_abs_jump_a - p) <= 1e-12, "max |Delta A| " + num(r.max_abs_jump_a) + " != p");
    t.expect(std::abs(r.max_abs_jump_a / r.grid_step - 1.0) <= kScalingTolerance, "max |Delta A| not proportional to step");
    jumps.push_back(r.max_abs_jump_a);
    scaling += (scaling.empty() ? "" : ", ") + num(r.max_abs_jump_a);
  }
  for (std::size_t i = 1; i < jumps.size(); ++i)
    t.expect(std::abs(jumps[i - 1] / jumps[i] / 2.0 - 1.0) <= kScalingTolerance, "ratio off 2");
  return {9, "predictable_martingale_and_compensator_continuity", t.ok(),
          t.summary("max jump-identity gap " + num(worst) + "; Bernoulli max |Delta A| = " + scaling), 0.0};
}

}  // namespace acceptance

/// Criteria 1-9 followed by the overall runtime bound (criterion 10).
inline std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 20240601) {
  namespace a = acceptance;
  const std::vector<std::function<CriterionResult()>> criteria = {
      [&] { return a::doob_exactness(seed); }, [&] { return a::sum_doob(seed + 1); },
      [&] { return a::dyadic_stop(seed + 2); }, [&] { return a::announcing(seed + 2); },
      [&] { return a::exhaust(seed + 3); },     [&] { return a::naturality(seed + 4); },
      [] { return a::partition_sums(); },       [&] { return a::subsequence(seed + 5); },
      [&] { return a::continuity(seed + 6); },
  };
  std::vector<CriterionResult> out;
  double total = 0.0;
  for (const auto& run : criteria) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {static_cast<int>(out.size()) + 1, "criterion", false, std::string("threw: ") + e.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    total += r.seconds;
    out.push_back(std::move(r));
  }
  out.push_back({10, "selftest_runtime", total < a::kSelftestSeconds,
                 "criteria 1-9 took " + a::num(total) + " s (limit 60 s)", total});
  return out;
}

inline std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + ": " + r.detail;
}

}  // namespace dyadic::testing
