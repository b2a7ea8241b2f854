#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dyadic/compensator.hpp"
#include "dyadic/diagnostics.hpp"
#include "dyadic/dyadic_stop.hpp"
#include "dyadic/io.hpp"
#include "dyadic/scenarios.hpp"
#include "dyadic/stopping.hpp"

namespace dyadic {

enum class Task { Compensate, StopApprox, Exhaust, Natural, Fair, Continuity };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::Compensate: return "compensate";
    case Task::StopApprox: return "stop-approx";
    case Task::Exhaust: return "exhaust";
    case Task::Natural: return "natural";
    case Task::Fair: return "fair";
    case Task::Continuity: return "continuity";
  }
  return "unknown";
}

inline Task parse_task(const std::string& s) {
  for (auto t : {Task::Compensate, Task::StopApprox, Task::Exhaust, Task::Natural, Task::Fair, Task::Continuity})
    if (s == to_string(t)) return t;
  throw Error(ErrorCode::BadConfig, "unknown task " + s);
}

/// One table row. The meaning of `time` depends on the task:
///   compensate   grid time t_k of the probe
///   stop-approx  E[sigma_n]
///   exhaust      earliest finite value of the j-th exhausting time
///   natural      horizon (always 1)
///   fair         E[tau_n] of the announcing member
///   continuity   grid step 2^-n of the sampling level
struct ReportRow {
  std::string task;
  int level = 0;
  double time = 0.0;
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  std::string verdict = "pass";
};

struct Verdict {
  std::string name;
  bool passed = true;
  std::string detail;

  std::string text() const { return passed ? "pass" : "fail(" + detail + ")"; }
};

struct ExperimentReport {
  std::string scenario;
  std::string task;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;

  bool all_passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
  }
};

inline constexpr double kExperimentTolerance = 1e-10;

namespace detail {

inline Verdict check(std::string name, bool ok, std::string detail_text) {
  return {std::move(name), ok, ok ? std::string{} : std::move(detail_text)};
}

/// Maps a 64-bit draw to [0, 1) with 53 random bits.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// All singleton-indicator martingales on small spaces; otherwise a seeded
/// sample of indicator martingales plus the given extra terminal values.
inline std::vector<ProcessPaths> martingale_family(const SpacePtr& space, std::uint64_t seed,
                                                   const std::vector<RandomVariable>& extra = {}) {
  constexpr std::size_t kSpanningLimit = 256;
  constexpr std::size_t kSample = 16;
  if (space->num_outcomes() <= kSpanningLimit) return spanning_martingales(space);
  std::mt19937_64 rng(seed);
  std::vector<ProcessPaths> out;
  for (std::size_t i = 0; i < kSample; ++i) {
    RandomVariable x(space->num_outcomes(), 0.0);
    for (std::size_t w = 0; w < x.size(); ++w) x[w] = unit(rng) < 0.5 ? 1.0 : 0.0;
    out.push_back(doob_martingale(space, x));
  }
  for (const auto& x : extra) out.push_back(doob_martingale(space, x));
  return out;
}

/// The scenario's tau if grid-predictable, otherwise tau shifted one grid
/// step later (jumps past 1 become infinity), which is.
inline GridStoppingTime predictable_tau(const Scenario& s) {
  const auto it = s.stopping_times.find("tau");
  if (it == s.stopping_times.end()) {
    std::vector<std::size_t> idx(s.space->num_outcomes(), kInfinity);
    return GridStoppingTime(s.space, std::move(idx));
  }
  if (classify_stopping_time(it->second).is_grid_predictable) return it->second;
  std::vector<std::size_t> idx(it->second.indices().begin(), it->second.indices().end());
  for (auto& k : idx)
    if (k != kInfinity) k = k + 1 > s.space->last_index() ? kInfinity : k + 1;
  return GridStoppingTime(s.space, std::move(idx));
}

inline double capped_time(const GridStoppingTime& t, std::size_t w) { return t.finite(w) ? t.time(w) : 1.0; }

inline double mean_time(const GridStoppingTime& t) {
  double out = 0.0;
  for (std::size_t w = 0; w < t.size(); ++w) out += t.space().prob(w) * capped_time(t, w);
  return out;
}

/// Z = sum_k (Delta V_k - E[Delta V_k | F_{k-1}]), the terminal value of a
/// martingale whose naturality defect against V is E[sum_k (that term)^2].
inline RandomVariable predictability_witness(const ProcessPaths& v) {
  RandomVariable z(v.num_outcomes(), 0.0);
  for (std::size_t k = 1; k < v.num_times(); ++k) {
    const RandomVariable dv = v.row(k) - v.row(k - 1);
    z += dv - conditional_expectation(v.space(), dv, k - 1);
  }
  return z;
}

inline void compensate(const Scenario& s, ExperimentReport& r) {
  const ProcessPaths& a = s.process("A");
  const CompensatorApproximation approx = approximate_compensator(a);
  const auto& space = *s.space;
  bool start_ok = true;
  bool dominated = true;
  bool increasing_ok = true;
  const bool increasing_input = is_increasing(a);
  for (std::size_t i = 0; i < approx.steps.size(); ++i) {
    const ProcessPaths path = approx.steps[i].to_paths();
    const bool last = i + 1 == approx.steps.size();
    for (std::size_t k = 0; k < space.num_times(); ++k) {
      RandomVariable err(space.num_outcomes(), 0.0);
      for (std::size_t w = 0; w < space.num_outcomes(); ++w) err[w] = std::abs(path(k, w) - a(k, w));
      ReportRow row{"compensate", approx.levels[i], space.grid().time(k), approx.probe_errors[i][k],
                    expectation(space, err), "pass"};
      if (last && row.max_abs_error > kExperimentTolerance) row.verdict = "fail(final level not exact)";
      r.rows.push_back(std::move(row));
    }
    const ProcessPaths var = variation_process(path);
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      if (std::abs(path(0, w) - a(0, w)) > kExperimentTolerance) start_ok = false;
      if (var(var.last_index(), w) > approx.dominating[w] + kExperimentTolerance) dominated = false;
    }
    if (increasing_input && !is_increasing(path)) increasing_ok = false;
  }
  const double top = approx.convergence.empty() ? 0.0 : approx.convergence.back().max_abs_error;
  const bool predictable = is_grid_predictable(a, space.master_level());
  r.verdicts.push_back(check("top_level_exact", !predictable || top <= kExperimentTolerance,
                             "final level error " + io::format_double(top)));
  r.verdicts.push_back(check("initial_value", start_ok, "approximation differs from A_0 at time 0"));
  r.verdicts.push_back(check("domination", dominated, "var(approx)_1 exceeds h"));
  r.verdicts.push_back(check("increasing", increasing_ok, "approximation of an increasing A decreases"));
  r.verdicts.push_back(check("successor_identity", approx.successor_identity_defect <= kExperimentTolerance,
                             "defect " + io::format_double(approx.successor_identity_defect)));
}

inline void stop_approx(const Scenario& s, ExperimentReport& r) {
  const GridStoppingTime tau = predictable_tau(s);
  const DyadicStopApproximation approx = dyadic_stop_approx(tau);
  const auto& space = *s.space;
  for (std::size_t i = 0; i < approx.sigmas.size(); ++i) {
    const GridStoppingTime& sigma = approx.sigmas[i];
    ReportRow row{"stop-approx", approx.levels[i], mean_time(sigma), 0.0, 0.0, "pass"};
    std::size_t bad = 0;
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      const double err = std::abs(capped_time(sigma, w) - capped_time(tau, w));
      row.max_abs_error = std::max(row.max_abs_error, err);
      row.mean_abs_error += space.prob(w) * err;
      const bool ok = tau[w] == 0 ? sigma[w] == 0 : sigma[w] < tau[w];
      if (!ok) ++bad;
    }
    if (bad > 0) row.verdict = "fail(" + std::to_string(bad) + " outcomes not strictly below tau)";
    r.rows.push_back(std::move(row));
  }
  const auto failure = announcing_failure(tau, announcing_sequence(approx.sigmas));
  r.verdicts.push_back(check("announces_tau", !failure, failure.value_or("")));
}

inline void exhaust(const Scenario& s, ExperimentReport& r) {
  const ProcessPaths& x = s.process("S");
  const auto& space = *s.space;
  auto audit = [&](const std::vector<GridStoppingTime>& family, const RealSet& f, const std::string& name) {
    std::size_t uncovered = 0;
    std::size_t overlaps = 0;
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      for (std::size_t k = 1; k < space.num_times(); ++k) {
        const bool jump = f.contains(x(k, w) - x(k - 1, w));
        const auto hits = std::count_if(family.begin(), family.end(),
                                        [&](const GridStoppingTime& t) { return t[w] == k; });
        if (jump && hits == 0) ++uncovered;
        if (hits > (jump ? 1 : 0)) ++overlaps;
      }
    }
    r.verdicts.push_back(check(name + "_coverage", uncovered == 0, std::to_string(uncovered) + " jumps missed"));
    r.verdicts.push_back(check(name + "_disjoint", overlaps == 0, std::to_string(overlaps) + " graph overlaps"));
  };
  const RealSet all = RealSet::nonzero();
  const auto family = exhaust_jumps(x, all);
  for (const auto& sigma : family) {
    ReportRow row{"exhaust", space.master_level(), 1.0, 0.0, 0.0, "pass"};
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      if (!sigma.finite(w)) continue;
      row.time = std::min(row.time, sigma.time(w));
      const double size = std::abs(x(sigma[w], w) - x(sigma[w] - 1, w));
      row.max_abs_error = std::max(row.max_abs_error, size);
      row.mean_abs_error += space.prob(w) * size;
    }
    r.rows.push_back(std::move(row));
  }
  audit(family, all, "annulus");

  double smallest = RealSet::kInf;
  for (std::size_t k = 1; k < space.num_times(); ++k)
    for (std::size_t w = 0; w < space.num_outcomes(); ++w) {
      const double jump = std::abs(x(k, w) - x(k - 1, w));
      if (jump > 0.0) smallest = std::min(smallest, jump);
    }
  if (smallest < RealSet::kInf) {
    const RealSet separated = RealSet::abs_at_least(0.5 * smallest);
    const auto recursive = exhaust_jumps(x, separated);
    audit(recursive, separated, "recursive");
    bool strict = true;
    for (std::size_t j = 1; j < recursive.size(); ++j)
      for (std::size_t w = 0; w < space.num_outcomes(); ++w)
        if (recursive[j - 1].finite(w) && !(recursive[j][w] > recursive[j - 1][w])) strict = false;
    r.verdicts.push_back(check("recursive_strictly_increasing", strict, "sequence not strictly increasing"));
  }
}

inline void natural(const Scenario& s, ExperimentReport& r) {
  const auto& space = *s.space;
  const ProcessPaths v = variation_process(s.process("A"));
  const ProcessPaths raw = variation_process(s.process("S"));
  const auto family =
      martingale_family(s.space, s.config.seed, {predictability_witness(v), predictability_witness(raw)});
  const CompensatorApproximation approx = approximate_compensator(v);
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < approx.steps.size(); ++i)
    rows.push_back({"natural", approx.levels[i], 1.0, 0.0, 0.0, "pass"});
  for (const auto& m : family) {
    const auto almost = almost_naturality(approx, v, m);
    for (std::size_t i = 0; i < almost.size(); ++i) {
      rows[i].max_abs_error = std::max(rows[i].max_abs_error, almost[i].defect);
      rows[i].mean_abs_error += almost[i].defect / static_cast<double>(family.size());
    }
  }
  for (auto& row : rows) {
    if (row.max_abs_error > kExperimentTolerance) row.verdict = "fail(identity defect)";
    r.rows.push_back(std::move(row));
  }
  for (const auto* a : {&v, &raw}) {
    const std::string name = a == &v ? "compensator" : "observed";
    double defect = 0.0;
    double right = 0.0;
    for (const auto& m : family) {
      for (std::size_t n = 0; n < space.num_times(); ++n) defect = std::max(defect, naturality_defect_discrete(*a, m, n));
      right = std::max(right, right_endpoint_identity_defect(*a, m));
    }
    const bool predictable = is_grid_predictable(*a, space.master_level());
    r.verdicts.push_back(check("natural_iff_predictable_" + name, (defect <= kExperimentTolerance) == predictable,
                               "defect " + io::format_double(defect) + ", predictable " +
                                   (predictable ? "true" : "false")));
    r.verdicts.push_back(check("right_endpoint_" + name, right <= kExperimentTolerance,
                               "defect " + io::format_double(right)));
  }
}

inline void fair(const Scenario& s, ExperimentReport& r) {
  const auto& space = *s.space;
  const GridStoppingTime tau = predictable_tau(s);
  const DyadicStopApproximation approx = dyadic_stop_approx(tau);
  const auto announcing = announcing_sequence(approx.sigmas);
  const auto family = martingale_family(s.space, s.config.seed, {s.process("S").terminal()});
  for (std::size_t i = 0; i < announcing.size(); ++i) {
    ReportRow row{"fair", approx.levels[i], mean_time(announcing[i]), 0.0, 0.0, "pass"};
    for (const auto& m : family) {
      const double gap = std::abs(expectation(space, evaluate_at(m, announcing[i])) -
                                  expectation(space, evaluate_at(m, tau, EvalMode::LeftLimit)));
      row.max_abs_error = std::max(row.max_abs_error, gap);
      row.mean_abs_error += gap / static_cast<double>(family.size());
    }
    r.rows.push_back(std::move(row));
  }
  const auto failure = announcing_failure(tau, announcing);
  r.verdicts.push_back(check("announcing_certificate", !failure, failure.value_or("")));
  const double defect = fairness_defect(tau, family);
  r.verdicts.push_back(check("fair", defect <= kExperimentTolerance, "defect " + io::format_double(defect)));
}

inline void continuity(const Scenario& s, ExperimentReport& r) {
  const auto& space = *s.space;
  const ProcessPaths& x = s.process("S");
  std::vector<AnnouncedTime> taus;
  const GridStoppingTime tau = predictable_tau(s);
  taus.push_back({tau, announcing_sequence(dyadic_stop_approx(tau).sigmas)});
  for (std::size_t k = 1; k < space.num_times(); ++k)
    taus.push_back({GridStoppingTime::deterministic(s.space, k), {GridStoppingTime::deterministic(s.space, k - 1)}});
  const ContinuityReport report = compensator_continuity_defect(x, taus);
  for (int n = 1; n <= space.master_level(); ++n) {
    const DoobDecomposition dd = discrete_doob(x, n);
    ReportRow row{"continuity", n, std::ldexp(1.0, -n), 0.0, 0.0, "pass"};
    for (std::size_t j = 1; j < dd.compensator.size(); ++j) {
      const RandomVariable jump = dd.compensator[j] - dd.compensator[j - 1];
      for (double d : jump) row.max_abs_error = std::max(row.max_abs_error, std::abs(d));
      row.mean_abs_error += l1_norm(space, jump) / static_cast<double>(dd.compensator.size() - 1);
    }
    r.rows.push_back(std::move(row));
  }
  double worst = 0.0;
  for (const auto& row : report.rows) worst = std::max(worst, std::abs(row.mean_jump_s - row.mean_jump_a));
  r.verdicts.push_back(check("jump_identity", report.identity_holds, "max gap " + io::format_double(worst)));
  if (s.config.kind == ScenarioKind::BernoulliCounting) {
    bool linear = true;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      const double ratio = r.rows[i - 1].max_abs_error / r.rows[i].max_abs_error;
      if (std::abs(ratio - 2.0) > 0.05 * 2.0) linear = false;
    }
    r.verdicts.push_back(check("linear_scaling", linear, "max |Delta A| does not halve with the grid step"));
  }
}

}  // namespace detail

/// Runs one task on a generated scenario. Rows come out sorted by level.
inline ExperimentReport run_convergence_experiment(const ScenarioConfig& cfg, Task task) {
  const Scenario s = generate_scenario(cfg);
  ExperimentReport r;
  r.scenario = to_string(cfg.kind);
  r.task = to_string(task);
  r.seed = cfg.seed;
  switch (task) {
    case Task::Compensate: detail::compensate(s, r); break;
    case Task::StopApprox: detail::stop_approx(s, r); break;
    case Task::Exhaust: detail::exhaust(s, r); break;
    case Task::Natural: detail::natural(s, r); break;
    case Task::Fair: detail::fair(s, r); break;
    case Task::Continuity: detail::continuity(s, r); break;
  }
  std::stable_sort(r.rows.begin(), r.rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.level < b.level; });
  return r;
}

enum class ReportFormat { Csv, Json };

inline std::string report_to_csv(const ExperimentReport& r) {
  std::string out = "task,level,time,max_abs_error,mean_abs_error,verdict\n";
  for (const auto& row : r.rows) {
    out += row.task + ',' + std::to_string(row.level) + ',' + io::format_double(row.time) + ',' +
           io::format_double(row.max_abs_error) + ',' + io::format_double(row.mean_abs_error) + ',' + row.verdict +
           '\n';
  }
  return out;
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& r) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"task", row.task},
                    {"level", row.level},
                    {"time", row.time},
                    {"max_abs_error", row.max_abs_error},
                    {"mean_abs_error", row.mean_abs_error},
                    {"verdict", row.verdict}});
  }
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) verdicts.push_back({{"name", v.name}, {"verdict", v.text()}});
  return {{"scenario", r.scenario}, {"task", r.task}, {"seed", r.seed}, {"rows", rows}, {"verdicts", verdicts}};
}

inline std::string render_report(const ExperimentReport& r, ReportFormat format) {
  return format == ReportFormat::Csv ? report_to_csv(r) : report_to_json(r).dump(2) + "\n";
}

/// Writes the report to `path`.
inline void emit_report(const ExperimentReport& r, ReportFormat format, const std::string& path) {
  io::write_file(path, render_report(r, format));
}

}  // namespace dyadic
