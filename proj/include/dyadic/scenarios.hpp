#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dyadic/doob.hpp"
#include "dyadic/error.hpp"
#include "dyadic/filtered_space.hpp"
#include "dyadic/io.hpp"
#include "dyadic/paths.hpp"

namespace dyadic {

enum class ScenarioKind {
  BernoulliCounting,
  DeterministicJump,
  PredictableJump,
  InaccessibleJump,
  ReflectedWalk,
  CustomTree,
};

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::BernoulliCounting: return "bernoulli_counting";
    case ScenarioKind::DeterministicJump: return "deterministic_jump";
    case ScenarioKind::PredictableJump: return "predictable_jump";
    case ScenarioKind::InaccessibleJump: return "inaccessible_jump";
    case ScenarioKind::ReflectedWalk: return "reflected_walk";
    case ScenarioKind::CustomTree: return "custom_tree";
  }
  return "unknown";
}

inline constexpr int kMaxScenarioLevel = 12;
inline constexpr std::size_t kMaxAtoms = std::size_t{1} << 16;

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::DeterministicJump;
  int master_level = 3;
  std::uint64_t seed = 0;
  std::optional<double> p;
  std::optional<double> lambda;
  std::optional<double> jump_time;
  nlohmann::json tree;
};

/// A space with named processes and stopping times. Every scenario provides
/// "S" (the observed process) and "A" (its master-level compensator); all
/// but reflected_walk also provide "tau".
struct Scenario {
  ScenarioConfig config;
  SpacePtr space;
  std::map<std::string, ProcessPaths> processes;
  std::map<std::string, GridStoppingTime> stopping_times;

  const ProcessPaths& process(const std::string& name) const {
    const auto it = processes.find(name);
    if (it == processes.end()) throw Error(ErrorCode::BadConfig, "scenario has no process " + name);
    return it->second;
  }
};

inline ScenarioKind parse_kind(const std::string& s) {
  for (auto k : {ScenarioKind::BernoulliCounting, ScenarioKind::DeterministicJump, ScenarioKind::PredictableJump,
                 ScenarioKind::InaccessibleJump, ScenarioKind::ReflectedWalk, ScenarioKind::CustomTree})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::BadConfig, "unknown scenario kind " + s);
}

/// {"kind": ..., "master_level": N, "seed": u64,
///  "params": {"p": .., "lambda": .., "jump_time": .., "tree": {...}}}
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig c;
    c.kind = parse_kind(j.at("kind").get<std::string>());
    c.master_level = j.value("master_level", 3);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("params")) {
      const auto& p = j.at("params");
      if (p.contains("p")) c.p = p.at("p").get<double>();
      if (p.contains("lambda")) c.lambda = p.at("lambda").get<double>();
      if (p.contains("jump_time")) c.jump_time = p.at("jump_time").get<double>();
      if (p.contains("tree")) c.tree = p.at("tree");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config: ") + e.what());
  }
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json params = nlohmann::json::object();
  if (c.p) params["p"] = *c.p;
  if (c.lambda) params["lambda"] = *c.lambda;
  if (c.jump_time) params["jump_time"] = *c.jump_time;
  if (!c.tree.is_null()) params["tree"] = c.tree;
  return {{"kind", to_string(c.kind)}, {"master_level", c.master_level}, {"seed", c.seed}, {"params", params}};
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadConfig, what);
}

inline double probability_param(const ScenarioConfig& c, double fallback) {
  const double p = c.p.value_or(fallback);
  require(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  return p;
}

/// Outcomes are the 2^N increment sequences of a binary tree; outcome bits
/// are read from the most significant end, so the first k bits are known at
/// index k.
inline SpacePtr binary_tree_space(int level, double up) {
  const std::size_t steps = std::size_t{1} << level;
  require(steps <= 16, "tree scenarios need 2^(2^N) <= 2^16 atoms, i.e. master_level <= 4");
  const std::size_t atoms = std::size_t{1} << steps;
  std::vector<double> weights(atoms);
  for (std::size_t w = 0; w < atoms; ++w) {
    const int ones = std::popcount(w);
    weights[w] = std::pow(up, ones) * std::pow(1.0 - up, static_cast<double>(steps) - ones);
  }
  std::vector<Partition> partitions;
  for (std::size_t k = 0; k <= steps; ++k) {
    std::vector<std::size_t> labels(atoms);
    for (std::size_t w = 0; w < atoms; ++w) labels[w] = w >> (steps - k);
    partitions.push_back(Partition::from_labels(labels));
  }
  return build_filtered_space(DyadicGrid(level), std::move(weights), std::move(partitions));
}

inline int tree_bit(std::size_t w, std::size_t k, std::size_t steps) {
  return static_cast<int>((w >> (steps - k)) & 1u);
}

/// Outcome j < 2^N means a jump at index j + 1; outcome 2^N means no jump.
/// Jumps are revealed at index j + 1 - `early`.
inline SpacePtr geometric_space(int level, double hazard, std::size_t early) {
  const std::size_t steps = std::size_t{1} << level;
  std::vector<double> weights(steps + 1);
  for (std::size_t j = 0; j < steps; ++j) weights[j] = std::pow(1.0 - hazard, static_cast<double>(j)) * hazard;
  weights[steps] = std::pow(1.0 - hazard, static_cast<double>(steps));
  std::vector<Partition> partitions;
  for (std::size_t k = 0; k <= steps; ++k) {
    std::vector<std::size_t> labels(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) labels[j] = (j < steps && j + 1 <= k + early) ? j : steps;
    partitions.push_back(Partition::from_labels(labels));
  }
  return build_filtered_space(DyadicGrid(level), std::move(weights), std::move(partitions));
}

inline void jump_at_tau(Scenario& s, std::vector<std::size_t> tau) {
  GridStoppingTime t(s.space, std::move(tau));
  const std::size_t n = s.space->num_outcomes();
  std::vector<double> v(s.space->num_times() * n, 0.0);
  for (std::size_t w = 0; w < n; ++w)
    if (t.finite(w))
      for (std::size_t k = t[w]; k < s.space->num_times(); ++k) v[k * n + w] = 1.0;
  s.processes.emplace("S", ProcessPaths(s.space, std::move(v)));
  s.stopping_times.emplace("tau", std::move(t));
}

inline Scenario custom_tree(const ScenarioConfig& c) {
  require(c.tree.is_object(), "custom_tree needs params.tree");
  require(c.tree.contains("space"), "custom_tree needs params.tree.space");
  try {
    Scenario s{c, io::space_from_json(c.tree.at("space")), {}, {}};
    require(s.space->master_level() == c.master_level, "tree master_level differs from config master_level");
    if (c.tree.contains("processes"))
      for (const auto& [name, rows] : c.tree.at("processes").items())
        s.processes.emplace(name, io::process_from_json(s.space, rows));
    if (c.tree.contains("stopping_times"))
      for (const auto& [name, values] : c.tree.at("stopping_times").items())
        s.stopping_times.emplace(name, io::stopping_time_from_json(s.space, values));
    require(s.processes.count("S") == 1, "custom_tree needs a process named S");
    return s;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadConfig) throw;
    throw Error(ErrorCode::BadConfig, std::string("custom_tree: ") + e.what());
  }
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  detail::require(c.master_level >= 1 && c.master_level <= kMaxScenarioLevel, "master_level must lie in 1..12");
  if (c.lambda) detail::require(*c.lambda > 0.0, "lambda must be positive");
  if (c.p) detail::require(*c.p > 0.0 && *c.p < 1.0, "p must lie in (0, 1)");
  if (c.jump_time) {
    const double scaled = std::ldexp(*c.jump_time, c.master_level);
    detail::require(*c.jump_time >= 0.0 && *c.jump_time <= 1.0 && scaled == std::floor(scaled),
                    "jump_time must be a master grid time");
  }
}

/// Builds the scenario; deterministic in the config. Compensators "A" come
/// from the master-level Doob decomposition of "S".
inline Scenario generate_scenario(const ScenarioConfig& c) {
  validate(c);
  const int level = c.master_level;
  const std::size_t steps = std::size_t{1} << level;
  Scenario s{c, nullptr, {}, {}};
  switch (c.kind) {
    case ScenarioKind::BernoulliCounting: {
      const double p = c.lambda ? *c.lambda * std::ldexp(1.0, -level) : detail::probability_param(c, 0.5);
      detail::require(p > 0.0 && p < 1.0, "lambda 2^-N must lie in (0, 1)");
      s.space = detail::binary_tree_space(level, p);
      const std::size_t n = s.space->num_outcomes();
      std::vector<double> counts(s.space->num_times() * n, 0.0);
      for (std::size_t w = 0; w < n; ++w)
        for (std::size_t k = 1; k <= steps; ++k)
          counts[k * n + w] = counts[(k - 1) * n + w] + detail::tree_bit(w, k, steps);
      s.processes.emplace("S", ProcessPaths(s.space, std::move(counts)));
      std::vector<std::size_t> first(n, kInfinity);
      for (std::size_t w = 0; w < n; ++w)
        for (std::size_t k = 1; k <= steps && first[w] == kInfinity; ++k)
          if (detail::tree_bit(w, k, steps)) first[w] = k;
      s.stopping_times.emplace("tau", GridStoppingTime(s.space, std::move(first)));
      break;
    }
    case ScenarioKind::DeterministicJump: {
      s.space = build_constant_filtration(level, {1.0}, Partition::trivial(1));
      const std::size_t k = s.space->grid().index_of(c.jump_time.value_or(0.5));
      detail::jump_at_tau(s, {k});
      break;
    }
    case ScenarioKind::PredictableJump:
    case ScenarioKind::InaccessibleJump: {
      const double hazard = detail::probability_param(c, 0.25);
      const std::size_t early = c.kind == ScenarioKind::PredictableJump ? 1 : 0;
      s.space = detail::geometric_space(level, hazard, early);
      std::vector<std::size_t> tau(steps + 1, kInfinity);
      for (std::size_t j = 0; j < steps; ++j) tau[j] = j + 1;
      detail::jump_at_tau(s, std::move(tau));
      break;
    }
    case ScenarioKind::ReflectedWalk: {
      const double up = detail::probability_param(c, 0.5);
      s.space = detail::binary_tree_space(level, up);
      const std::size_t n = s.space->num_outcomes();
      const double dx = std::sqrt(std::ldexp(1.0, -level));
      std::vector<double> walk(s.space->num_times() * n, 0.0);
      for (std::size_t w = 0; w < n; ++w) {
        double x = 0.0;
        for (std::size_t k = 1; k <= steps; ++k) {
          x += detail::tree_bit(w, k, steps) ? dx : -dx;
          walk[k * n + w] = std::abs(x);
        }
      }
      s.processes.emplace("S", ProcessPaths(s.space, std::move(walk)));
      break;
    }
    case ScenarioKind::CustomTree:
      s = detail::custom_tree(c);
      break;
  }
  const ProcessPaths& process = s.process("S");
  detail::require(process.adapted(), "process S is not adapted");
  s.processes.emplace("A", ProcessPaths(s.space, discrete_doob(process, level).compensator));
  return s;
}

}  // namespace dyadic
