#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/error.hpp"
#include "dyadic/grid.hpp"

namespace dyadic {

/// A real function of the outcome.
class RandomVariable {
 public:
  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> values) : values_(std::move(values)) {}
  RandomVariable(std::size_t outcomes, double constant) : values_(outcomes, constant) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t w) const { return values_[w]; }
  double& operator[](std::size_t w) { return values_[w]; }
  std::span<const double> values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  RandomVariable& operator+=(const RandomVariable& o) {
    check_same_size(o);
    for (std::size_t w = 0; w < size(); ++w) values_[w] += o.values_[w];
    return *this;
  }
  RandomVariable& operator-=(const RandomVariable& o) {
    check_same_size(o);
    for (std::size_t w = 0; w < size(); ++w) values_[w] -= o.values_[w];
    return *this;
  }
  RandomVariable& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }

  friend RandomVariable operator+(RandomVariable a, const RandomVariable& b) { return a += b; }
  friend RandomVariable operator-(RandomVariable a, const RandomVariable& b) { return a -= b; }
  friend RandomVariable operator*(RandomVariable a, double c) { return a *= c; }
  friend RandomVariable operator*(double c, RandomVariable a) { return a *= c; }
  friend RandomVariable operator-(RandomVariable a) { return a *= -1.0; }
  friend bool operator==(const RandomVariable&, const RandomVariable&) = default;

 private:
  void check_same_size(const RandomVariable& o) const {
    if (o.size() != size())
      throw Error(ErrorCode::SpaceMismatch, "random variables over different outcome sets");
  }

  std::vector<double> values_;
};

inline double max_abs_difference(const RandomVariable& a, const RandomVariable& b) {
  double out = 0.0;
  for (std::size_t w = 0; w < a.size(); ++w) out = std::max(out, std::abs(a[w] - b[w]));
  return out;
}

/// A partition of {0..n-1} into disjoint blocks.
class Partition {
 public:
  Partition() = default;

  Partition(std::size_t outcomes, std::vector<std::vector<std::size_t>> blocks)
      : blocks_(std::move(blocks)), block_of_(outcomes, kUnassigned) {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].empty()) throw Error(ErrorCode::BadPartition, "empty block");
      std::sort(blocks_[b].begin(), blocks_[b].end());
      for (std::size_t w : blocks_[b]) {
        if (w >= outcomes)
          throw Error(ErrorCode::BadPartition, "outcome " + std::to_string(w) + " out of range");
        if (block_of_[w] != kUnassigned)
          throw Error(ErrorCode::BadPartition, "outcome " + std::to_string(w) + " in two blocks");
        block_of_[w] = b;
      }
    }
    for (std::size_t w = 0; w < outcomes; ++w)
      if (block_of_[w] == kUnassigned)
        throw Error(ErrorCode::BadPartition, "outcome " + std::to_string(w) + " not covered");
  }

  static Partition trivial(std::size_t outcomes) {
    std::vector<std::size_t> all(outcomes);
    for (std::size_t w = 0; w < outcomes; ++w) all[w] = w;
    return Partition(outcomes, {std::move(all)});
  }

  static Partition discrete(std::size_t outcomes) {
    std::vector<std::vector<std::size_t>> blocks(outcomes);
    for (std::size_t w = 0; w < outcomes; ++w) blocks[w] = {w};
    return Partition(outcomes, std::move(blocks));
  }

  /// Groups outcomes by equal label.
  static Partition from_labels(std::span<const std::size_t> labels) {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t w = 0; w < labels.size(); ++w) order.emplace_back(labels[w], w);
    std::sort(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i == 0 || order[i].first != order[i - 1].first) blocks.emplace_back();
      blocks.back().push_back(order[i].second);
    }
    return Partition(labels.size(), std::move(blocks));
  }

  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t num_outcomes() const { return block_of_.size(); }
  const std::vector<std::size_t>& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  std::size_t block_of(std::size_t w) const { return block_of_[w]; }

  /// True when every block of `this` lies inside a block of `coarser`.
  bool refines(const Partition& coarser) const {
    for (const auto& b : blocks_) {
      const std::size_t target = coarser.block_of(b.front());
      for (std::size_t w : b)
        if (coarser.block_of(w) != target) return false;
    }
    return true;
  }

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Finite outcome set with positive weights and a refining partition filtration
/// indexed by the master grid.
class FilteredSpace {
 public:
  FilteredSpace(DyadicGrid grid, std::vector<double> weights, std::vector<Partition> partitions)
      : grid_(grid), weights_(std::move(weights)), partitions_(std::move(partitions)) {
    if (weights_.empty()) throw Error(ErrorCode::BadWeights, "no outcomes");
    // Neumaier summation: large Bernoulli spaces carry ~1e5 weights.
    double sum = 0.0;
    double carry = 0.0;
    for (double p : weights_) {
      if (!(p > 0.0) || !std::isfinite(p))
        throw Error(ErrorCode::BadWeights, "weight " + std::to_string(p) + " not positive");
      const double t = sum + p;
      carry += std::abs(sum) >= p ? (sum - t) + p : (p - t) + sum;
      sum = t;
    }
    if (std::abs(sum + carry - 1.0) > kTolerance)
      throw Error(ErrorCode::BadWeights, "weights sum to " + std::to_string(sum + carry));
    if (partitions_.size() != grid_.size())
      throw Error(ErrorCode::BadPartition, "expected " + std::to_string(grid_.size()) +
                                               " partitions, got " +
                                               std::to_string(partitions_.size()));
    for (std::size_t k = 0; k < partitions_.size(); ++k) {
      if (partitions_[k].num_outcomes() != weights_.size())
        throw Error(ErrorCode::BadPartition,
                    "partition " + std::to_string(k) + " covers the wrong outcome count");
      if (k > 0 && !partitions_[k].refines(partitions_[k - 1]))
        throw Error(ErrorCode::NonRefining,
                    "partition at index " + std::to_string(k) + " does not refine index " +
                        std::to_string(k - 1));
    }
  }

  const DyadicGrid& grid() const { return grid_; }
  int master_level() const { return grid_.master_level(); }
  std::size_t num_outcomes() const { return weights_.size(); }
  std::size_t num_times() const { return grid_.size(); }
  std::size_t last_index() const { return grid_.steps(); }
  double prob(std::size_t w) const { return weights_[w]; }
  std::span<const double> weights() const { return weights_; }

  const Partition& partition(std::size_t k) const {
    grid_.check_index(k);
    return partitions_[k];
  }

 private:
  DyadicGrid grid_;
  std::vector<double> weights_;
  std::vector<Partition> partitions_;
};

using SpacePtr = std::shared_ptr<const FilteredSpace>;

inline SpacePtr build_filtered_space(DyadicGrid grid, std::vector<double> weights,
                                     std::vector<Partition> partitions) {
  return std::make_shared<const FilteredSpace>(grid, std::move(weights), std::move(partitions));
}

/// Filtration that is constant at `partition`.
inline SpacePtr build_constant_filtration(int master_level, std::vector<double> weights,
                                          const Partition& partition) {
  DyadicGrid grid(master_level);
  return build_filtered_space(grid, std::move(weights),
                              std::vector<Partition>(grid.size(), partition));
}

inline double expectation(const FilteredSpace& space, const RandomVariable& x) {
  double out = 0.0;
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) out += space.prob(w) * x[w];
  return out;
}

inline double l1_norm(const FilteredSpace& space, const RandomVariable& x) {
  double out = 0.0;
  for (std::size_t w = 0; w < space.num_outcomes(); ++w) out += space.prob(w) * std::abs(x[w]);
  return out;
}

inline void check_outcomes(const FilteredSpace& space, const RandomVariable& x) {
  if (x.size() != space.num_outcomes())
    throw Error(ErrorCode::SpaceMismatch, "random variable has " + std::to_string(x.size()) +
                                              " outcomes, space has " +
                                              std::to_string(space.num_outcomes()));
}

/// Probability-weighted block averages of `x`.
inline RandomVariable conditional_expectation(const FilteredSpace& space, const Partition& partition,
                                              const RandomVariable& x) {
  check_outcomes(space, x);
  RandomVariable out(space.num_outcomes(), 0.0);
  for (const auto& block : partition.blocks()) {
    double mass = 0.0;
    double total = 0.0;
    for (std::size_t w : block) {
      mass += space.prob(w);
      total += space.prob(w) * x[w];
    }
    const double avg = total / mass;
    for (std::size_t w : block) out[w] = avg;
  }
  return out;
}

/// E[x | F_{t_k}].
inline RandomVariable conditional_expectation(const FilteredSpace& space, const RandomVariable& x,
                                              std::size_t k) {
  return conditional_expectation(space, space.partition(k), x);
}

inline bool is_measurable(const Partition& partition, const RandomVariable& x,
                          double tol = kTolerance) {
  for (const auto& block : partition.blocks()) {
    const double first = x[block.front()];
    for (std::size_t w : block)
      if (std::abs(x[w] - first) > tol) return false;
  }
  return true;
}

/// True iff `x` is constant on every F_{t_k}-block.
inline bool is_measurable(const FilteredSpace& space, const RandomVariable& x, std::size_t k,
                          double tol = kTolerance) {
  check_outcomes(space, x);
  return is_measurable(space.partition(k), x, tol);
}

/// Indicator of a set of outcomes.
inline RandomVariable indicator(std::size_t outcomes, std::span<const std::size_t> members) {
  RandomVariable out(outcomes, 0.0);
  for (std::size_t w : members) out[w] = 1.0;
  return out;
}

}  // namespace dyadic
