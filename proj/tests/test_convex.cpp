#include <gtest/gtest.h>

#include "dyadic/convex.hpp"
#include "dyadic/testing/generators.hpp"

using namespace dyadic;
namespace gen = dyadic::testing;

namespace {

SpacePtr point() { return build_constant_filtration(1, {1.0}, Partition::trivial(1)); }

std::vector<RandomVariable> scalars(std::size_t len, double (*f)(std::size_t)) {
  std::vector<RandomVariable> out;
  for (std::size_t n = 1; n <= len; ++n) out.emplace_back(1, f(n));
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

}  // namespace

TEST(ForwardConvexCombinations, ConstantSequence) {
  const SpacePtr s = gen::space_two();
  const RandomVariable x(std::vector<double>{2.0, -1.0});
  const auto r = forward_convex_combinations(*s, std::vector<RandomVariable>(5, x));
  EXPECT_FALSE(r.used_fallback);
  for (const auto& cw : r.weights) EXPECT_EQ(cw.weights, std::vector<double>{1.0});
  EXPECT_EQ(max_abs_difference(r.limit, x), 0.0);
  EXPECT_EQ(r.certified_from, 0u);
}

TEST(ForwardConvexCombinations, AlternatingSignsSelectEvenTerms) {
  const auto seq = scalars(8, [](std::size_t n) { return n % 2 == 0 ? 1.0 : -1.0; });
  const auto r = forward_convex_combinations(*point(), seq);
  EXPECT_TRUE(r.used_fallback);
  EXPECT_EQ(r.limit[0], 1.0);
  // Positions are zero-based, so n = 2, 4, 6, 8.
  EXPECT_EQ(r.selected, (std::vector<std::size_t>{1, 3, 5, 7}));
  for (const auto& c : r.combined) EXPECT_EQ(c[0], 1.0);
  for (const auto& cw : r.weights) {
    EXPECT_EQ(cw.weights.back(), 1.0);
    EXPECT_EQ(cw.end() % 2, 1u);
  }
}

TEST(ForwardConvexCombinations, HarmonicSequenceKeepsItself) {
  const auto seq = scalars(8, [](std::size_t n) { return 1.0 / static_cast<double>(n); });
  const auto r = forward_convex_combinations(*point(), seq);
  EXPECT_FALSE(r.used_fallback);
  // On a finite list the deepest term stands in for the limit 0.
  EXPECT_EQ(r.limit[0], 0.125);
  for (std::size_t n = 0; n < seq.size(); ++n) EXPECT_EQ(r.combined[n][0], seq[n][0]);
  EXPECT_EQ(r.certified_from, 7u);
}

TEST(ForwardConvexCombinations, TailAveragesWhenSequenceIsNotMonotone) {
  // Distances to the last term 0.5, 0.7, 0.1, 0: not monotone, but the tail
  // averages are.
  std::vector<RandomVariable> seq{RandomVariable(1, 0.5), RandomVariable(1, 0.7), RandomVariable(1, 0.1),
                                  RandomVariable(1, 0.0)};
  const auto r = forward_convex_combinations(*point(), seq);
  EXPECT_FALSE(r.used_fallback);
  EXPECT_NEAR(r.combined[0][0], 1.3 / 4.0, 1e-15);
  EXPECT_NEAR(r.combined[1][0], 0.8 / 3.0, 1e-15);
  EXPECT_NEAR(r.combined[2][0], 0.05, 1e-15);
  EXPECT_EQ(r.combined[3][0], 0.0);
  EXPECT_EQ(r.weights[1].weights.size(), 3u);
}

TEST(ForwardConvexCombinations, Errors) {
  EXPECT_EQ(code_of([] { forward_convex_combinations(*point(), {}); }), ErrorCode::EmptyList);
  EXPECT_EQ(code_of([] { forward_convex_combinations(*point(), {RandomVariable(1, std::nan(""))}); }),
            ErrorCode::NoAccumulationPoint);
}

TEST(ForwardConvexCombinations, WeightsAreForwardConvex) {
  gen::Rng rng(40);
  for (int i = 0; i < 200; ++i) {
    const SpacePtr s = gen::random_space(rng);
    std::vector<RandomVariable> seq;
    const std::size_t len = rng.index(1, 9);
    for (std::size_t n = 0; n < len; ++n) seq.push_back(gen::random_measurable(rng, s->partition(s->last_index())));
    const auto r = forward_convex_combinations(*s, seq);
    ASSERT_EQ(r.weights.size(), r.combined.size());
    for (std::size_t n = 0; n < r.weights.size(); ++n) {
      const auto& cw = r.weights[n];
      EXPECT_EQ(cw.start, n);
      double total = 0.0;
      RandomVariable c(s->num_outcomes(), 0.0);
      for (std::size_t j = 0; j < cw.weights.size(); ++j) {
        EXPECT_GE(cw.weights[j], 0.0);
        total += cw.weights[j];
        c += cw.weights[j] * seq[cw.start + j];
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_LE(max_abs_difference(c, r.combined[n]), 1e-12);
    }
    for (std::size_t n = r.certified_from; n < r.combined.size(); ++n)
      EXPECT_LE(l1_norm(*s, r.combined[n] - r.limit), std::ldexp(1.0, -static_cast<int>(n + 1)) + 1e-12);
  }
}

TEST(SelectDominatedSubsequence, ConstantSequences) {
  const SpacePtr s = gen::space_two();
  const RandomVariable f(std::vector<double>{0.5, 1.0});
  const RandomVariable g(std::vector<double>{1.0, 2.0});
  const auto r = select_dominated_subsequence(*s, f, g, std::vector<RandomVariable>(4, f),
                                              std::vector<RandomVariable>(4, g));
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(max_abs_difference(r.dominating, g), 0.0);
}

TEST(SelectDominatedSubsequence, ShrinkingTowardF) {
  const SpacePtr s = gen::space_two();
  const RandomVariable f(std::vector<double>{0.5, 2.0});
  const RandomVariable g = f + RandomVariable(2, 1.0);
  std::vector<RandomVariable> fseq;
  for (std::size_t n = 1; n <= 6; ++n) fseq.push_back((1.0 - 1.0 / static_cast<double>(n)) * f);
  const auto r = select_dominated_subsequence(*s, f, g, fseq, std::vector<RandomVariable>(6, g));
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(max_abs_difference(r.dominating, g), 0.0);
}

TEST(SelectDominatedSubsequence, ZeroF) {
  const SpacePtr s = gen::space_two();
  const RandomVariable zero(2, 0.0);
  const RandomVariable g(std::vector<double>{3.0, 1.0});
  const auto r = select_dominated_subsequence(*s, zero, g, std::vector<RandomVariable>(3, zero),
                                              std::vector<RandomVariable>(3, g));
  EXPECT_EQ(max_abs_difference(r.dominating, g), 0.0);
}

TEST(SelectDominatedSubsequence, PrunesToGeometricGaps) {
  const SpacePtr s = point();
  const RandomVariable g(1, 1.0);
  std::vector<RandomVariable> gseq;
  for (double gap : {0.9, 0.4, 0.3, 0.2, 0.1, 0.05, 0.0}) gseq.push_back(g + RandomVariable(1, gap));
  const std::vector<RandomVariable> fseq(gseq.size(), RandomVariable(1, 0.5));
  const auto r = select_dominated_subsequence(*s, RandomVariable(1, 0.5), g, fseq, gseq);
  // Kept when the gap is at most 1/2, 1/4, 1/8, ...
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{1, 3, 4, 5, 6}));
  EXPECT_NEAR(r.dominating[0], 1.0 + 0.4 + 0.2 + 0.1 + 0.05, 1e-15);
}

TEST(SelectDominatedSubsequence, HypothesisViolations) {
  const SpacePtr s = gen::space_two();
  const RandomVariable f(std::vector<double>{0.5, 1.0});
  const RandomVariable g(std::vector<double>{1.0, 2.0});
  std::vector<RandomVariable> fseq(6, f);
  std::vector<RandomVariable> gseq(6, g);
  auto above = fseq;
  above[2] = g + RandomVariable(2, 0.1);
  EXPECT_EQ(code_of([&] { select_dominated_subsequence(*s, f, g, above, gseq); }), ErrorCode::HypothesisViolated);
  auto negative = fseq;
  negative[1] = RandomVariable(2, -0.1);
  EXPECT_EQ(code_of([&] { select_dominated_subsequence(*s, f, g, negative, gseq); }), ErrorCode::HypothesisViolated);
  auto wobble = gseq;
  for (std::size_t n = 1; n < 6; n += 2) wobble[n] = g + RandomVariable(2, 1.0);
  EXPECT_EQ(code_of([&] { select_dominated_subsequence(*s, f, g, fseq, wobble); }), ErrorCode::HypothesisViolated);
  auto drift = fseq;
  for (std::size_t n = 1; n < 6; n += 2) drift[n] = f + RandomVariable(std::vector<double>{0.25, -0.25});
  EXPECT_EQ(code_of([&] { select_dominated_subsequence(*s, f, g, drift, gseq); }), ErrorCode::HypothesisViolated);
  EXPECT_EQ(code_of([&] { select_dominated_subsequence(*s, f, g, fseq, std::vector<RandomVariable>(5, g)); }),
            ErrorCode::HypothesisViolated);
}

TEST(SelectDominatedSubsequence, RandomInputsAreDominated) {
  gen::Rng rng(41);
  gen::SpaceShape shape;
  shape.max_outcomes = 8;
  for (int i = 0; i < 100; ++i) {
    const SpacePtr s = gen::random_space(rng, shape);
    const std::size_t n = s->num_outcomes();
    const RandomVariable f = gen::random_measurable(rng, s->partition(s->last_index()), 0.0, 1.0);
    const RandomVariable g = f + gen::random_measurable(rng, s->partition(s->last_index()), 0.5, 1.0);
    std::vector<RandomVariable> fseq;
    std::vector<RandomVariable> gseq;
    for (std::size_t m = 0; m < 8; ++m) {
      const double shrink = std::ldexp(1.0, -static_cast<int>(m + 1));
      fseq.push_back((1.0 - shrink) * f);
      gseq.push_back(g + shrink * gen::random_measurable(rng, s->partition(s->last_index()), 0.5, 1.0));
    }
    const auto r = select_dominated_subsequence(*s, f, g, fseq, gseq);
    ASSERT_FALSE(r.indices.empty());
    for (std::size_t k : r.indices)
      for (std::size_t w = 0; w < n; ++w) EXPECT_LE(fseq[k][w], r.dominating[w] + 1e-12);
    for (std::size_t w = 0; w < n; ++w) EXPECT_LE(std::abs(fseq[r.indices.back()][w] - f[w]), 1.0 / 256.0 + 1e-12);
  }
}
