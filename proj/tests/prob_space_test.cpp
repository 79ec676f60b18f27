#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dsqa/prob_space.hpp"
#include "dsqa/selfcheck.hpp"

namespace {

dsqa::ScoreGrid grid_of(std::vector<std::size_t> lengths) { return dsqa::ScoreGrid(lengths); }

double exp_sum(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += std::exp(x);
  return s;
}

}  // namespace

TEST(LogPartition, DirectSummationOracle) {
  auto g = grid_of({3});
  g.paragraphs[0].begin = {1.0, 0.0, -1.0, 0.0};
  const auto lp = dsqa::log_partition(g, dsqa::SpaceKind::ParagraphLevel);
  const double z = std::exp(1.0) + 1.0 + std::exp(-1.0) + 1.0;
  EXPECT_NEAR(lp.log_z_begin[0], std::log(z), 1e-12);
  EXPECT_NEAR(lp.log_z_begin[0], 1.6266, 1e-4);
  EXPECT_NEAR(std::exp(lp.log_begin(0, 0)), std::exp(1.0) / z, 1e-12);
  EXPECT_NEAR(std::exp(lp.log_begin(0, 0)), 0.5345, 1e-4);
  EXPECT_NEAR(dsqa::log_span_prob(lp, 0, 0, 0), lp.log_begin(0, 0) + lp.log_end(0, 0), 0.0);
  EXPECT_NEAR(dsqa::log_span_prob(lp, 0, 0, 0), std::log(std::exp(1.0) / z) + std::log(0.25), 1e-12);
}

TEST(LogPartition, UniformParagraphIncludesNull) {
  const auto lp = dsqa::log_partition(grid_of({5}), dsqa::SpaceKind::ParagraphLevel);
  for (double v : lp.log_probs[0].begin) EXPECT_NEAR(v, std::log(1.0 / 6.0), 1e-12);
  for (double v : lp.log_probs[0].end) EXPECT_NEAR(v, std::log(1.0 / 6.0), 1e-12);
}

TEST(LogPartition, UniformDocumentPoolsParagraphsWithoutNull) {
  const auto lp = dsqa::log_partition(grid_of({2, 2}), dsqa::SpaceKind::DocumentLevel);
  ASSERT_EQ(lp.log_z_begin.size(), 1u);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(std::exp(lp.log_begin(k, i)), 0.25, 1e-12);
    EXPECT_EQ(lp.log_begin(k, 2), dsqa::kNegInf);
  }
}

TEST(LogSpanProb, UniformTwoTokens) {
  const auto lp = dsqa::log_partition(grid_of({2}), dsqa::SpaceKind::ParagraphLevel);
  EXPECT_NEAR(dsqa::log_span_prob(lp, 0, 0, 1), 2.0 * std::log(1.0 / 3.0), 1e-12);
  EXPECT_THROW(dsqa::log_span_prob(lp, 0, 1, 0), dsqa::DomainError);
  EXPECT_THROW(dsqa::log_span_prob(lp, 1, 0, 0), dsqa::DomainError);
  EXPECT_THROW(dsqa::log_span_prob(lp, 0, 0, 2), dsqa::DomainError);
}

TEST(LogPartition, EmptyGridIsDomainError) {
  EXPECT_THROW(dsqa::log_partition(dsqa::ScoreGrid{}, dsqa::SpaceKind::DocumentLevel), dsqa::DomainError);
}

TEST(LogPartition, NormalizesExtremeRandomGrids) {
  std::mt19937_64 rng(21);
  dsqa::InstanceShape shape;
  shape.scale = 1e4;
  for (int t = 0; t < 300; ++t) {
    const auto g = dsqa::random_grid(rng, shape);
    const auto p = dsqa::log_partition(g, dsqa::SpaceKind::ParagraphLevel);
    for (const auto& ps : p.log_probs) {
      EXPECT_NEAR(exp_sum(ps.begin), 1.0, 1e-9);
      EXPECT_NEAR(exp_sum(ps.end), 1.0, 1e-9);
      for (double v : ps.begin) EXPECT_LE(v, 0.0);
    }
    const auto d = dsqa::log_partition(g, dsqa::SpaceKind::DocumentLevel);
    double sb = 0.0, se = 0.0;
    for (const auto& ps : d.log_probs) {
      sb += exp_sum(ps.begin);
      se += exp_sum(ps.end);
    }
    EXPECT_NEAR(sb, 1.0, 1e-9);
    EXPECT_NEAR(se, 1.0, 1e-9);
  }
}

TEST(LogPartition, ShiftInvariance) {
  std::mt19937_64 rng(22);
  const dsqa::InstanceShape shape;
  for (int t = 0; t < 200; ++t) {
    const auto g = dsqa::random_grid(rng, shape);
    auto shifted = g;
    const double c = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    for (auto& p : shifted.paragraphs)
      for (auto& v : p.begin) v += c;
    for (auto kind : {dsqa::SpaceKind::ParagraphLevel, dsqa::SpaceKind::DocumentLevel}) {
      const auto a = dsqa::log_partition(g, kind);
      const auto b = dsqa::log_partition(shifted, kind);
      for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t i = 0; i < a.log_probs[k].begin.size(); ++i) {
          if (a.log_probs[k].begin[i] == dsqa::kNegInf) continue;
          EXPECT_NEAR(a.log_probs[k].begin[i], b.log_probs[k].begin[i], 1e-9);
        }
    }
  }
}

TEST(LogPartition, SingleParagraphWithImpossibleNullMatchesDocumentLevel) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    auto g = grid_of({static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 10)(rng))});
    for (auto& v : g.paragraphs[0].begin) v = std::uniform_real_distribution<double>(-3, 3)(rng);
    for (auto& v : g.paragraphs[0].end) v = std::uniform_real_distribution<double>(-3, 3)(rng);
    g.paragraphs[0].begin.back() = dsqa::kNegInf;
    g.paragraphs[0].end.back() = dsqa::kNegInf;
    const auto p = dsqa::log_partition(g, dsqa::SpaceKind::ParagraphLevel);
    const auto d = dsqa::log_partition(g, dsqa::SpaceKind::DocumentLevel);
    for (std::size_t i = 0; i + 1 < g.paragraphs[0].begin.size(); ++i) {
      EXPECT_NEAR(p.log_begin(0, i), d.log_begin(0, i), 1e-9);
      EXPECT_NEAR(p.log_end(0, i), d.log_end(0, i), 1e-9);
    }
  }
}

TEST(Logsumexp, StableAndHandlesEmpty) {
  const std::vector<double> big{1e4, 1e4};
  EXPECT_NEAR(dsqa::logsumexp(big), 1e4 + std::log(2.0), 1e-9);
  EXPECT_EQ(dsqa::logsumexp(std::vector<double>{}), dsqa::kNegInf);
  EXPECT_NEAR(dsqa::logaddexp(dsqa::kNegInf, 2.0), 2.0, 0.0);
}
