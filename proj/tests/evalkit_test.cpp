#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dsqa/evalkit.hpp"

namespace {

std::vector<std::string> golds(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST(ExactMatch, Examples) {
  EXPECT_EQ(dsqa::exact_match("Joan Rivers.", golds({"joan rivers"})), 1);
  EXPECT_EQ(dsqa::exact_match("mount helicon", golds({"in the spring at mount helicon"})), 0);
  EXPECT_EQ(dsqa::exact_match("", golds({""})), 1);
  EXPECT_EQ(dsqa::exact_match("x", golds({})), 0);
}

TEST(TokenF1, Examples) {
  EXPECT_DOUBLE_EQ(dsqa::token_f1("mount helicon", golds({"in the spring at mount helicon"})), 0.5);
  EXPECT_DOUBLE_EQ(dsqa::token_f1("joan rivers", golds({"Joan Rivers"})), 1.0);
  EXPECT_DOUBLE_EQ(dsqa::token_f1("alpha beta", golds({"gamma delta"})), 0.0);
  EXPECT_DOUBLE_EQ(dsqa::token_f1("x", golds({"y", "x z"})), 2.0 / 3.0);
}

TEST(TokenF1, HandOracleCounts) {
  // Bag of tokens: pred has two "x"; gold has one, so one match.
  const double p = 1.0 / 3.0, r = 1.0 / 2.0;
  EXPECT_DOUBLE_EQ(dsqa::token_f1("x y x", golds({"x z"})), 2 * p * r / (p + r));
}

TEST(RougeL, Examples) {
  const auto s = dsqa::rouge_l_detail("mount helicon", "at mount helicon");
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.f, 0.8);
  EXPECT_DOUBLE_EQ(dsqa::rouge_l("x y z", "x y z"), 1.0);
  EXPECT_DOUBLE_EQ(dsqa::rouge_l("x y", "p q"), 0.0);
  EXPECT_DOUBLE_EQ(dsqa::rouge_l("", "p q"), 0.0);
}

TEST(RougeL, SubsequenceNotSubstring) {
  // LCS("w x y z", "x z") = 2.
  const auto s = dsqa::rouge_l_detail("w x y z", "x z");
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(RougeL, PrecisionAndRecallSwapWithArguments) {
  const auto ab = dsqa::rouge_l_detail("mount helicon", "at mount helicon");
  const auto ba = dsqa::rouge_l_detail("at mount helicon", "mount helicon");
  EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
  EXPECT_DOUBLE_EQ(ab.recall, ba.precision);
  EXPECT_NE(ab.precision, ba.precision);
  EXPECT_DOUBLE_EQ(ab.f, ba.f);
  const auto eq = dsqa::rouge_l_detail("x y z", "z y x");
  const auto qe = dsqa::rouge_l_detail("z y x", "x y z");
  EXPECT_DOUBLE_EQ(eq.precision, qe.precision);
  EXPECT_DOUBLE_EQ(eq.recall, qe.recall);
}

TEST(Metrics, RandomPropertyChecks) {
  std::mt19937_64 rng(41);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "the", "e"};
  auto sentence = [&] {
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < n; ++i) s += vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)] + " ";
    return s;
  };
  for (int t = 0; t < 500; ++t) {
    const auto x = sentence(), y = sentence();
    const std::vector<std::string> gy{y}, gx{x};
    if (dsqa::exact_match(x, gy)) EXPECT_DOUBLE_EQ(dsqa::token_f1(x, gy), 1.0);
    EXPECT_DOUBLE_EQ(dsqa::token_f1(x, gy), dsqa::token_f1(y, gx));
    const double r = dsqa::rouge_l(x, y);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    if (!dsqa::normalize_string(x).empty()) EXPECT_DOUBLE_EQ(dsqa::rouge_l(x, x), 1.0);
  }
}

TEST(Partition, ClassifyThresholds) {
  EXPECT_EQ(dsqa::classify(1, 3), dsqa::Subset::SS);
  EXPECT_EQ(dsqa::classify(2, 7), dsqa::Subset::LL);
  EXPECT_EQ(dsqa::classify(2, 5), dsqa::Subset::LS);
  EXPECT_EQ(dsqa::classify(1, 6), dsqa::Subset::SL);
  EXPECT_EQ(dsqa::subset_name(dsqa::Subset::SS), "Q_ss");
}

TEST(Partition, MeansDeltasAndSizes) {
  std::vector<dsqa::ExampleScore> xs{
      {"a", 1, 3, 1.0, 0.5}, {"b", 1, 2, 0.0, 0.0}, {"c", 2, 7, 0.5, 1.0}, {"d", 3, 1, 1.0, 1.0}, {"e", 1, 9, 0.25, 0.0}};
  const auto r = dsqa::partition_analysis(xs);
  EXPECT_DOUBLE_EQ(r.mean, 2.75 / 5.0);
  EXPECT_DOUBLE_EQ(*r.baseline_mean, 2.5 / 5.0);
  std::size_t total = 0;
  for (const auto& [s, st] : r.subsets) total += st.size;
  EXPECT_EQ(total, xs.size());
  const auto& ss = r.subsets.at(dsqa::Subset::SS);
  EXPECT_EQ(ss.size, 2u);
  EXPECT_DOUBLE_EQ(ss.mean, 0.5);
  EXPECT_DOUBLE_EQ(*ss.delta, 0.25);
  EXPECT_DOUBLE_EQ(*r.subsets.at(dsqa::Subset::LL).delta, -0.5);
  EXPECT_EQ(r.subsets.at(dsqa::Subset::LS).size, 1u);
  EXPECT_EQ(r.subsets.at(dsqa::Subset::SL).size, 1u);
  const auto j = dsqa::to_json(r);
  EXPECT_EQ(j["subsets"]["Q_ss"]["size"], 2);
}

TEST(Partition, EmptyEvaluationSet) {
  const auto r = dsqa::partition_analysis({});
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_FALSE(r.baseline_mean.has_value());
  for (const auto& [s, st] : r.subsets) EXPECT_EQ(st.size, 0u);
  EXPECT_EQ(dsqa::to_json(r)["count"], 0);
  EXPECT_THROW(dsqa::partition_analysis({}, 0), dsqa::DomainError);
}

TEST(Partition, CustomThresholds) {
  std::vector<dsqa::ExampleScore> xs{{"a", 2, 3, 1.0, std::nullopt}};
  const auto r = dsqa::partition_analysis(xs, 2, 2);
  EXPECT_EQ(r.subsets.at(dsqa::Subset::SL).size, 1u);
  EXPECT_FALSE(r.subsets.at(dsqa::Subset::SL).delta.has_value());
}
