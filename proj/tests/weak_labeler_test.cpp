#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "dsqa/evalkit.hpp"
#include "dsqa/weak_labeler.hpp"

namespace {

using Triple = std::tuple<int, int, int>;

dsqa::DocumentQuestionPair pair_of(std::vector<std::string> paragraphs, std::vector<std::string> answers) {
  return dsqa::make_pair("doc", "q", paragraphs, answers);
}

std::set<Triple> triples(const dsqa::ConsistentLabelSet& labels) {
  std::set<Triple> out;
  for (const auto& s : labels.all_spans()) out.insert({s.paragraph, s.begin, s.end});
  return out;
}

// Every span of length <= l_max whose normalized text is in normalized A.
std::set<Triple> brute_force(const dsqa::DocumentQuestionPair& pair, int l_max) {
  std::set<Triple> out;
  for (const auto& p : pair.paragraphs)
    for (int i = 0; i < static_cast<int>(p.size()); ++i)
      for (int j = i; j < static_cast<int>(p.size()) && j - i + 1 <= l_max; ++j) {
        const auto text = dsqa::normalize_string(dsqa::span_text(p, i, j));
        if (!text.empty() && pair.answers.contains_normalized(text)) out.insert({p.index, i, j});
      }
  return out;
}

}  // namespace

TEST(ExactLabeler, TwoMatches) {
  const auto pair = pair_of({"joan rivers said joan rivers"}, {"Joan Rivers"});
  const auto labels = dsqa::find_consistent_spans_exact(pair);
  EXPECT_EQ(triples(labels), (std::set<Triple>{{0, 0, 1}, {0, 3, 4}}));
  EXPECT_FALSE(labels.is_null(0));
}

TEST(ExactLabeler, NestedAnswersBothLabeled) {
  const auto pair = pair_of({"they met in the spring at mount helicon that year"},
                            {"mount helicon", "in the spring at mount helicon"});
  const auto labels = dsqa::find_consistent_spans_exact(pair);
  EXPECT_EQ(triples(labels), (std::set<Triple>{{0, 2, 7}, {0, 6, 7}}));
}

TEST(ExactLabeler, NoMatchGivesNullParagraph) {
  const auto pair = pair_of({"nothing here", "joan rivers"}, {"Joan Rivers"});
  const auto labels = dsqa::find_consistent_spans_exact(pair);
  EXPECT_TRUE(labels.is_null(0));
  EXPECT_TRUE(labels.spans(0).empty());
  EXPECT_FALSE(labels.is_null(1));
  EXPECT_EQ(labels.positive_paragraphs(), 1u);
}

TEST(ExactLabeler, RespectsSpanCap) {
  const auto pair = pair_of({"a b c d"}, {"b c d"});
  EXPECT_EQ(dsqa::find_consistent_spans_exact(pair, 2).total_spans(), 0u);
  EXPECT_EQ(dsqa::find_consistent_spans_exact(pair, 3).total_spans(), 1u);
  EXPECT_THROW(dsqa::find_consistent_spans_exact(pair, 0), dsqa::DomainError);
}

TEST(ExactLabeler, MatchesBruteForceOnRandomParagraphs) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab{"x", "y", "z", "the", "a", "w"};
  for (int t = 0; t < 300; ++t) {
    std::vector<std::string> paragraphs;
    const int k = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int p = 0; p < k; ++p) {
      std::string text;
      const int n = std::uniform_int_distribution<int>(1, 30)(rng);
      for (int i = 0; i < n; ++i) text += vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)] + " ";
      paragraphs.push_back(text);
    }
    std::vector<std::string> answers{"x y", "z", "the x", "w w w"};
    const auto pair = pair_of(paragraphs, answers);
    const int l_max = std::uniform_int_distribution<int>(1, 8)(rng);
    const auto labels = dsqa::find_consistent_spans_exact(pair, l_max);
    ASSERT_EQ(triples(labels), brute_force(pair, l_max)) << "trial " << t;
  }
}

TEST(LabelSet, ProjectionsAndNullFlags) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<dsqa::SpanLabel> spans;
    const std::size_t paragraphs = 4;
    const int count = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int c = 0; c < count; ++c) {
      const int k = std::uniform_int_distribution<int>(0, 3)(rng);
      const int b = std::uniform_int_distribution<int>(0, 9)(rng);
      const int e = b + std::uniform_int_distribution<int>(0, 3)(rng);
      spans.push_back({k, b, e, "s"});
    }
    dsqa::ConsistentLabelSet labels(paragraphs, spans, 1);
    std::size_t total = 0;
    for (std::size_t k = 0; k < paragraphs; ++k) {
      std::set<int> begins, ends;
      for (const auto& s : labels.spans(k)) {
        begins.insert(s.begin);
        ends.insert(s.end);
      }
      EXPECT_EQ(std::set<int>(labels.begins(k).begin(), labels.begins(k).end()), begins);
      EXPECT_EQ(std::set<int>(labels.ends(k).begin(), labels.ends(k).end()), ends);
      EXPECT_EQ(labels.is_null(k), labels.spans(k).empty());
      total += labels.spans(k).size();
    }
    EXPECT_EQ(labels.total_spans(), total);
  }
}

TEST(RougeLabeler, KeepsPartialOverlapAboveThreshold) {
  const auto pair = pair_of({"she went to mount helicon"}, {"at mount helicon"});
  const auto labels = dsqa::find_consistent_spans_rouge(pair, 8, 0.5);
  EXPECT_TRUE(triples(labels).contains(Triple{0, 3, 4}));
  EXPECT_DOUBLE_EQ(dsqa::rouge_l("mount helicon", "at mount helicon"), 0.8);
}

TEST(RougeLabeler, IdenticalSpanKeptAtAnyThreshold) {
  const auto pair = pair_of({"x mount helicon y"}, {"mount helicon"});
  EXPECT_TRUE(triples(dsqa::find_consistent_spans_rouge(pair, 8, 1.0)).contains(Triple{0, 1, 2}));
}

TEST(RougeLabeler, NoSharedTokenGivesEmpty) {
  const auto pair = pair_of({"p q r"}, {"mount helicon"});
  EXPECT_EQ(dsqa::find_consistent_spans_rouge(pair).total_spans(), 0u);
  EXPECT_THROW(dsqa::find_consistent_spans_rouge(pair, 8, 0.0), dsqa::DomainError);
}

TEST(RougeLabeler, SoundAgainstThresholdOrArgmax) {
  const auto pair = pair_of({"a b c d e f b c", "c x y"}, {"b c d", "x y z w"});
  const double threshold = 0.7;
  const auto labels = dsqa::find_consistent_spans_rouge(pair, 8, threshold);
  for (std::size_t k = 0; k < labels.num_paragraphs(); ++k) {
    double best = 0.0;
    const auto& p = pair.paragraphs[k];
    for (int i = 0; i < static_cast<int>(p.size()); ++i)
      for (int j = i; j < static_cast<int>(p.size()); ++j)
        for (const auto& a : pair.answers.entries()) best = std::max(best, dsqa::rouge_l(dsqa::span_text(p, i, j), a.raw));
    for (const auto& s : labels.spans(k)) {
      double score = 0.0;
      for (const auto& a : pair.answers.entries())
        score = std::max(score, dsqa::rouge_l(dsqa::span_text(p, s.begin, s.end), a.raw));
      EXPECT_TRUE(score >= threshold || score == best) << "span " << s.begin << "," << s.end;
    }
  }
}

TEST(Counts, Examples) {
  const auto one = dsqa::find_consistent_spans_exact(pair_of({"x q x q x"}, {"x"}));
  EXPECT_EQ(dsqa::counts(one).answers, 1u);
  EXPECT_EQ(dsqa::counts(one).spans, 3u);
  const auto two = dsqa::find_consistent_spans_exact(pair_of({"x y x y x y x", "q"}, {"x", "y"}));
  EXPECT_EQ(dsqa::counts(two).answers, 2u);
  EXPECT_EQ(dsqa::counts(two).spans, 7u);
  const auto none = dsqa::find_consistent_spans_exact(pair_of({"q"}, {"x", "y"}));
  EXPECT_EQ(dsqa::counts(none).answers, 2u);
  EXPECT_EQ(dsqa::counts(none).spans, 0u);
}

TEST(LabelFile, RoundTrip) {
  const auto pair = pair_of({"joan rivers said joan rivers", "none", "joan rivers"}, {"Joan Rivers"});
  const auto labels = dsqa::find_consistent_spans_exact(pair);
  std::istringstream in(dsqa::labels_to_json(pair.id, labels).dump() + "\n");
  const auto records = dsqa::read_label_records(in);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].id, "doc");
  const auto back = dsqa::labels_from_triples(pair, records[0].spans);
  EXPECT_EQ(triples(back), triples(labels));
  EXPECT_EQ(back.answer_count(), labels.answer_count());
}

TEST(LabelFile, RejectsOutOfRangeAndMalformed) {
  const auto pair = pair_of({"a b"}, {"b"});
  const std::vector<std::array<int, 3>> bad{{0, 1, 5}};
  EXPECT_THROW(dsqa::labels_from_triples(pair, bad), dsqa::DomainError);
  std::istringstream in("{\"id\":\"doc\",\"spans\":[[0,1]]}\n");
  EXPECT_THROW(dsqa::read_label_records(in), dsqa::SchemaError);
}
