#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dsqa/selfcheck.hpp"
#include "dsqa/trainer.hpp"

namespace {

dsqa::DocumentQuestionPair doc(const std::string& id, const std::string& question, std::vector<std::string> paragraphs,
                               std::vector<std::string> answers) {
  return dsqa::make_pair(id, question, paragraphs, answers);
}

// Each answer token appears once per document, always right after the
// question's cue word, and never elsewhere.
std::vector<dsqa::DocumentQuestionPair> separable_corpus(int documents, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<dsqa::DocumentQuestionPair> out;
  for (int d = 0; d < documents; ++d) {
    const std::string cue = "cue" + std::to_string(pick(5));
    const std::string answer = "ans" + std::to_string(d);
    std::vector<std::string> paragraphs;
    for (int k = 0; k < 2; ++k) {
      std::string text;
      const int at = k == 0 ? pick(6) : -1;
      for (int i = 0; i < 8; ++i) {
        if (i == at) text += cue + " " + answer + " ";
        else text += "w" + std::to_string(pick(20)) + " ";
      }
      paragraphs.push_back(text);
    }
    out.push_back(doc("d" + std::to_string(d), cue, paragraphs, {answer}));
  }
  return out;
}

std::vector<dsqa::ConsistentLabelSet> exact_labels(const std::vector<dsqa::DocumentQuestionPair>& pairs) {
  std::vector<dsqa::ConsistentLabelSet> out;
  for (const auto& p : pairs) out.push_back(dsqa::find_consistent_spans_exact(p));
  return out;
}

dsqa::TrainConfig small_config(const std::string& objective) {
  dsqa::TrainConfig c;
  c.objectives = {objective};
  c.dim = 4;
  c.epochs = 3;
  c.learning_rate = 0.2;
  c.batch_size = 4;
  return c;
}

}  // namespace

TEST(Scorer, ZeroParametersGiveZeroScores) {
  const auto pairs = separable_corpus(3, 1);
  dsqa::ToyScorer scorer(dsqa::Vocabulary::build(pairs), 5);
  const auto g = dsqa::score(scorer, pairs[0]);
  g.for_each_entry([](double v) { EXPECT_EQ(v, 0.0); });
  ASSERT_EQ(g.size(), pairs[0].paragraphs.size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.paragraphs[k].num_tokens(), pairs[0].paragraphs[k].size());
}

TEST(Scorer, IdenticalParagraphsScoreIdentically) {
  const auto pair = doc("a", "cue1 w2", {"w1 cue1 x w2 y", "w1 cue1 x w2 y", "other words"}, {"x"});
  const std::vector<dsqa::DocumentQuestionPair> pairs{pair};
  auto scorer = dsqa::initial_scorer(small_config("H2-P-pos-mml"), pairs);
  std::mt19937_64 rng(2);
  for (auto& v : scorer.params()) v = std::normal_distribution<double>(0.0, 0.5)(rng);
  const auto g = dsqa::score(scorer, pair);
  EXPECT_EQ(g.paragraphs[0].begin, g.paragraphs[1].begin);
  EXPECT_EQ(g.paragraphs[0].end, g.paragraphs[1].end);
  EXPECT_NE(g.paragraphs[0].begin, g.paragraphs[2].begin);
}

TEST(Scorer, BeginWeightsDoNotAffectEndScores) {
  const auto pairs = separable_corpus(2, 3);
  auto scorer = dsqa::initial_scorer(small_config("H2-P-pos-mml"), pairs);
  std::mt19937_64 rng(4);
  for (auto& v : scorer.params()) v = std::normal_distribution<double>(0.0, 0.5)(rng);
  const auto before = dsqa::score(scorer, pairs[0]);
  for (std::size_t x = scorer.w_begin_offset(); x < scorer.w_end_offset(); ++x) scorer.params()[x] += 0.3;
  const auto after = dsqa::score(scorer, pairs[0]);
  for (std::size_t k = 0; k < before.size(); ++k) {
    EXPECT_EQ(before.paragraphs[k].end, after.paragraphs[k].end);
    EXPECT_NE(before.paragraphs[k].begin, after.paragraphs[k].begin);
  }
}

TEST(Scorer, UnknownTokensUseReservedRow) {
  const auto pairs = separable_corpus(2, 5);
  dsqa::ToyScorer scorer(dsqa::Vocabulary::build(pairs), 3);
  const auto unseen = doc("u", "never seen", {"brand new words"}, {"new"});
  const auto enc = dsqa::encode(scorer.vocab(), unseen);
  for (int t : enc.paragraphs[0]) EXPECT_EQ(t, dsqa::Vocabulary::kUnknown);
  EXPECT_EQ(dsqa::score(scorer, unseen).paragraphs[0].num_tokens(), 3u);
}

TEST(Scorer, EndToEndGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 3; ++t) {
    const auto pair = dsqa::random_document(rng, 2, 6);
    const std::vector<dsqa::DocumentQuestionPair> pairs{pair};
    dsqa::ToyScorer scorer(dsqa::Vocabulary::build(pairs), 3);
    for (auto& v : scorer.params()) v = std::normal_distribution<double>(0.0, 0.5)(rng);
    const auto labels = dsqa::find_consistent_spans_exact(pair);
    if (labels.total_spans() == 0) continue;
    for (const char* spec : {"H1-P-span-mml", "H2-P-pos-mml", "H2-D-span-mml", "H3-D-pos-mml", "H3-D-span-hardem"})
      EXPECT_LT(dsqa::scorer_grad_check(scorer, pair, labels, dsqa::parse_objective(spec)), 1e-4) << spec;
  }
}

TEST(Train, SeparableCorpusObjectiveStrictlyIncreases) {
  const auto pairs = separable_corpus(60, 7);
  const auto labels = exact_labels(pairs);
  auto config = small_config("H2-P-pos-mml");
  config.dim = 8;
  config.learning_rate = 0.1;
  const auto ck = dsqa::train(config, pairs, labels);
  ASSERT_EQ(ck.history.size(), 3u);
  EXPECT_LT(ck.history[0].mean_objective, ck.history[1].mean_objective);
  EXPECT_LT(ck.history[1].mean_objective, ck.history[2].mean_objective);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto pairs = separable_corpus(20, 8);
  const auto labels = exact_labels(pairs);
  auto config = small_config("H3-D-pos-mml");
  config.learning_rate = 0.0;
  const auto ck = dsqa::train(config, pairs, labels);
  EXPECT_EQ(ck.scorer.params(), dsqa::initial_scorer(config, pairs).params());
  for (const auto& m : ck.history) EXPECT_EQ(m.mean_objective, ck.history.front().mean_objective);
}

TEST(Train, SameSeedIsBitIdentical) {
  const auto pairs = separable_corpus(30, 9);
  const auto labels = exact_labels(pairs);
  auto config = small_config("H2-P-pos-mml");
  config.objectives = {"H2-P-pos-mml", "H3-D-span-mml"};
  config.momentum = 0.5;
  const auto a = dsqa::train(config, pairs, labels);
  const auto b = dsqa::train(config, pairs, labels);
  EXPECT_EQ(dsqa::to_json(a).dump(), dsqa::to_json(b).dump());
  config.seed = 2;
  EXPECT_NE(dsqa::train(config, pairs, labels).scorer.params(), a.scorer.params());
}

TEST(Train, InputOrderDoesNotMatter) {
  auto pairs = separable_corpus(20, 10);
  auto labels = exact_labels(pairs);
  const auto config = small_config("H2-D-pos-mml");
  const auto a = dsqa::train(config, pairs, labels);
  std::reverse(pairs.begin(), pairs.end());
  std::reverse(labels.begin(), labels.end());
  const auto b = dsqa::train(config, pairs, labels);
  EXPECT_EQ(a.scorer.params(), b.scorer.params());
}

TEST(Train, SkipsDocumentLevelExamplesWithoutSpans) {
  auto pairs = separable_corpus(10, 11);
  pairs.push_back(doc("none1", "cue1", {"no answer here"}, {"missing"}));
  pairs.push_back(doc("none2", "cue2", {"still nothing"}, {"absent"}));
  const auto labels = exact_labels(pairs);
  std::size_t empty = 0;
  for (const auto& l : labels) empty += l.total_spans() == 0;
  const auto d = dsqa::train(small_config("H3-D-pos-mml"), pairs, labels);
  EXPECT_EQ(d.history.back().skipped, empty);
  EXPECT_EQ(d.history.back().documents, pairs.size() - empty);
  const auto p = dsqa::train(small_config("H2-P-pos-mml"), pairs, labels);
  EXPECT_EQ(p.history.back().skipped, 0u);
}

TEST(Train, CheckpointRoundTripScoresBitIdentical) {
  const auto pairs = separable_corpus(10, 12);
  const auto ck = dsqa::train(small_config("H2-P-pos-mml"), pairs, exact_labels(pairs));
  const auto path = (std::filesystem::temp_directory_path() / "dsqa_trainer_test_ckpt.json").string();
  dsqa::save_checkpoint(path, ck);
  const auto back = dsqa::load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.config_fingerprint, ck.config_fingerprint);
  EXPECT_EQ(back.history.size(), ck.history.size());
  for (const auto& p : pairs) {
    const auto a = dsqa::score(ck.scorer, p);
    const auto b = dsqa::score(back.scorer, p);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a.paragraphs[k].begin, b.paragraphs[k].begin);
      EXPECT_EQ(a.paragraphs[k].end, b.paragraphs[k].end);
    }
  }
  EXPECT_THROW(dsqa::checkpoint_from_json(nlohmann::json{{"format", "other"}}), dsqa::Error);
}

TEST(Pretrain, EmptyDataIsIdentity) {
  const auto pairs = separable_corpus(10, 13);
  const auto init = dsqa::train(small_config("H2-P-pos-mml"), pairs, exact_labels(pairs));
  const auto out = dsqa::pretrain_clean(small_config("H2-P-pos-mml"), {}, {}, &init);
  EXPECT_EQ(out.scorer.params(), init.scorer.params());
  EXPECT_EQ(out.history.size(), init.history.size());
}

TEST(Pretrain, SingletonLabelsMakeH1EqualH2AndSeedFineTuning) {
  const auto pairs = separable_corpus(30, 14);
  const auto labels = exact_labels(pairs);
  auto scorer = dsqa::initial_scorer(small_config("H2-P-pos-mml"), pairs);
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto g = dsqa::score(scorer, pairs[n]);
    EXPECT_NEAR(dsqa::evaluate(dsqa::parse_objective("H1-P-span-mml"), g, labels[n]).value,
                dsqa::evaluate(dsqa::parse_objective("H2-P-span-mml"), g, labels[n]).value, 1e-12);
  }
  const auto pre = dsqa::pretrain_clean(small_config("H2-P-pos-mml"), pairs, labels);
  EXPECT_EQ(pre.config.objectives, std::vector<std::string>{"H1-P-span-mml"});
  const auto tuned = dsqa::train(small_config("H3-D-pos-mml"), pairs, labels, &pre);
  EXPECT_EQ(tuned.history.size(), 6u);

  const auto multi = doc("m", "cue1", {"x x"}, {"x"});
  const std::vector<dsqa::DocumentQuestionPair> bad{multi};
  const std::vector<dsqa::ConsistentLabelSet> bad_labels{dsqa::find_consistent_spans_exact(multi)};
  EXPECT_THROW(dsqa::pretrain_clean(small_config("H2-P-pos-mml"), bad, bad_labels), dsqa::DomainError);
}

TEST(Pretrain, FineTuneExtendsVocabulary) {
  const auto a = separable_corpus(5, 15);
  const auto b = doc("z", "fresh", {"fresh tokens only"}, {"only"});
  const auto pre = dsqa::pretrain_clean(small_config("H2-P-pos-mml"), a, exact_labels(a));
  const std::vector<dsqa::DocumentQuestionPair> more{b};
  const auto tuned = dsqa::train(small_config("H2-P-pos-mml"), more, exact_labels(more), &pre);
  EXPECT_NE(tuned.scorer.vocab().id("fresh"), dsqa::Vocabulary::kUnknown);
  EXPECT_EQ(tuned.scorer.params().size(),
            dsqa::ToyScorer::layout_size(tuned.scorer.vocab().size(), tuned.scorer.dim()));
}

TEST(TrainConfig, ValidationAndJsonRoundTrip) {
  dsqa::TrainConfig c;
  c.objectives = {"H2-P-pos-mml", "H3-D-pos-mml"};
  c.weights = {1.0, 0.5};
  c.learning_rate = 0.05;
  c.l2 = 1e-3;
  const auto back = dsqa::train_config_from_json(dsqa::to_json(c));
  EXPECT_EQ(dsqa::to_json(back), dsqa::to_json(c));
  EXPECT_EQ(dsqa::fingerprint(dsqa::to_json(back)), dsqa::fingerprint(dsqa::to_json(c)));

  auto bad = c;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), dsqa::DomainError);
  bad = c;
  bad.weights = {1.0};
  EXPECT_THROW(bad.validate(), dsqa::DomainError);
  bad = c;
  bad.objectives = {"H3-P-pos-mml"};
  EXPECT_THROW(bad.validate(), dsqa::SpecError);
  bad = c;
  bad.learning_rate = -1.0;
  EXPECT_THROW(bad.validate(), dsqa::DomainError);
}

TEST(TrainConfig, InferenceSpaceFollowsObjectives) {
  dsqa::TrainConfig c;
  c.objectives = {"H2-P-pos-mml"};
  EXPECT_EQ(dsqa::inference_space(c), dsqa::SpaceKind::ParagraphLevel);
  c.objectives = {"H2-P-pos-mml", "H3-D-pos-mml"};
  EXPECT_EQ(dsqa::inference_space(c), dsqa::SpaceKind::DocumentLevel);
}
