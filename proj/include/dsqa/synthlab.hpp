#pragma once

// Synthetic distantly-supervised corpora with controllable label noise.
//
// Every document has a gold answer string. Its correct mentions sit next
// to tokens of the question (question cues). A positive paragraph is,
// with probability `alias_rate`, alias-only: it mentions another member
// of A in a context drawn from a separate pool that never overlaps the
// question, so the mention is consistent but incorrect. Distractor
// entities (never in A) fill the remaining slots, usually next to cues
// of some other question. Labels come from the exact weak labeler run
// on the generated text.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"
#include "dsqa/evalkit.hpp"
#include "dsqa/inference.hpp"
#include "dsqa/objectives.hpp"
#include "dsqa/trainer.hpp"
#include "dsqa/weak_labeler.hpp"

namespace dsqa {

struct NoiseProfile {
  int entity_vocab = 300;
  int cue_vocab = 150;
  int filler_vocab = 400;
  // Context tokens reserved for alias mentions. The pool is large so no
  // single token carries signal; 0 gives distractor-like contexts instead.
  int alias_context_vocab = 5000;
  int documents = 2000;
  int dev_documents = 500;
  int paragraphs = 4;
  int tokens = 40;
  int question_cues = 3;
  int max_answer_tokens = 2;
  // Correct mentions per gold paragraph, uniform in [min, max].
  int mentions_min = 1;
  int mentions_max = 1;
  double alias_rate = 0.0;
  double distractor_rate = 0.25;
  double multi_answer_rate = 0.0;
  int distractors_per_paragraph = 3;
  // Chance that a distractor entity sits next to a cue of the question.
  double cue_noise = 0.1;
  // Chance that a correct mention has only one question cue beside it.
  double weak_context_rate = 0.3;
  std::uint64_t seed = 7;

  void validate() const {
    for (double r : {alias_rate, distractor_rate, multi_answer_rate, cue_noise, weak_context_rate})
      if (!(r >= 0.0 && r <= 1.0)) throw DomainError("noise profile rates must lie in [0, 1]");
    for (int c : {entity_vocab, cue_vocab, filler_vocab, documents, paragraphs, tokens,
                  question_cues, max_answer_tokens, mentions_min, mentions_max})
      if (c < 1) throw DomainError("noise profile counts must be >= 1");
    if (dev_documents < 0 || distractors_per_paragraph < 0 || alias_context_vocab < 0) throw DomainError("noise profile counts must be >= 0");
    if (mentions_max < mentions_min) throw DomainError("mentions_max < mentions_min");
    if (question_cues >= cue_vocab) throw DomainError("cue vocabulary too small for the question size");
    if (slot_count() < mentions_max) throw DomainError("paragraphs too short for the requested mentions");
    if (entity_vocab < 4 * max_answer_tokens + distractors_per_paragraph + 1)
      throw DomainError("entity vocabulary too small");
  }
  int slot_width() const { return 4 + max_answer_tokens; }
  int slot_count() const { return tokens / slot_width(); }
};

inline nlohmann::json to_json(const NoiseProfile& p) {
  return {{"entity_vocab", p.entity_vocab},
          {"cue_vocab", p.cue_vocab},
          {"filler_vocab", p.filler_vocab},
          {"alias_context_vocab", p.alias_context_vocab},
          {"documents", p.documents},
          {"dev_documents", p.dev_documents},
          {"paragraphs", p.paragraphs},
          {"tokens", p.tokens},
          {"question_cues", p.question_cues},
          {"max_answer_tokens", p.max_answer_tokens},
          {"mentions_min", p.mentions_min},
          {"mentions_max", p.mentions_max},
          {"alias_rate", p.alias_rate},
          {"distractor_rate", p.distractor_rate},
          {"multi_answer_rate", p.multi_answer_rate},
          {"distractors_per_paragraph", p.distractors_per_paragraph},
          {"cue_noise", p.cue_noise},
          {"weak_context_rate", p.weak_context_rate},
          {"seed", p.seed}};
}

inline NoiseProfile noise_profile_from_json(const nlohmann::json& j) {
  NoiseProfile p;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("entity_vocab", p.entity_vocab);
  get("cue_vocab", p.cue_vocab);
  get("filler_vocab", p.filler_vocab);
  get("alias_context_vocab", p.alias_context_vocab);
  get("documents", p.documents);
  get("dev_documents", p.dev_documents);
  get("paragraphs", p.paragraphs);
  get("tokens", p.tokens);
  get("question_cues", p.question_cues);
  get("max_answer_tokens", p.max_answer_tokens);
  get("mentions_min", p.mentions_min);
  get("mentions_max", p.mentions_max);
  get("alias_rate", p.alias_rate);
  get("distractor_rate", p.distractor_rate);
  get("multi_answer_rate", p.multi_answer_rate);
  get("distractors_per_paragraph", p.distractors_per_paragraph);
  get("cue_noise", p.cue_noise);
  get("weak_context_rate", p.weak_context_rate);
  get("seed", p.seed);
  p.validate();
  return p;
}

enum class ParagraphRole { Gold, Alias, Distractor };

struct SyntheticTruth {
  std::string gold;  // normalized gold answer string
  std::vector<SpanLabel> correct_spans;
  std::vector<ParagraphRole> roles;
};

struct SyntheticCorpus {
  std::vector<DocumentQuestionPair> pairs;
  std::vector<ConsistentLabelSet> labels;
  std::vector<SyntheticTruth> truth;

  // Clean supervision: the first correct span of each paragraph, NULL
  // elsewhere.
  std::vector<ConsistentLabelSet> clean_labels() const;
};

struct SyntheticSplit {
  SyntheticCorpus train;
  SyntheticCorpus dev;
};

inline std::vector<ConsistentLabelSet> SyntheticCorpus::clean_labels() const {
  std::vector<ConsistentLabelSet> out;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    std::vector<SpanLabel> keep;
    std::set<int> seen;
    for (const auto& s : truth[n].correct_spans)
      if (seen.insert(s.paragraph).second) keep.push_back(s);
    out.emplace_back(pairs[n].paragraphs.size(), std::move(keep), pairs[n].answers.size());
  }
  return out;
}

namespace detail {

class CorpusBuilder {
 public:
  CorpusBuilder(const NoiseProfile& p, std::uint64_t seed) : p_(p), rng_(seed) {}

  void build(int count, const std::string& prefix, SyntheticCorpus& out) {
    for (int n = 0; n < count; ++n) build_document(prefix + std::to_string(n), out);
  }

 private:
  static std::string ent(int i) { return "ent" + std::to_string(i); }
  static std::string cue(int i) { return "cue" + std::to_string(i); }
  static std::string fill(int i) { return "w" + std::to_string(i); }
  static std::string alias_ctx(int i) { return "ac" + std::to_string(i); }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double prob) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < prob; }

  std::vector<int> draw_entities(int count, std::set<int>& used) {
    std::vector<int> out;
    while (static_cast<int>(out.size()) < count) {
      const int e = uniform(0, p_.entity_vocab - 1);
      if (used.insert(e).second) out.push_back(e);
    }
    return out;
  }

  std::string random_filler() { return fill(uniform(0, p_.filler_vocab - 1)); }

  int other_cue(const std::vector<int>& question) {
    for (;;) {
      const int c = uniform(0, p_.cue_vocab - 1);
      if (std::find(question.begin(), question.end(), c) == question.end()) return c;
    }
  }

  enum class SlotKind { Correct, Alias, Distractor };

  // Writes an item into tokens[start, start + slot_width): two context
  // tokens, the answer tokens, two context tokens, filler to the end.
  void place(std::vector<std::string>& tokens, int start, SlotKind kind, const std::vector<std::string>& item,
             const std::vector<int>& question) {
    std::vector<std::string> ctx(4);
    switch (kind) {
      case SlotKind::Correct: {
        const int strong = coin(p_.weak_context_rate) ? 1 : 2;
        for (auto& c : ctx) c = cue(other_cue(question));
        std::vector<int> slots{0, 1, 2, 3};
        std::shuffle(slots.begin(), slots.end(), rng_);
        for (int s = 0; s < strong; ++s)
          ctx[static_cast<std::size_t>(slots[static_cast<std::size_t>(s)])] =
              cue(question[static_cast<std::size_t>(uniform(0, static_cast<int>(question.size()) - 1))]);
        break;
      }
      case SlotKind::Alias:
        for (auto& c : ctx)
          c = p_.alias_context_vocab > 0 ? alias_ctx(uniform(0, p_.alias_context_vocab - 1))
                                         : (coin(0.5) ? cue(other_cue(question)) : random_filler());
        break;
      case SlotKind::Distractor:
        for (auto& c : ctx) c = coin(0.5) ? cue(other_cue(question)) : random_filler();
        if (coin(p_.cue_noise))
          ctx[static_cast<std::size_t>(uniform(0, 3))] =
              cue(question[static_cast<std::size_t>(uniform(0, static_cast<int>(question.size()) - 1))]);
        break;
    }
    int pos = start;
    tokens[static_cast<std::size_t>(pos++)] = ctx[0];
    tokens[static_cast<std::size_t>(pos++)] = ctx[1];
    for (const auto& t : item) tokens[static_cast<std::size_t>(pos++)] = t;
    tokens[static_cast<std::size_t>(pos++)] = ctx[2];
    tokens[static_cast<std::size_t>(pos++)] = ctx[3];
  }

  std::vector<std::string> entity_string(const std::vector<int>& ids) {
    std::vector<std::string> out;
    for (int e : ids) out.push_back(ent(e));
    return out;
  }

  void build_document(const std::string& id, SyntheticCorpus& out) {
    std::vector<int> question;
    while (static_cast<int>(question.size()) < p_.question_cues) {
      const int c = uniform(0, p_.cue_vocab - 1);
      if (std::find(question.begin(), question.end(), c) == question.end()) question.push_back(c);
    }

    std::set<int> used;
    const auto gold = entity_string(draw_entities(uniform(1, p_.max_answer_tokens), used));
    const auto alias = entity_string(draw_entities(uniform(1, p_.max_answer_tokens), used));

    std::vector<ParagraphRole> roles;
    for (int k = 0; k < p_.paragraphs; ++k) {
      if (coin(p_.distractor_rate)) roles.push_back(ParagraphRole::Distractor);
      else if (coin(p_.alias_rate)) roles.push_back(ParagraphRole::Alias);
      else roles.push_back(ParagraphRole::Gold);
    }
    const bool has_alias = std::find(roles.begin(), roles.end(), ParagraphRole::Alias) != roles.end();

    std::vector<std::string> answers{join(gold)};
    if (has_alias) answers.push_back(join(alias));
    if (coin(p_.multi_answer_rate)) answers.push_back(join(entity_string(draw_entities(1, used))));

    const int width = p_.slot_width();
    const int slots = p_.slot_count();
    std::vector<std::string> paragraphs;
    std::vector<std::vector<int>> correct_starts(static_cast<std::size_t>(p_.paragraphs));
    for (int k = 0; k < p_.paragraphs; ++k) {
      std::vector<std::string> tokens(static_cast<std::size_t>(p_.tokens));
      for (auto& t : tokens) t = random_filler();
      std::vector<int> order(static_cast<std::size_t>(slots));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng_);
      const int offset = uniform(0, p_.tokens - slots * width);
      std::size_t next = 0;
      auto take = [&] { return offset + order[next++] * width; };

      const auto role = roles[static_cast<std::size_t>(k)];
      int mentions = 0;
      if (role == ParagraphRole::Gold) {
        mentions = uniform(p_.mentions_min, p_.mentions_max);
        for (int m = 0; m < mentions; ++m) {
          const int start = take();
          place(tokens, start, SlotKind::Correct, gold, question);
          correct_starts[static_cast<std::size_t>(k)].push_back(start + 2);
        }
      } else if (role == ParagraphRole::Alias) {
        mentions = uniform(p_.mentions_min, p_.mentions_max);
        for (int m = 0; m < mentions; ++m) place(tokens, take(), SlotKind::Alias, alias, question);
      }
      const int room = slots - mentions;
      for (int m = 0; m < std::min(room, p_.distractors_per_paragraph); ++m) {
        std::set<int> scratch = used;
        const auto d = entity_string(draw_entities(uniform(1, p_.max_answer_tokens), scratch));
        place(tokens, take(), SlotKind::Distractor, d, question);
      }
      paragraphs.push_back(join(tokens));
    }

    std::vector<std::string> qtext;
    for (int c : question) qtext.push_back(cue(c));
    auto pair = make_pair(id, join(qtext), paragraphs, answers, p_.paragraphs, p_.tokens);
    auto labels = find_consistent_spans_exact(pair, kDefaultMaxSpanLength);

    SyntheticTruth truth;
    truth.gold = normalize_string(join(gold));
    truth.roles = roles;
    const int len = static_cast<int>(gold.size());
    for (int k = 0; k < p_.paragraphs; ++k)
      for (int s : correct_starts[static_cast<std::size_t>(k)]) truth.correct_spans.push_back(SpanLabel{k, s, s + len - 1, truth.gold});
    std::sort(truth.correct_spans.begin(), truth.correct_spans.end(),
              [](const SpanLabel& a, const SpanLabel& b) { return a.key() < b.key(); });

    out.pairs.push_back(std::move(pair));
    out.labels.push_back(std::move(labels));
    out.truth.push_back(std::move(truth));
  }

  static std::string join(const std::vector<std::string>& words) {
    std::string s;
    for (const auto& w : words) {
      if (!s.empty()) s.push_back(' ');
      s += w;
    }
    return s;
  }

  NoiseProfile p_;
  std::mt19937_64 rng_;
};

}  // namespace detail

// Train and dev splits are drawn from independent streams of one seed.
inline SyntheticSplit generate(const NoiseProfile& profile) {
  profile.validate();
  SyntheticSplit split;
  detail::CorpusBuilder(profile, profile.seed).build(profile.documents, "train-", split.train);
  detail::CorpusBuilder(profile, profile.seed * 0x9e3779b97f4a7c15ULL + 1).build(profile.dev_documents, "dev-", split.dev);
  return split;
}

// Fraction of labeled-positive paragraphs whose consistent spans are all
// incorrect.
inline double alias_paragraph_fraction(const SyntheticCorpus& corpus) {
  std::size_t positive = 0, alias_only = 0;
  for (std::size_t n = 0; n < corpus.pairs.size(); ++n) {
    const auto& labels = corpus.labels[n];
    for (std::size_t k = 0; k < labels.num_paragraphs(); ++k) {
      if (labels.is_null(k)) continue;
      ++positive;
      const bool any_correct = std::any_of(corpus.truth[n].correct_spans.begin(), corpus.truth[n].correct_spans.end(),
                                           [&](const SpanLabel& s) { return s.paragraph == static_cast<int>(k); });
      if (!any_correct) ++alias_only;
    }
  }
  return positive == 0 ? 0.0 : static_cast<double>(alias_only) / static_cast<double>(positive);
}

// ---------------------------------------------------------------------------
// Truth and corpus files.

inline nlohmann::json truth_to_json(const std::string& id, const SyntheticTruth& t) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : t.correct_spans) spans.push_back({s.paragraph, s.begin, s.end});
  nlohmann::json roles = nlohmann::json::array();
  for (auto r : t.roles)
    roles.push_back(r == ParagraphRole::Gold ? "gold" : r == ParagraphRole::Alias ? "alias" : "distractor");
  return {{"id", id}, {"gold", t.gold}, {"correct_spans", std::move(spans)}, {"roles", std::move(roles)}};
}

inline void save_corpus(const std::string& stem, const SyntheticCorpus& corpus) {
  save_dataset(stem + ".jsonl", corpus.pairs);
  save_labels(stem + ".labels.jsonl", corpus.pairs, corpus.labels);
  std::ofstream out(stem + ".truth.jsonl");
  if (!out) throw Error("cannot write '" + stem + ".truth.jsonl'");
  for (std::size_t n = 0; n < corpus.pairs.size(); ++n) out << truth_to_json(corpus.pairs[n].id, corpus.truth[n]).dump() << '\n';
}

inline SyntheticTruth truth_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object() || !j.contains("gold") || !j["gold"].is_string())
    throw SchemaError(line, "truth record needs a string 'gold'");
  SyntheticTruth t;
  t.gold = j["gold"].get<std::string>();
  for (const auto& s : j.value("correct_spans", nlohmann::json::array())) {
    if (!s.is_array() || s.size() != 3) throw SchemaError(line, "correct span must be [k, i, j]");
    t.correct_spans.push_back(SpanLabel{s[0].get<int>(), s[1].get<int>(), s[2].get<int>(), t.gold});
  }
  for (const auto& r : j.value("roles", nlohmann::json::array())) {
    const auto name = r.get<std::string>();
    t.roles.push_back(name == "gold" ? ParagraphRole::Gold : name == "alias" ? ParagraphRole::Alias : ParagraphRole::Distractor);
  }
  return t;
}

// Truth records aligned with `pairs` by id.
inline std::vector<SyntheticTruth> load_truth(const std::string& path, std::span<const DocumentQuestionPair> pairs) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open truth file '" + path + "'");
  std::map<std::string, SyntheticTruth> by_id;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(n, e.what());
    }
    if (!j.contains("id") || !j["id"].is_string()) throw SchemaError(n, "truth record needs a string 'id'");
    by_id[j["id"].get<std::string>()] = truth_from_json(j, n);
  }
  std::vector<SyntheticTruth> out;
  for (const auto& p : pairs) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error("no truth record for '" + p.id + "'");
    out.push_back(std::move(it->second));
  }
  return out;
}

// Reads <stem>.jsonl, <stem>.labels.jsonl and, when present, <stem>.truth.jsonl.
inline SyntheticCorpus load_corpus(const std::string& stem) {
  SyntheticCorpus c;
  c.pairs = load_dataset(stem + ".jsonl");
  c.labels = load_labels(stem + ".labels.jsonl", c.pairs);
  if (std::ifstream(stem + ".truth.jsonl")) c.truth = load_truth(stem + ".truth.jsonl", c.pairs);
  return c;
}

// ---------------------------------------------------------------------------
// Experiment grid.

struct GridCell {
  std::string name;
  std::vector<std::string> objectives;
  std::vector<double> weights;  // empty means 1.0 each
  bool clean_pretrain = false;
  std::optional<SpaceKind> space;  // inference space, else inferred from the objectives
};

inline GridCell single_objective_cell(const std::string& objective) { return GridCell{objective, {objective}, {}, false, {}}; }

struct DevScores {
  double em = 0.0;
  double f1 = 0.0;
};

// Mean EM/F1 of the scorer's predictions against the gold strings.
inline DevScores evaluate_dev(const ToyScorer& scorer, const SyntheticCorpus& dev, SpaceKind space,
                              const InferenceSpec& spec) {
  DevScores s;
  if (dev.pairs.empty()) return s;
  for (std::size_t n = 0; n < dev.pairs.size(); ++n) {
    const auto pred = predict_pair(scorer, dev.pairs[n], space, spec);
    const std::vector<std::string> gold{dev.truth[n].gold};
    s.em += exact_match(pred.answer, gold);
    s.f1 += token_f1(pred.answer, gold);
  }
  s.em *= 100.0 / static_cast<double>(dev.pairs.size());
  s.f1 *= 100.0 / static_cast<double>(dev.pairs.size());
  return s;
}

struct GridRow {
  std::string cell;
  std::uint64_t seed = 0;
  InferenceAggregation inference = InferenceAggregation::Sum;
  double em = 0.0;
  double f1 = 0.0;
};

struct GridOptions {
  TrainConfig base;  // objectives/weights/seed are overridden per run
  int top_k = kDefaultTopK;
  int l_max = kDefaultMaxSpanLength;
  std::vector<InferenceAggregation> inference{InferenceAggregation::Max, InferenceAggregation::Sum};
  int pretrain_epochs = 2;
  int jobs = 1;
};

// Trains one model per (cell, seed) and scores it on dev with every
// requested inference aggregation. `clean` is used only by cells that
// ask for clean pretraining.
inline std::vector<GridRow> run_grid(const SyntheticCorpus& train_set, const SyntheticCorpus& dev,
                                     std::span<const GridCell> cells, std::span<const std::uint64_t> seeds,
                                     const GridOptions& options = {}, const SyntheticCorpus* clean = nullptr) {
  if (cells.empty() || seeds.empty()) throw DomainError("run_grid: empty grid");
  struct Job {
    std::size_t cell;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({c, s});
  for (const auto& c : cells)
    if (c.clean_pretrain && !clean) throw DomainError("run_grid: cell '" + c.name + "' needs a clean corpus");

  std::vector<std::vector<GridRow>> results(jobs.size());
  auto run = [&](std::size_t j) {
    const auto& cell = cells[jobs[j].cell];
    TrainConfig cfg = options.base;
    cfg.objectives = cell.objectives;
    cfg.weights = cell.weights;
    cfg.seed = seeds[jobs[j].seed];
    std::optional<Checkpoint> init;
    if (cell.clean_pretrain) {
      TrainConfig pre = cfg;
      pre.epochs = options.pretrain_epochs;
      const auto clean_labels = clean->clean_labels();
      init = pretrain_clean(pre, clean->pairs, clean_labels);
    }
    const auto ck = train(cfg, train_set.pairs, train_set.labels, init ? &*init : nullptr);
    const auto space = cell.space.value_or(inference_space(cfg));
    for (auto agg : options.inference) {
      const auto scores = evaluate_dev(ck.scorer, dev, space, InferenceSpec{agg, options.top_k, options.l_max});
      results[j].push_back(GridRow{cell.name, cfg.seed, agg, scores.em, scores.f1});
    }
  };

  const int workers = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run(j);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t j;
          {
            std::lock_guard lock(mu);
            if (next >= jobs.size() || failure) return;
            j = next++;
          }
          try {
            run(j);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<GridRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

// Mean over seeds for one (cell, inference) pair.
inline DevScores grid_mean(std::span<const GridRow> rows, const std::string& cell, InferenceAggregation agg) {
  DevScores s;
  int n = 0;
  for (const auto& r : rows)
    if (r.cell == cell && r.inference == agg) {
      s.em += r.em;
      s.f1 += r.f1;
      ++n;
    }
  if (n == 0) throw DomainError("no grid rows for '" + cell + "'");
  s.em /= n;
  s.f1 /= n;
  return s;
}

inline nlohmann::json to_json(std::span<const GridRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"objective", r.cell},
                   {"seed", r.seed},
                   {"inference", std::string(to_string(r.inference))},
                   {"em", r.em},
                   {"f1", r.f1}});
  return out;
}

}  // namespace dsqa
