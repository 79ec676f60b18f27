#pragma once

// Maps the answer-string set A onto token spans. A span is A-consistent
// when the normalized text it covers equals a normalized member of A
// (exact labeling) or scores high enough under Rouge-L against a raw
// answer (Rouge labeling). Paragraphs without consistent spans carry the
// NULL label.

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"
#include "dsqa/evalkit.hpp"

namespace dsqa {

inline constexpr int kDefaultMaxSpanLength = 8;
inline constexpr double kDefaultRougeThreshold = 0.5;

struct SpanLabel {
  int paragraph = 0;
  int begin = 0;
  int end = 0;  // inclusive
  std::string matched_string;

  auto key() const { return std::tie(paragraph, begin, end); }
  int length() const { return end - begin + 1; }
};

class ConsistentLabelSet {
 public:
  ConsistentLabelSet() = default;

  // Sorts spans by (paragraph, begin, end), drops duplicates and derives
  // the begin/end projections and NULL flags.
  ConsistentLabelSet(std::size_t num_paragraphs, std::vector<SpanLabel> spans, std::size_t answer_count);

  std::size_t num_paragraphs() const noexcept { return spans_.size(); }
  std::span<const SpanLabel> spans(std::size_t k) const { return spans_.at(k); }
  std::span<const int> begins(std::size_t k) const { return begins_.at(k); }
  std::span<const int> ends(std::size_t k) const { return ends_.at(k); }
  bool is_null(std::size_t k) const { return spans_.at(k).empty(); }
  std::size_t total_spans() const noexcept { return total_; }
  std::size_t answer_count() const noexcept { return answer_count_; }
  std::size_t positive_paragraphs() const;
  std::vector<SpanLabel> all_spans() const;

 private:
  std::vector<std::vector<SpanLabel>> spans_;
  std::vector<std::vector<int>> begins_;
  std::vector<std::vector<int>> ends_;
  std::size_t total_ = 0;
  std::size_t answer_count_ = 0;
};

inline ConsistentLabelSet::ConsistentLabelSet(std::size_t num_paragraphs, std::vector<SpanLabel> spans,
                                              std::size_t answer_count)
    : spans_(num_paragraphs), begins_(num_paragraphs), ends_(num_paragraphs), answer_count_(answer_count) {
  std::sort(spans.begin(), spans.end(), [](const SpanLabel& a, const SpanLabel& b) { return a.key() < b.key(); });
  spans.erase(std::unique(spans.begin(), spans.end(),
                          [](const SpanLabel& a, const SpanLabel& b) { return a.key() == b.key(); }),
              spans.end());
  for (auto& s : spans) {
    if (s.paragraph < 0 || static_cast<std::size_t>(s.paragraph) >= num_paragraphs || s.begin < 0 ||
        s.end < s.begin)
      throw DomainError("span label out of range");
    const auto k = static_cast<std::size_t>(s.paragraph);
    begins_[k].push_back(s.begin);
    ends_[k].push_back(s.end);
    spans_[k].push_back(std::move(s));
    ++total_;
  }
  for (std::size_t k = 0; k < num_paragraphs; ++k) {
    for (auto* v : {&begins_[k], &ends_[k]}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
  }
}

inline std::size_t ConsistentLabelSet::positive_paragraphs() const {
  return static_cast<std::size_t>(
      std::count_if(spans_.begin(), spans_.end(), [](const auto& v) { return !v.empty(); }));
}

inline std::vector<SpanLabel> ConsistentLabelSet::all_spans() const {
  std::vector<SpanLabel> out;
  out.reserve(total_);
  for (const auto& v : spans_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline void check_span_length(int l_max) {
  if (l_max < 1) throw DomainError("l_max must be >= 1");
}

inline ConsistentLabelSet find_consistent_spans_exact(const DocumentQuestionPair& pair,
                                                      int l_max = kDefaultMaxSpanLength) {
  check_span_length(l_max);
  std::unordered_set<std::string> targets;
  for (const auto& a : pair.answers.entries())
    if (!a.normalized.empty()) targets.insert(a.normalized);

  std::vector<SpanLabel> spans;
  for (const auto& p : pair.paragraphs) {
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
      // Tokens are already normalized, so the span text only differs from
      // the joined tokens by leading articles.
      int first = i;
      while (first < n && detail::is_article(p.tokens[first].text)) ++first;
      std::string text;
      for (int j = i; j < n && j - i + 1 <= l_max; ++j) {
        if (j >= first) {
          if (!text.empty()) text.push_back(' ');
          text += p.tokens[j].text;
        }
        if (!text.empty() && targets.contains(text)) spans.push_back(SpanLabel{p.index, i, j, text});
      }
    }
  }
  return ConsistentLabelSet(pair.paragraphs.size(), std::move(spans), pair.answers.size());
}

// Keeps every span of length <= l_max whose Rouge-L F against some raw
// answer is >= threshold, plus the best-scoring span of each paragraph
// when that score is positive.
inline ConsistentLabelSet find_consistent_spans_rouge(const DocumentQuestionPair& pair,
                                                      int l_max = kDefaultMaxSpanLength,
                                                      double threshold = kDefaultRougeThreshold,
                                                      bool keep_paragraph_argmax = true) {
  check_span_length(l_max);
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("rouge threshold must be in (0, 1]");
  std::vector<std::vector<std::string>> refs;
  std::vector<std::string> ref_norm;
  for (const auto& a : pair.answers.entries()) {
    refs.push_back(detail::split_ws(a.normalized));
    ref_norm.push_back(a.normalized);
  }

  std::vector<SpanLabel> spans;
  std::vector<std::string> words;
  for (const auto& p : pair.paragraphs) {
    const int n = static_cast<int>(p.size());
    double best = 0.0;
    SpanLabel best_span;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n && j - i + 1 <= l_max; ++j) {
        words = detail::split_ws(span_text(p, i, j));
        double score = 0.0;
        std::size_t which = 0;
        for (std::size_t r = 0; r < refs.size(); ++r) {
          const double f = rouge_l_tokens(words, refs[r]).f;
          if (f > score) {
            score = f;
            which = r;
          }
        }
        if (score <= 0.0) continue;
        SpanLabel label{p.index, i, j, ref_norm[which]};
        if (score > best) {
          best = score;
          best_span = label;
        }
        if (score >= threshold) spans.push_back(std::move(label));
      }
    }
    if (keep_paragraph_argmax && best > 0.0) spans.push_back(best_span);
  }
  return ConsistentLabelSet(pair.paragraphs.size(), std::move(spans), pair.answers.size());
}

struct LabelCounts {
  std::size_t answers = 0;  // |A|
  std::size_t spans = 0;    // |I|
};

inline LabelCounts counts(const ConsistentLabelSet& labels) {
  return LabelCounts{labels.answer_count(), labels.total_spans()};
}

// ---------------------------------------------------------------------------
// Label file: one {"id": str, "spans": [[k, i, j], ...]} object per line.

inline nlohmann::json labels_to_json(const std::string& id, const ConsistentLabelSet& labels) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : labels.all_spans()) spans.push_back({s.paragraph, s.begin, s.end});
  return {{"id", id}, {"spans", std::move(spans)}};
}

// Rebuilds a label set for `pair` from stored [k, i, j] triples.
inline ConsistentLabelSet labels_from_triples(const DocumentQuestionPair& pair,
                                              std::span<const std::array<int, 3>> triples) {
  std::vector<SpanLabel> spans;
  for (const auto& [k, i, j] : triples) {
    if (k < 0 || static_cast<std::size_t>(k) >= pair.paragraphs.size() || i < 0 || j < i ||
        static_cast<std::size_t>(j) >= pair.paragraphs[static_cast<std::size_t>(k)].size())
      throw DomainError("label span out of range for '" + pair.id + "'");
    spans.push_back(SpanLabel{k, i, j, span_text(pair.paragraphs[static_cast<std::size_t>(k)], i, j)});
  }
  return ConsistentLabelSet(pair.paragraphs.size(), std::move(spans), pair.answers.size());
}

struct LabelRecord {
  std::string id;
  std::vector<std::array<int, 3>> spans;
};

inline std::vector<LabelRecord> read_label_records(std::istream& in) {
  std::vector<LabelRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("spans") ||
        !j["spans"].is_array())
      throw SchemaError(line, "label record needs 'id' (string) and 'spans' (array)");
    LabelRecord rec;
    rec.id = j["id"].get<std::string>();
    for (const auto& s : j["spans"]) {
      if (!s.is_array() || s.size() != 3 || !s[0].is_number_integer() || !s[1].is_number_integer() ||
          !s[2].is_number_integer())
        throw SchemaError(line, "each span must be [k, i, j]");
      rec.spans.push_back({s[0].get<int>(), s[1].get<int>(), s[2].get<int>()});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// Aligns a label file with a dataset by id.
inline std::vector<ConsistentLabelSet> load_labels(const std::string& path,
                                                   std::span<const DocumentQuestionPair> pairs) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file '" + path + "'");
  auto records = read_label_records(in);
  std::unordered_map<std::string, const LabelRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<ConsistentLabelSet> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error("no labels for example '" + p.id + "'");
    out.push_back(labels_from_triples(p, it->second->spans));
  }
  return out;
}

inline void save_labels(const std::string& path, std::span<const DocumentQuestionPair> pairs,
                        std::span<const ConsistentLabelSet> labels) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write label file '" + path + "'");
  for (std::size_t n = 0; n < pairs.size(); ++n) out << labels_to_json(pairs[n].id, labels[n]).dump() << '\n';
}

}  // namespace dsqa
