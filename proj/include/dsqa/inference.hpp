#pragma once

// Answer-string prediction. Candidate spans are grouped by normalized
// string and each string is scored by the sum (logsumexp) or the max of
// its span log-probabilities. NULL outcomes never become candidates.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"
#include "dsqa/prob_space.hpp"
#include "dsqa/weak_labeler.hpp"

namespace dsqa {

enum class InferenceAggregation { Max, Sum };

inline std::string_view to_string(InferenceAggregation a) { return a == InferenceAggregation::Max ? "max" : "sum"; }

inline InferenceAggregation parse_inference_aggregation(std::string_view s) {
  if (s == "max" || s == "Max") return InferenceAggregation::Max;
  if (s == "sum" || s == "Sum") return InferenceAggregation::Sum;
  throw DomainError("inference aggregation must be 'max' or 'sum'");
}

inline constexpr int kDefaultTopK = 20;

struct InferenceSpec {
  InferenceAggregation aggregation = InferenceAggregation::Sum;
  int top_k = kDefaultTopK;
  int l_max = kDefaultMaxSpanLength;

  void validate() const {
    if (top_k < 1) throw DomainError("top_k must be >= 1");
    if (l_max < 1) throw DomainError("l_max must be >= 1");
  }
};

struct Prediction {
  std::string answer;  // normalized
  double score = kNegInf;  // log of the aggregated probability
  std::vector<SpanLabel> support;
};

namespace detail {

struct Candidate {
  int paragraph;
  int begin;
  int end;
};

inline void check_alignment(const LogProbGrid& probs, const DocumentQuestionPair& pair) {
  if (pair.paragraphs.empty()) throw InferenceError("document has no paragraphs");
  if (probs.size() != pair.paragraphs.size()) throw DomainError("probability grid and document disagree on paragraph count");
  for (std::size_t k = 0; k < probs.size(); ++k)
    if (probs.log_probs[k].num_tokens() != pair.paragraphs[k].size())
      throw DomainError("probability grid and document disagree on paragraph length");
}

// Candidates must arrive sorted by (paragraph, begin, end).
inline Prediction aggregate(const LogProbGrid& probs, const DocumentQuestionPair& pair,
                            const std::vector<Candidate>& candidates, InferenceAggregation agg) {
  std::map<std::string, std::vector<SpanLabel>> groups;
  for (const auto& c : candidates) {
    auto text = span_text(pair.paragraphs[static_cast<std::size_t>(c.paragraph)], c.begin, c.end);
    if (text.empty()) continue;
    groups[text].push_back(SpanLabel{c.paragraph, c.begin, c.end, text});
  }
  if (groups.empty()) throw InferenceError("no valid candidate span for '" + pair.id + "'");

  Prediction best;
  std::vector<double> lps;
  for (auto& [text, spans] : groups) {
    lps.clear();
    for (const auto& s : spans)
      lps.push_back(log_span_prob(probs, static_cast<std::size_t>(s.paragraph), static_cast<std::size_t>(s.begin),
                                  static_cast<std::size_t>(s.end)));
    const double score =
        agg == InferenceAggregation::Sum ? logsumexp(lps) : *std::max_element(lps.begin(), lps.end());
    // Map order is lexicographic, so strict > keeps the smallest string on ties.
    if (best.support.empty() || score > best.score) {
      best.answer = text;
      best.score = score;
      best.support = spans;
    }
  }
  return best;
}

// Indices of the top_k largest values among the first n, ties to the lower index.
inline std::vector<int> top_positions(const std::vector<double>& values, std::size_t n, int top_k) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const auto keep = std::min<std::size_t>(n, static_cast<std::size_t>(top_k));
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), [&](int a, int b) {
    const auto va = values[static_cast<std::size_t>(a)];
    const auto vb = values[static_cast<std::size_t>(b)];
    return va > vb || (va == vb && a < b);
  });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

// Per paragraph: the top_k begin and top_k end positions, combined into
// spans with begin <= end and length <= l_max.
inline Prediction predict(const LogProbGrid& probs, const DocumentQuestionPair& pair, const InferenceSpec& spec = {}) {
  spec.validate();
  detail::check_alignment(probs, pair);
  std::vector<detail::Candidate> candidates;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const auto& lp = probs.log_probs[k];
    const std::size_t n = lp.num_tokens();
    const auto begins = detail::top_positions(lp.begin, n, spec.top_k);
    const auto ends = detail::top_positions(lp.end, n, spec.top_k);
    for (int b : begins)
      for (int e : ends)
        if (b <= e && e - b + 1 <= spec.l_max) candidates.push_back({static_cast<int>(k), b, e});
  }
  return detail::aggregate(probs, pair, candidates, spec.aggregation);
}

// Same contract as predict over every span of length <= l_max.
inline Prediction exhaustive_predict(const LogProbGrid& probs, const DocumentQuestionPair& pair,
                                     InferenceAggregation aggregation, int l_max = kDefaultMaxSpanLength) {
  check_span_length(l_max);
  detail::check_alignment(probs, pair);
  std::vector<detail::Candidate> candidates;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const int n = static_cast<int>(probs.log_probs[k].num_tokens());
    for (int b = 0; b < n; ++b)
      for (int e = b; e < n && e - b + 1 <= l_max; ++e) candidates.push_back({static_cast<int>(k), b, e});
  }
  return detail::aggregate(probs, pair, candidates, aggregation);
}

}  // namespace dsqa
