#pragma once

// Extractive-QA metrics: exact match, bag-of-tokens F1, token-level
// Rouge-L (beta = 1), and the |A| x |I| noise partition analysis.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"

namespace dsqa {

inline int exact_match(std::string_view pred, std::span<const std::string> golds) {
  const auto p = normalize_string(pred);
  for (const auto& g : golds)
    if (normalize_string(g) == p) return 1;
  return 0;
}

namespace detail {

inline std::vector<std::string> normalized_words(std::string_view s) {
  return split_ws(normalize_string(s));
}

inline double f1_tokens(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& w : gold) ++counts[w];
  int common = 0;
  for (const auto& w : pred) {
    auto it = counts.find(w);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace detail

// Max over golds of the harmonic mean of bag-of-token precision and recall.
inline double token_f1(std::string_view pred, std::span<const std::string> golds) {
  const auto p = detail::normalized_words(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, detail::f1_tokens(p, detail::normalized_words(g)));
  return best;
}

// Longest common subsequence length, O(|a||b|) time, O(|b|) memory.
template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = (a[i - 1] == b[j - 1]) ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline RougeScore rouge_l_tokens(std::span<const std::string> pred, std::span<const std::string> ref) {
  if (pred.empty() || ref.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(pred, ref));
  if (lcs == 0.0) return {};
  RougeScore s;
  s.precision = lcs / static_cast<double>(pred.size());
  s.recall = lcs / static_cast<double>(ref.size());
  s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

// Precision is relative to `pred`, recall to `ref`; swapping arguments
// swaps them, so F is symmetric but P and R are not.
inline RougeScore rouge_l_detail(std::string_view pred, std::string_view ref) {
  const auto p = detail::normalized_words(pred);
  const auto r = detail::normalized_words(ref);
  return rouge_l_tokens(p, r);
}

inline double rouge_l(std::string_view pred, std::string_view ref) { return rouge_l_detail(pred, ref).f; }

// ---------------------------------------------------------------------------
// Partition analysis

enum class Subset { SS = 0, LS = 1, SL = 2, LL = 3 };

inline constexpr std::array<Subset, 4> kSubsets = {Subset::SS, Subset::LS, Subset::SL, Subset::LL};

inline std::string_view subset_name(Subset s) {
  switch (s) {
    case Subset::SS: return "Q_ss";
    case Subset::LS: return "Q_ls";
    case Subset::SL: return "Q_sl";
    case Subset::LL: return "Q_ll";
  }
  return "?";
}

// First letter: answer-set size, second: consistent-span count.
// "s" means at or below the threshold.
inline Subset classify(std::size_t answer_count, std::size_t span_count, std::size_t answer_threshold = 1,
                       std::size_t span_threshold = 5) {
  const bool small_a = answer_count <= answer_threshold;
  const bool small_i = span_count <= span_threshold;
  if (small_a) return small_i ? Subset::SS : Subset::SL;
  return small_i ? Subset::LS : Subset::LL;
}

struct ExampleScore {
  std::string id;
  std::size_t answer_count = 0;
  std::size_t span_count = 0;
  double score = 0.0;                      // system A
  std::optional<double> baseline;          // system B, for deltas
};

struct SubsetStats {
  std::size_t size = 0;
  double mean = 0.0;
  std::optional<double> baseline_mean;
  std::optional<double> delta;  // mean - baseline_mean
};

struct MetricsReport {
  std::vector<ExampleScore> examples;
  double mean = 0.0;
  std::optional<double> baseline_mean;
  std::map<Subset, SubsetStats> subsets;  // empty unless partitioned
};

inline MetricsReport partition_analysis(std::vector<ExampleScore> examples, std::size_t span_threshold = 5,
                                        std::size_t answer_threshold = 1) {
  if (span_threshold < 1 || answer_threshold < 1) throw DomainError("partition thresholds must be >= 1");
  MetricsReport report;
  const bool paired = !examples.empty() && std::all_of(examples.begin(), examples.end(),
                                                       [](const ExampleScore& e) { return e.baseline.has_value(); });
  std::map<Subset, std::array<double, 2>> sums;
  double total = 0.0, total_b = 0.0;
  for (auto s : kSubsets) report.subsets[s] = SubsetStats{};
  for (const auto& e : examples) {
    const auto s = classify(e.answer_count, e.span_count, answer_threshold, span_threshold);
    auto& st = report.subsets[s];
    ++st.size;
    sums[s][0] += e.score;
    total += e.score;
    if (paired) {
      sums[s][1] += *e.baseline;
      total_b += *e.baseline;
    }
  }
  if (!examples.empty()) {
    report.mean = total / static_cast<double>(examples.size());
    if (paired) report.baseline_mean = total_b / static_cast<double>(examples.size());
  }
  for (auto& [s, st] : report.subsets) {
    if (st.size == 0) continue;
    st.mean = sums[s][0] / static_cast<double>(st.size);
    if (paired) {
      st.baseline_mean = sums[s][1] / static_cast<double>(st.size);
      st.delta = st.mean - *st.baseline_mean;
    }
  }
  report.examples = std::move(examples);
  return report;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["count"] = r.examples.size();
  j["mean"] = r.mean;
  if (r.baseline_mean) j["baseline_mean"] = *r.baseline_mean;
  if (!r.subsets.empty()) {
    nlohmann::json subsets = nlohmann::json::object();
    for (const auto& [s, st] : r.subsets) {
      nlohmann::json o{{"size", st.size}, {"mean", st.mean}};
      if (st.baseline_mean) o["baseline_mean"] = *st.baseline_mean;
      if (st.delta) o["delta"] = *st.delta;
      subsets[std::string(subset_name(s))] = std::move(o);
    }
    j["subsets"] = std::move(subsets);
  }
  return j;
}

}  // namespace dsqa
