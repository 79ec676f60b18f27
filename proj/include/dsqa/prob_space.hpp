#pragma once

// Begin/end scores to log-probabilities.
//
// Paragraph-level: each paragraph normalizes over its own positions plus
// a NULL outcome. Document-level: one normalizer over every position of
// every paragraph; NULL slots are excluded and get log-probability -inf.
//
// Storage: a paragraph with n tokens holds n + 1 scores; index n is NULL.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "dsqa/errors.hpp"

namespace dsqa {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class SpaceKind { ParagraphLevel, DocumentLevel };

inline std::string_view to_string(SpaceKind k) { return k == SpaceKind::ParagraphLevel ? "P" : "D"; }

// Max-shifted log-sum-exp. Empty or all -inf input yields -inf.
inline double logsumexp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct ParagraphScores {
  std::vector<double> begin;  // n + 1 entries, last is NULL
  std::vector<double> end;

  ParagraphScores() = default;
  explicit ParagraphScores(std::size_t num_tokens, double fill = 0.0)
      : begin(num_tokens + 1, fill), end(num_tokens + 1, fill) {}

  std::size_t num_tokens() const noexcept { return begin.empty() ? 0 : begin.size() - 1; }
  std::size_t null_index() const noexcept { return num_tokens(); }
};

// Raw begin/end scores (logits) per paragraph position plus NULL.
struct ScoreGrid {
  std::vector<ParagraphScores> paragraphs;

  ScoreGrid() = default;
  explicit ScoreGrid(std::span<const std::size_t> lengths, double fill = 0.0) {
    for (auto n : lengths) paragraphs.emplace_back(n, fill);
  }

  std::size_t size() const noexcept { return paragraphs.size(); }
  std::size_t entry_count() const {
    std::size_t c = 0;
    for (const auto& p : paragraphs) c += p.begin.size() + p.end.size();
    return c;
  }
  bool same_shape(const ScoreGrid& other) const {
    if (other.paragraphs.size() != paragraphs.size()) return false;
    for (std::size_t k = 0; k < paragraphs.size(); ++k)
      if (paragraphs[k].begin.size() != other.paragraphs[k].begin.size() ||
          paragraphs[k].end.size() != other.paragraphs[k].end.size())
        return false;
    return true;
  }

  // Visits every entry as a mutable reference, begin scores before end
  // scores within each paragraph.
  template <typename F>
  void for_each_entry(F&& f) {
    for (auto& p : paragraphs) {
      for (auto& v : p.begin) f(v);
      for (auto& v : p.end) f(v);
    }
  }
  template <typename F>
  void for_each_entry(F&& f) const {
    for (const auto& p : paragraphs) {
      for (const auto& v : p.begin) f(v);
      for (const auto& v : p.end) f(v);
    }
  }
};

struct LogProbGrid {
  SpaceKind kind = SpaceKind::ParagraphLevel;
  std::vector<ParagraphScores> log_probs;
  // Per paragraph for ParagraphLevel, a single entry for DocumentLevel.
  std::vector<double> log_z_begin;
  std::vector<double> log_z_end;

  std::size_t size() const noexcept { return log_probs.size(); }
  double log_begin(std::size_t k, std::size_t i) const { return log_probs[k].begin[i]; }
  double log_end(std::size_t k, std::size_t j) const { return log_probs[k].end[j]; }
};

inline LogProbGrid log_partition(const ScoreGrid& grid, SpaceKind kind) {
  if (grid.paragraphs.empty()) throw DomainError("log_partition: grid has no paragraphs");
  for (const auto& p : grid.paragraphs)
    if (p.begin.empty() || p.begin.size() != p.end.size())
      throw DomainError("log_partition: malformed paragraph scores");

  LogProbGrid out;
  out.kind = kind;
  out.log_probs.resize(grid.size());

  if (kind == SpaceKind::ParagraphLevel) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto& p = grid.paragraphs[k];
      const double zb = logsumexp(p.begin);
      const double ze = logsumexp(p.end);
      out.log_z_begin.push_back(zb);
      out.log_z_end.push_back(ze);
      auto& lp = out.log_probs[k];
      lp.begin.resize(p.begin.size());
      lp.end.resize(p.end.size());
      for (std::size_t i = 0; i < p.begin.size(); ++i) lp.begin[i] = p.begin[i] - zb;
      for (std::size_t j = 0; j < p.end.size(); ++j) lp.end[j] = p.end[j] - ze;
    }
    return out;
  }

  std::vector<double> all_b, all_e;
  for (const auto& p : grid.paragraphs) {
    all_b.insert(all_b.end(), p.begin.begin(), p.begin.end() - 1);
    all_e.insert(all_e.end(), p.end.begin(), p.end.end() - 1);
  }
  if (all_b.empty()) throw DomainError("log_partition: document has no token positions");
  const double zb = logsumexp(all_b);
  const double ze = logsumexp(all_e);
  out.log_z_begin.push_back(zb);
  out.log_z_end.push_back(ze);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& p = grid.paragraphs[k];
    auto& lp = out.log_probs[k];
    const std::size_t n = p.num_tokens();
    lp.begin.assign(n + 1, kNegInf);
    lp.end.assign(n + 1, kNegInf);
    for (std::size_t i = 0; i < n; ++i) {
      lp.begin[i] = p.begin[i] - zb;
      lp.end[i] = p.end[i] - ze;
    }
  }
  return out;
}

// log P_b(i^k) + log P_e(j^k). NULL (index n) is only valid as a
// (NULL, NULL) pair.
inline double log_span_prob(const LogProbGrid& probs, std::size_t k, std::size_t i, std::size_t j) {
  if (k >= probs.size()) throw DomainError("log_span_prob: paragraph index out of range");
  const auto& p = probs.log_probs[k];
  const std::size_t n = p.num_tokens();
  const bool is_null = (i == n && j == n);
  if (!is_null && (i > j || j >= n)) throw DomainError("log_span_prob: span index out of range");
  return p.begin[i] + p.end[j];
}

}  // namespace dsqa
