#pragma once

// Distant-supervision objectives over a ScoreGrid.
//
// Every cell of the objective table compiles to a list of log-probability
// terms. A term is a set of outcomes (begin positions, end positions or
// begin/end spans) whose probability is aggregated with sum (MML) or max
// (HardEM) before taking the log. The objective value is the sum of the
// term values; the gradient with respect to the raw scores is, per term,
// the posterior over its outcomes minus the softmax of the normalizing
// domain it was drawn from.
//
//                  span-based                      position-based
//   H1   one term per consistent span       one begin + one end term per span
//   H2   one span term per paragraph        begin-set + end-set term per paragraph
//   H3   one span term per document         begin-set + end-set term per document
//
// Under the paragraph-level space, paragraphs with no consistent span
// contribute the (NULL, NULL) outcome for H1/H2. H3 requires the
// document-level space. H1 has no aggregation, so its HardEM and MML
// values coincide.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsqa/errors.hpp"
#include "dsqa/prob_space.hpp"
#include "dsqa/weak_labeler.hpp"

namespace dsqa {

enum class Hypothesis { H1, H2, H3 };
enum class Granularity { SpanBased, PositionBased };
enum class Aggregation { MML, HardEM };

struct ObjectiveSpec {
  SpaceKind space = SpaceKind::ParagraphLevel;
  Hypothesis hypothesis = Hypothesis::H2;
  Granularity granularity = Granularity::PositionBased;
  Aggregation aggregation = Aggregation::MML;

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;

  void validate() const {
    if (hypothesis == Hypothesis::H3 && space != SpaceKind::DocumentLevel)
      throw SpecError("H3 requires the document-level probability space");
  }
  ObjectiveSpec with_aggregation(Aggregation a) const {
    auto s = *this;
    s.aggregation = a;
    return s;
  }
};

inline std::string to_string(const ObjectiveSpec& s) {
  std::string out = "H";
  out += static_cast<char>('1' + static_cast<int>(s.hypothesis));
  out += s.space == SpaceKind::ParagraphLevel ? "-P-" : "-D-";
  out += s.granularity == Granularity::SpanBased ? "span-" : "pos-";
  out += s.aggregation == Aggregation::MML ? "mml" : "hardem";
  return out;
}

// Grammar: H{1|2|3}-{P|D}-{span|pos}-{mml|hardem}, case-insensitive.
inline ObjectiveSpec parse_objective(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '-') {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  auto bad = [&] { return SpecError("bad objective '" + std::string(text) + "' (expected H{1|2|3}-{P|D}-{span|pos}-{mml|hardem})"); };
  if (parts.size() != 4) throw bad();
  ObjectiveSpec spec;
  if (parts[0] == "h1") spec.hypothesis = Hypothesis::H1;
  else if (parts[0] == "h2") spec.hypothesis = Hypothesis::H2;
  else if (parts[0] == "h3") spec.hypothesis = Hypothesis::H3;
  else throw bad();
  if (parts[1] == "p") spec.space = SpaceKind::ParagraphLevel;
  else if (parts[1] == "d") spec.space = SpaceKind::DocumentLevel;
  else throw bad();
  if (parts[2] == "span") spec.granularity = Granularity::SpanBased;
  else if (parts[2] == "pos") spec.granularity = Granularity::PositionBased;
  else throw bad();
  if (parts[3] == "mml") spec.aggregation = Aggregation::MML;
  else if (parts[3] == "hardem") spec.aggregation = Aggregation::HardEM;
  else throw bad();
  spec.validate();
  return spec;
}

// The ten (hypothesis, space, granularity) cells with the given aggregation.
inline std::vector<ObjectiveSpec> valid_objective_cells(Aggregation agg) {
  std::vector<ObjectiveSpec> out;
  for (auto h : {Hypothesis::H1, Hypothesis::H2, Hypothesis::H3})
    for (auto sp : {SpaceKind::ParagraphLevel, SpaceKind::DocumentLevel})
      for (auto g : {Granularity::SpanBased, Granularity::PositionBased}) {
        if (h == Hypothesis::H3 && sp == SpaceKind::ParagraphLevel) continue;
        out.push_back(ObjectiveSpec{sp, h, g, agg});
      }
  return out;
}

// An outcome picked by HardEM. For position-based terms only one side is
// set and the other is -1. NULL is the index one past the last token.
struct SelectedOutcome {
  int paragraph = 0;
  int begin = -1;
  int end = -1;

  friend bool operator==(const SelectedOutcome&, const SelectedOutcome&) = default;
};

struct LossResult {
  double value = 0.0;  // log-likelihood, maximized
  ScoreGrid grad;      // d value / d score, same shape as the input grid
  std::vector<SelectedOutcome> selected;
  std::size_t term_count = 0;  // bounds every |grad| entry
};

namespace detail {

enum class TermKind { Begin, End, Span };

struct Term {
  TermKind kind = TermKind::Span;
  // (paragraph, begin, end); the unused side is -1 for position terms.
  std::vector<std::array<int, 3>> members;
};

inline std::vector<Term> build_terms(const ObjectiveSpec& spec, const ScoreGrid& grid,
                                     const ConsistentLabelSet& labels) {
  spec.validate();
  if (labels.num_paragraphs() != grid.size())
    throw DomainError("labels cover " + std::to_string(labels.num_paragraphs()) + " paragraphs, grid has " +
                      std::to_string(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (const auto& s : labels.spans(k))
      if (static_cast<std::size_t>(s.end) >= grid.paragraphs[k].num_tokens())
        throw DomainError("label span beyond paragraph length");

  const bool doc = spec.space == SpaceKind::DocumentLevel;
  if (doc && labels.total_spans() == 0)
    throw LabelError("document-level objective needs at least one consistent span");

  const bool span = spec.granularity == Granularity::SpanBased;
  std::vector<Term> terms;
  Term doc_span{TermKind::Span, {}}, doc_begin{TermKind::Begin, {}}, doc_end{TermKind::End, {}};

  for (std::size_t kk = 0; kk < grid.size(); ++kk) {
    const int k = static_cast<int>(kk);
    if (labels.is_null(kk)) {
      if (doc) continue;
      const int null = static_cast<int>(grid.paragraphs[kk].null_index());
      if (span) {
        terms.push_back(Term{TermKind::Span, {{k, null, null}}});
      } else {
        terms.push_back(Term{TermKind::Begin, {{k, null, -1}}});
        terms.push_back(Term{TermKind::End, {{k, -1, null}}});
      }
      continue;
    }
    switch (spec.hypothesis) {
      case Hypothesis::H1:
        // The begin/end of every span counts once per span, so that the
        // position-based form equals the span-based one.
        for (const auto& s : labels.spans(kk)) {
          if (span) {
            terms.push_back(Term{TermKind::Span, {{k, s.begin, s.end}}});
          } else {
            terms.push_back(Term{TermKind::Begin, {{k, s.begin, -1}}});
            terms.push_back(Term{TermKind::End, {{k, -1, s.end}}});
          }
        }
        break;
      case Hypothesis::H2:
        if (span) {
          Term t{TermKind::Span, {}};
          for (const auto& s : labels.spans(kk)) t.members.push_back({k, s.begin, s.end});
          terms.push_back(std::move(t));
        } else {
          Term b{TermKind::Begin, {}}, e{TermKind::End, {}};
          for (int i : labels.begins(kk)) b.members.push_back({k, i, -1});
          for (int j : labels.ends(kk)) e.members.push_back({k, -1, j});
          terms.push_back(std::move(b));
          terms.push_back(std::move(e));
        }
        break;
      case Hypothesis::H3:
        if (span) {
          for (const auto& s : labels.spans(kk)) doc_span.members.push_back({k, s.begin, s.end});
        } else {
          for (int i : labels.begins(kk)) doc_begin.members.push_back({k, i, -1});
          for (int j : labels.ends(kk)) doc_end.members.push_back({k, -1, j});
        }
        break;
    }
  }
  if (spec.hypothesis == Hypothesis::H3) {
    if (span) {
      terms.push_back(std::move(doc_span));
    } else {
      terms.push_back(std::move(doc_begin));
      terms.push_back(std::move(doc_end));
    }
  }
  return terms;
}

inline double member_log_prob(const LogProbGrid& lp, TermKind kind, const std::array<int, 3>& m) {
  const auto k = static_cast<std::size_t>(m[0]);
  switch (kind) {
    case TermKind::Begin: return lp.log_begin(k, static_cast<std::size_t>(m[1]));
    case TermKind::End: return lp.log_end(k, static_cast<std::size_t>(m[2]));
    case TermKind::Span:
      return lp.log_begin(k, static_cast<std::size_t>(m[1])) + lp.log_end(k, static_cast<std::size_t>(m[2]));
  }
  return kNegInf;
}

}  // namespace detail

inline LossResult evaluate(const ObjectiveSpec& spec, const ScoreGrid& grid, const ConsistentLabelSet& labels) {
  auto terms = detail::build_terms(spec, grid, labels);
  const auto lp = log_partition(grid, spec.space);
  const bool doc = spec.space == SpaceKind::DocumentLevel;
  const bool hard = spec.aggregation == Aggregation::HardEM;

  LossResult out;
  out.grad = grid;
  out.grad.for_each_entry([](double& v) { v = 0.0; });
  out.term_count = terms.size();

  // How many times each normalizer appears; index 0 only for document level.
  std::vector<double> norm_b(grid.size(), 0.0), norm_e(grid.size(), 0.0);
  std::vector<double> member_lp;

  for (auto& term : terms) {
    member_lp.clear();
    for (const auto& m : term.members) member_lp.push_back(detail::member_log_prob(lp, term.kind, m));

    if (hard && term.members.size() > 1) {
      std::size_t best = 0;
      for (std::size_t n = 1; n < member_lp.size(); ++n)
        if (member_lp[n] > member_lp[best]) best = n;
      term.members = {term.members[best]};
      member_lp = {member_lp[best]};
    }
    if (hard) {
      const auto& m = term.members.front();
      out.selected.push_back(SelectedOutcome{m[0], term.kind == detail::TermKind::End ? -1 : m[1],
                                             term.kind == detail::TermKind::Begin ? -1 : m[2]});
    }

    const double term_value = logsumexp(member_lp);
    out.value += term_value;

    for (std::size_t n = 0; n < term.members.size(); ++n) {
      const double r = std::exp(member_lp[n] - term_value);
      const auto& m = term.members[n];
      auto& g = out.grad.paragraphs[static_cast<std::size_t>(m[0])];
      if (term.kind != detail::TermKind::End) g.begin[static_cast<std::size_t>(m[1])] += r;
      if (term.kind != detail::TermKind::Begin) g.end[static_cast<std::size_t>(m[2])] += r;
    }
    const auto slot = doc ? std::size_t{0} : static_cast<std::size_t>(term.members.front()[0]);
    if (term.kind != detail::TermKind::End) norm_b[slot] += 1.0;
    if (term.kind != detail::TermKind::Begin) norm_e[slot] += 1.0;
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto slot = doc ? std::size_t{0} : k;
    auto& g = out.grad.paragraphs[k];
    const auto& p = lp.log_probs[k];
    const std::size_t limit = doc ? p.num_tokens() : p.begin.size();
    for (std::size_t x = 0; x < limit; ++x) {
      g.begin[x] -= norm_b[slot] * std::exp(p.begin[x]);
      g.end[x] -= norm_e[slot] * std::exp(p.end[x]);
    }
  }
  return out;
}

// Weighted sum of objectives sharing one grid (shared parameters).
inline LossResult combine(std::span<const ObjectiveSpec> specs, std::span<const double> weights,
                          const ScoreGrid& grid, const ConsistentLabelSet& labels) {
  if (specs.empty()) throw DomainError("combine: no objectives");
  if (specs.size() != weights.size()) throw DomainError("combine: specs and weights differ in length");
  for (double w : weights)
    if (!(w >= 0.0)) throw DomainError("combine: weights must be non-negative");

  LossResult out;
  out.grad = grid;
  out.grad.for_each_entry([](double& v) { v = 0.0; });
  for (std::size_t m = 0; m < specs.size(); ++m) {
    auto part = evaluate(specs[m], grid, labels);
    const double w = weights[m];
    out.value += w * part.value;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      auto& dst = out.grad.paragraphs[k];
      const auto& src = part.grad.paragraphs[k];
      for (std::size_t x = 0; x < dst.begin.size(); ++x) {
        dst.begin[x] += w * src.begin[x];
        dst.end[x] += w * src.end[x];
      }
    }
    out.selected.insert(out.selected.end(), part.selected.begin(), part.selected.end());
    out.term_count += part.term_count;
  }
  return out;
}

// Relative error with a unit floor on the denominator, so entries whose
// gradient is near zero are compared on an absolute scale.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

// Central finite differences of the objective value against the analytic
// gradient, over every grid entry. Returns the largest relative error.
inline double grad_check(const ObjectiveSpec& spec, const ScoreGrid& grid, const ConsistentLabelSet& labels,
                         double eps = 1e-4) {
  if (!(eps > 0.0)) throw DomainError("grad_check: eps must be positive");
  const auto analytic = evaluate(spec, grid, labels);
  ScoreGrid probe = grid;
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int side = 0; side < 2; ++side) {
      auto& vals = side == 0 ? probe.paragraphs[k].begin : probe.paragraphs[k].end;
      const auto& g = side == 0 ? analytic.grad.paragraphs[k].begin : analytic.grad.paragraphs[k].end;
      for (std::size_t x = 0; x < vals.size(); ++x) {
        const double saved = vals[x];
        vals[x] = saved + eps;
        const double up = evaluate(spec, probe, labels).value;
        vals[x] = saved - eps;
        const double down = evaluate(spec, probe, labels).value;
        vals[x] = saved;
        worst = std::max(worst, relative_error(g[x], (up - down) / (2.0 * eps)));
      }
    }
  }
  return worst;
}

}  // namespace dsqa
