#pragma once

// Random-instance generators and the invariant suite behind `dsqa check`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dsqa/corpus.hpp"
#include "dsqa/inference.hpp"
#include "dsqa/objectives.hpp"
#include "dsqa/prob_space.hpp"
#include "dsqa/scorer.hpp"
#include "dsqa/weak_labeler.hpp"

namespace dsqa {

struct InstanceShape {
  int max_paragraphs = 4;
  int max_tokens = 8;
  double scale = 3.0;
  int max_span_length = 4;
  double null_rate = 0.3;
  int max_spans_per_paragraph = 3;
};

inline ScoreGrid random_grid(std::mt19937_64& rng, const InstanceShape& shape) {
  std::uniform_int_distribution<int> paragraphs(1, shape.max_paragraphs);
  std::uniform_int_distribution<int> tokens(1, shape.max_tokens);
  std::vector<std::size_t> lengths(static_cast<std::size_t>(paragraphs(rng)));
  for (auto& n : lengths) n = static_cast<std::size_t>(tokens(rng));
  ScoreGrid g(lengths);
  std::uniform_real_distribution<double> value(-shape.scale, shape.scale);
  g.for_each_entry([&](double& v) { v = value(rng); });
  return g;
}

// Random consistent spans for the grid; at least one span overall.
inline ConsistentLabelSet random_labels(std::mt19937_64& rng, const ScoreGrid& grid, const InstanceShape& shape) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SpanLabel> spans;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (unit(rng) < shape.null_rate) continue;
    const int n = static_cast<int>(grid.paragraphs[k].num_tokens());
    const int count = std::uniform_int_distribution<int>(1, shape.max_spans_per_paragraph)(rng);
    for (int c = 0; c < count; ++c) {
      const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const int e = std::min(n - 1, b + std::uniform_int_distribution<int>(0, shape.max_span_length - 1)(rng));
      spans.push_back(SpanLabel{static_cast<int>(k), b, e, "x"});
    }
  }
  if (spans.empty()) {
    const int k = std::uniform_int_distribution<int>(0, static_cast<int>(grid.size()) - 1)(rng);
    const int n = static_cast<int>(grid.paragraphs[static_cast<std::size_t>(k)].num_tokens());
    const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
    spans.push_back(SpanLabel{k, b, b, "x"});
  }
  return ConsistentLabelSet(grid.size(), std::move(spans), 1);
}

// A document over a tiny vocabulary, so strings repeat across spans.
inline DocumentQuestionPair random_document(std::mt19937_64& rng, int max_paragraphs, int max_tokens,
                                            int vocabulary = 6) {
  const int k = std::uniform_int_distribution<int>(1, max_paragraphs)(rng);
  std::vector<std::string> paragraphs;
  for (int p = 0; p < k; ++p) {
    const int n = std::uniform_int_distribution<int>(1, max_tokens)(rng);
    std::string text;
    for (int i = 0; i < n; ++i) {
      if (i) text.push_back(' ');
      text += "t" + std::to_string(std::uniform_int_distribution<int>(0, vocabulary - 1)(rng));
    }
    paragraphs.push_back(text);
  }
  const std::vector<std::string> answers{"t0"};
  return make_pair("doc", "q", paragraphs, answers, max_paragraphs, max_tokens);
}

inline ScoreGrid random_grid_for(std::mt19937_64& rng, const DocumentQuestionPair& pair, double scale) {
  std::vector<std::size_t> lengths;
  for (const auto& p : pair.paragraphs) lengths.push_back(p.size());
  ScoreGrid g(lengths);
  std::uniform_real_distribution<double> value(-scale, scale);
  g.for_each_entry([&](double& v) { v = value(rng); });
  return g;
}

// Largest relative error between backward() and central differences of
// the objective with respect to every scorer parameter.
inline double scorer_grad_check(ToyScorer scorer, const DocumentQuestionPair& pair, const ConsistentLabelSet& labels,
                                const ObjectiveSpec& spec, double eps = 1e-4) {
  const auto enc = encode(scorer.vocab(), pair);
  ScorerCache cache;
  const auto grid = forward(scorer, enc, &cache);
  const auto loss = evaluate(spec, grid, labels);
  std::vector<double> grad(scorer.params().size(), 0.0);
  backward(scorer, enc, cache, loss.grad, grad);
  double worst = 0.0;
  auto& params = scorer.params();
  for (std::size_t x = 0; x < params.size(); ++x) {
    const double saved = params[x];
    params[x] = saved + eps;
    const double up = evaluate(spec, forward(scorer, enc), labels).value;
    params[x] = saved - eps;
    const double down = evaluate(spec, forward(scorer, enc), labels).value;
    params[x] = saved;
    worst = std::max(worst, relative_error(grad[x], (up - down) / (2.0 * eps)));
  }
  return worst;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline double sum_exp(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += std::exp(x);
  return s;
}

}  // namespace detail

inline std::vector<CheckResult> run_self_check(std::uint64_t seed = 1, int instances = 200) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  const InstanceShape shape;

  {
    double worst = 0.0;
    InstanceShape wide = shape;
    wide.scale = 1e4;
    for (int t = 0; t < instances; ++t) {
      const auto g = random_grid(rng, wide);
      for (auto kind : {SpaceKind::ParagraphLevel, SpaceKind::DocumentLevel}) {
        const auto lp = log_partition(g, kind);
        double sb = 0.0, se = 0.0;
        for (const auto& p : lp.log_probs) {
          sb += detail::sum_exp(p.begin);
          se += detail::sum_exp(p.end);
        }
        const double parts = kind == SpaceKind::ParagraphLevel ? static_cast<double>(g.size()) : 1.0;
        worst = std::max({worst, std::abs(sb - parts), std::abs(se - parts)});
      }
    }
    out.push_back({"normalization", worst <= 1e-9 * static_cast<double>(shape.max_paragraphs), "max deviation " + detail::fmt(worst)});
  }

  {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
      const auto g = random_grid(rng, shape);
      const auto l = random_labels(rng, g, shape);
      for (auto sp : {SpaceKind::ParagraphLevel, SpaceKind::DocumentLevel}) {
        const double a = evaluate({sp, Hypothesis::H1, Granularity::SpanBased, Aggregation::MML}, g, l).value;
        const double b = evaluate({sp, Hypothesis::H1, Granularity::PositionBased, Aggregation::MML}, g, l).value;
        worst = std::max(worst, std::abs(a - b));
      }
    }
    out.push_back({"h1 span/position equivalence", worst <= 1e-9, "max gap " + detail::fmt(worst)});
  }

  {
    int violations = 0;
    for (int t = 0; t < instances; ++t) {
      const auto g = random_grid(rng, shape);
      const auto l = random_labels(rng, g, shape);
      for (auto [h, sp] : {std::pair{Hypothesis::H2, SpaceKind::ParagraphLevel}, std::pair{Hypothesis::H2, SpaceKind::DocumentLevel},
                           std::pair{Hypothesis::H3, SpaceKind::DocumentLevel}}) {
        const double pos = evaluate({sp, h, Granularity::PositionBased, Aggregation::MML}, g, l).value;
        const double span = evaluate({sp, h, Granularity::SpanBased, Aggregation::MML}, g, l).value;
        if (pos < span - 1e-9) ++violations;
      }
    }
    out.push_back({"position mml >= span mml", violations == 0, std::to_string(violations) + " violations"});
  }

  {
    int violations = 0;
    for (int t = 0; t < instances; ++t) {
      const auto g = random_grid(rng, shape);
      const auto l = random_labels(rng, g, shape);
      for (const auto& spec : valid_objective_cells(Aggregation::MML))
        if (evaluate(spec, g, l).value < evaluate(spec.with_aggregation(Aggregation::HardEM), g, l).value - 1e-9)
          ++violations;
    }
    out.push_back({"mml >= hardem", violations == 0, std::to_string(violations) + " violations"});
  }

  for (auto agg : {Aggregation::MML, Aggregation::HardEM}) {
    for (const auto& spec : valid_objective_cells(agg)) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        const auto g = random_grid(rng, shape);
        const auto l = random_labels(rng, g, shape);
        worst = std::max(worst, grad_check(spec, g, l));
      }
      out.push_back({"gradient " + to_string(spec), worst < 1e-5, "max relative error " + detail::fmt(worst)});
    }
  }

  {
    const std::vector<std::string> paragraphs{"t0 t1 t2 t3", "t2 t1 t0"}, answers{"t1"};
    auto pair = make_pair("tiny", "t0 t1", paragraphs, answers);
    ToyScorer scorer(Vocabulary::build(std::span<const DocumentQuestionPair>(&pair, 1)), 3);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto& v : scorer.params()) v = normal(rng);
    const auto labels = find_consistent_spans_exact(pair);
    double worst = 0.0;
    for (const char* s : {"H2-P-pos-mml", "H3-D-span-mml", "H1-D-pos-mml"})
      worst = std::max(worst, scorer_grad_check(scorer, pair, labels, parse_objective(s)));
    out.push_back({"gradient through scorer", worst < 1e-4, "max relative error " + detail::fmt(worst)});
  }

  for (auto agg : {InferenceAggregation::Max, InferenceAggregation::Sum}) {
    int mismatches = 0;
    for (int t = 0; t < instances / 2; ++t) {
      const auto pair = random_document(rng, 3, 12);
      const auto g = random_grid_for(rng, pair, 3.0);
      for (auto sp : {SpaceKind::ParagraphLevel, SpaceKind::DocumentLevel}) {
        const auto lp = log_partition(g, sp);
        const auto a = predict(lp, pair, InferenceSpec{agg, 12, kDefaultMaxSpanLength});
        const auto b = exhaustive_predict(lp, pair, agg);
        if (a.answer != b.answer || std::abs(a.score - b.score) > 1e-9) ++mismatches;
      }
    }
    out.push_back({std::string("inference oracle ") + std::string(to_string(agg)), mismatches == 0,
                   std::to_string(mismatches) + " mismatches"});
  }

  return out;
}

}  // namespace dsqa
