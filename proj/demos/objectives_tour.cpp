// Evaluates every objective cell on one hand-made document and shows how
// Max and Sum inference can disagree.

#include <cstdio>
#include <string>
#include <vector>

#include "dsqa/dsqa.hpp"

int main() {
  const std::vector<std::string> paragraphs{"joan rivers said joan rivers", "rivers of babylon by boney m"};
  const std::vector<std::string> answers{"Joan Rivers"};
  const auto pair = dsqa::make_pair("demo", "who said it", paragraphs, answers);
  const auto labels = dsqa::find_consistent_spans_exact(pair);
  std::printf("|A| = %zu, |I| = %zu\n", dsqa::counts(labels).answers, dsqa::counts(labels).spans);

  std::vector<std::size_t> lengths;
  for (const auto& p : pair.paragraphs) lengths.push_back(p.size());
  dsqa::ScoreGrid grid(lengths);
  grid.paragraphs[0].begin = {1.0, 0.0, -1.0, 0.5, 0.0, 0.0};
  grid.paragraphs[0].end = {0.0, 1.0, -1.0, 0.0, 0.5, 0.0};

  for (auto agg : {dsqa::Aggregation::MML, dsqa::Aggregation::HardEM})
    for (const auto& spec : dsqa::valid_objective_cells(agg))
      std::printf("%-18s %9.4f\n", dsqa::to_string(spec).c_str(), dsqa::evaluate(spec, grid, labels).value);

  for (auto agg : {dsqa::InferenceAggregation::Max, dsqa::InferenceAggregation::Sum}) {
    const auto lp = dsqa::log_partition(grid, dsqa::SpaceKind::DocumentLevel);
    const auto p = dsqa::predict(lp, pair, dsqa::InferenceSpec{agg});
    std::printf("%s inference: \"%s\" (log score %.4f, %zu mentions)\n", std::string(dsqa::to_string(agg)).c_str(),
                p.answer.c_str(), p.score, p.support.size());
  }
}
