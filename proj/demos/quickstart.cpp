// Generate a noisy corpus, train two objectives and compare them
// on the held-out split.

#include <cstdio>

#include "dsqa/dsqa.hpp"

int main() {
  dsqa::NoiseProfile profile;
  profile.alias_rate = 0.3;
  profile.mentions_max = 3;
  const auto split = dsqa::generate(profile);
  std::printf("train %zu documents, alias paragraph fraction %.3f\n", split.train.pairs.size(),
              dsqa::alias_paragraph_fraction(split.train));

  for (const char* objective : {"H2-P-pos-mml", "H3-D-pos-mml"}) {
    dsqa::TrainConfig config;
    config.objectives = {objective};
    config.learning_rate = 0.1;
    config.epochs = 10;
    config.dim = 16;
    const auto ck = dsqa::train(config, split.train.pairs, split.train.labels);
    const auto spec = dsqa::InferenceSpec{dsqa::InferenceAggregation::Sum};
    const auto dev = dsqa::evaluate_dev(ck.scorer, split.dev, dsqa::inference_space(config), spec);
    std::printf("%-14s final objective %8.4f  dev EM %5.1f  F1 %5.1f\n", objective,
                ck.history.back().mean_objective, dev.em, dev.f1);
  }
}
