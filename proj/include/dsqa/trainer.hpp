#pragma once

// Gradient-ascent training of the toy scorer on any objective (or
// weighted combination of objectives), clean-supervision pretraining,
// and the JSON checkpoint container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"
#include "dsqa/inference.hpp"
#include "dsqa/objectives.hpp"
#include "dsqa/scorer.hpp"
#include "dsqa/weak_labeler.hpp"

namespace dsqa {

struct TrainConfig {
  std::vector<std::string> objectives{"H2-P-pos-mml"};
  std::vector<double> weights;  // empty means 1.0 each
  double learning_rate = 0.5;
  int epochs = 3;
  int batch_size = 8;
  std::uint64_t seed = 1;
  double momentum = 0.0;
  // L2 penalty (weight decay) added to every step.
  double l2 = 0.0;
  // Rescale each batch gradient to at most this L2 norm; 0 disables.
  double clip_norm = 5.0;
  int dim = 32;
  int window = 2;
  double init_scale = 0.5;
  // HardEM objectives interpolate linearly from their MML counterpart
  // (first epoch) to pure HardEM (last epoch).
  bool hardem_ramp = false;
  std::string pretrain_path;  // clean-pretrain dataset, CLI only

  std::vector<ObjectiveSpec> specs() const {
    std::vector<ObjectiveSpec> out;
    for (const auto& s : objectives) out.push_back(parse_objective(s));
    return out;
  }
  std::vector<double> resolved_weights() const {
    if (weights.empty()) return std::vector<double>(objectives.size(), 1.0);
    return weights;
  }
  void validate() const {
    if (objectives.empty()) throw DomainError("at least one objective is required");
    specs();
    if (!weights.empty() && weights.size() != objectives.size())
      throw DomainError("--weights must match the number of objectives");
    for (double w : weights)
      if (!(w >= 0.0)) throw DomainError("objective weights must be non-negative");
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (!(learning_rate >= 0.0)) throw DomainError("learning rate must be >= 0");
    if (batch_size < 1) throw DomainError("batch size must be >= 1");
    if (dim < 1) throw DomainError("dim must be >= 1");
    if (!(clip_norm >= 0.0)) throw DomainError("clip_norm must be >= 0");
    if (!(l2 >= 0.0)) throw DomainError("l2 must be >= 0");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"objectives", c.objectives}, {"weights", c.resolved_weights()}, {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},         {"batch_size", c.batch_size},      {"seed", c.seed},
          {"momentum", c.momentum},     {"clip_norm", c.clip_norm},     {"l2", c.l2},     {"dim", c.dim},                    {"window", c.window},
          {"init_scale", c.init_scale}, {"hardem_ramp", c.hardem_ramp},    {"pretrain_path", c.pretrain_path}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("objectives")) c.objectives = j["objectives"].get<std::vector<std::string>>();
  if (j.contains("weights")) c.weights = j["weights"].get<std::vector<double>>();
  if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("momentum")) c.momentum = j["momentum"].get<double>();
  if (j.contains("clip_norm")) c.clip_norm = j["clip_norm"].get<double>();
  if (j.contains("l2")) c.l2 = j["l2"].get<double>();
  if (j.contains("dim")) c.dim = j["dim"].get<int>();
  if (j.contains("window")) c.window = j["window"].get<int>();
  if (j.contains("init_scale")) c.init_scale = j["init_scale"].get<double>();
  if (j.contains("hardem_ramp")) c.hardem_ramp = j["hardem_ramp"].get<bool>();
  if (j.contains("pretrain_path")) c.pretrain_path = j["pretrain_path"].get<std::string>();
  return c;
}

// FNV-1a over the canonical JSON dump, as 16 hex digits.
inline std::string fingerprint(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct EpochMetrics {
  int epoch = 0;
  double mean_objective = 0.0;  // mean per-document value before each update
  std::size_t documents = 0;
  std::size_t skipped = 0;
};

struct Checkpoint {
  ToyScorer scorer;
  TrainConfig config;
  std::string config_fingerprint;
  std::vector<EpochMetrics> history;
};

// Space used at inference: document-level when any objective uses it.
inline SpaceKind inference_space(std::span<const ObjectiveSpec> specs) {
  for (const auto& s : specs)
    if (s.space == SpaceKind::DocumentLevel) return SpaceKind::DocumentLevel;
  return SpaceKind::ParagraphLevel;
}

inline SpaceKind inference_space(const TrainConfig& c) {
  auto specs = c.specs();
  return inference_space(specs);
}

namespace detail {

struct Example {
  EncodedPair enc;
  const ConsistentLabelSet* labels;
  std::size_t order_key;  // position of the document id in sorted order
};

// One training loop shared by train() and pretrain_clean().
inline void run_epochs(ToyScorer& scorer, const TrainConfig& config, std::span<const ObjectiveSpec> specs,
                       std::span<const double> weights, std::span<const DocumentQuestionPair> data,
                       std::span<const ConsistentLabelSet> labels, std::vector<EpochMetrics>& history,
                       const std::function<void(const EpochMetrics&)>& on_epoch) {
  bool needs_document = false;
  for (const auto& s : specs) needs_document |= s.space == SpaceKind::DocumentLevel;

  std::vector<std::size_t> by_id(data.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::stable_sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return data[a].id < data[b].id; });
  std::vector<std::size_t> rank(data.size());
  for (std::size_t r = 0; r < by_id.size(); ++r) rank[by_id[r]] = r;

  std::vector<Example> examples;
  std::size_t skipped = 0;
  // Examples are kept in id order, so the input order never matters.
  for (std::size_t n : by_id) {
    if (needs_document && labels[n].total_spans() == 0) {
      ++skipped;
      continue;
    }
    examples.push_back(Example{encode(scorer.vocab(), data[n]), &labels[n], rank[n]});
  }

  // Ramp weights: the MML counterpart of each HardEM objective.
  std::vector<ObjectiveSpec> run_specs(specs.begin(), specs.end());
  std::vector<std::size_t> ramp_source;
  if (config.hardem_ramp)
    for (std::size_t m = 0; m < specs.size(); ++m)
      if (specs[m].aggregation == Aggregation::HardEM) {
        run_specs.push_back(specs[m].with_aggregation(Aggregation::MML));
        ramp_source.push_back(m);
      }

  std::mt19937_64 rng(config.seed);
  std::vector<double> grad(scorer.params().size(), 0.0);
  std::vector<double> velocity(config.momentum > 0.0 ? scorer.params().size() : 0, 0.0);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  ScorerCache cache;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> run_weights(weights.begin(), weights.end());
    if (!ramp_source.empty()) {
      const double tau = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 1.0;
      for (std::size_t r = 0; r < ramp_source.size(); ++r) {
        run_weights.push_back((1.0 - tau) * weights[ramp_source[r]]);
        run_weights[ramp_source[r]] *= tau;
      }
    }
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::sort(batch.begin(), batch.end(),
                [&](auto a, auto b) { return examples[a].order_key < examples[b].order_key; });
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (auto idx : batch) {
        const auto& ex = examples[idx];
        const auto grid = forward(scorer, ex.enc, &cache);
        const auto loss = combine(run_specs, run_weights, grid, *ex.labels);
        if (!std::isfinite(loss.value))
          throw DivergenceError("non-finite objective at epoch " + std::to_string(epoch + 1) + " on '" +
                                data[by_id[ex.order_key]].id + "'");
        total += loss.value;
        backward(scorer, ex.enc, cache, loss.grad, grad, scale);
      }
      auto& params = scorer.params();
      if (config.l2 > 0.0)
        for (std::size_t x = 0; x < params.size(); ++x) grad[x] -= config.l2 * params[x];
      if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for (double g : grad) sq += g * g;
        const double norm = std::sqrt(sq);
        if (norm > config.clip_norm)
          for (double& g : grad) g *= config.clip_norm / norm;
      }
      if (config.momentum > 0.0) {
        for (std::size_t x = 0; x < params.size(); ++x) {
          velocity[x] = config.momentum * velocity[x] + grad[x];
          params[x] += config.learning_rate * velocity[x];
        }
      } else {
        for (std::size_t x = 0; x < params.size(); ++x) params[x] += config.learning_rate * grad[x];
      }
      for (double v : params)
        if (!std::isfinite(v)) throw DivergenceError("non-finite parameter at epoch " + std::to_string(epoch + 1));
    }
    EpochMetrics m;
    m.epoch = static_cast<int>(history.size()) + 1;
    m.documents = examples.size();
    m.skipped = skipped;
    m.mean_objective = examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
}

}  // namespace detail

inline ToyScorer initial_scorer(const TrainConfig& config, std::span<const DocumentQuestionPair> data) {
  ToyScorer scorer(Vocabulary::build(data), config.dim, config.window);
  scorer.initialize(config.seed, config.init_scale);
  return scorer;
}

// Trains from `init` when given (its vocabulary is extended with unseen
// tokens), otherwise from a fresh scorer seeded by config.seed.
inline Checkpoint train(const TrainConfig& config, std::span<const DocumentQuestionPair> data,
                        std::span<const ConsistentLabelSet> labels, const Checkpoint* init = nullptr,
                        const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  config.validate();
  if (data.size() != labels.size()) throw DomainError("train: data and labels differ in length");
  Checkpoint ck;
  ck.config = config;
  ck.config_fingerprint = fingerprint(to_json(config));
  if (init) {
    ck.scorer = init->scorer;
    ck.scorer.extend_vocabulary(data, config.seed, config.init_scale);
    ck.history = init->history;
  } else {
    ck.scorer = initial_scorer(config, data);
  }
  const auto specs = config.specs();
  const auto weights = config.resolved_weights();
  detail::run_epochs(ck.scorer, config, specs, weights, data, labels, ck.history, on_epoch);
  return ck;
}

// Supervised pretraining on clean labels: at most one span per paragraph,
// NULL elsewhere. The objective is H1-P-span-mml, i.e. plain
// paragraph-level likelihood of the annotated span or NULL.
inline Checkpoint pretrain_clean(const TrainConfig& config, std::span<const DocumentQuestionPair> clean_data,
                                 std::span<const ConsistentLabelSet> clean_labels, const Checkpoint* init = nullptr,
                                 const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  if (clean_data.size() != clean_labels.size()) throw DomainError("pretrain: data and labels differ in length");
  for (const auto& l : clean_labels)
    for (std::size_t k = 0; k < l.num_paragraphs(); ++k)
      if (l.spans(k).size() > 1) throw DomainError("clean labels must have at most one span per paragraph");
  TrainConfig c = config;
  c.objectives = {"H1-P-span-mml"};
  c.weights = {1.0};
  c.hardem_ramp = false;
  c.validate();

  Checkpoint ck;
  ck.config = c;
  ck.config_fingerprint = fingerprint(to_json(c));
  if (init) {
    ck.scorer = init->scorer;
    ck.history = init->history;
  } else {
    ck.scorer = initial_scorer(c, clean_data);
  }
  if (clean_data.empty()) return ck;
  if (init) ck.scorer.extend_vocabulary(clean_data, c.seed, c.init_scale);
  const auto specs = c.specs();
  const std::vector<double> weights{1.0};
  detail::run_epochs(ck.scorer, c, specs, weights, clean_data, clean_labels, ck.history, on_epoch);
  return ck;
}

// ---------------------------------------------------------------------------
// Checkpoint file (JSON).

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json to_json(const Checkpoint& ck) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& m : ck.history)
    history.push_back({{"epoch", m.epoch},
                       {"mean_objective", m.mean_objective},
                       {"documents", m.documents},
                       {"skipped", m.skipped}});
  return {{"format", "dsqa-checkpoint"},
          {"version", kCheckpointVersion},
          {"config", to_json(ck.config)},
          {"config_fingerprint", ck.config_fingerprint},
          {"dim", ck.scorer.dim()},
          {"window", ck.scorer.window()},
          {"vocabulary", ck.scorer.vocab().words()},
          {"params", ck.scorer.params()},
          {"history", std::move(history)}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "dsqa-checkpoint") throw Error("not a checkpoint file");
  if (j.value("version", 0) != kCheckpointVersion) throw Error("unsupported checkpoint version");
  Checkpoint ck;
  ck.config = train_config_from_json(j.at("config"));
  ck.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  Vocabulary vocab;
  const auto words = j.at("vocabulary").get<std::vector<std::string>>();
  if (words.empty() || words.front() != "<unk>") throw Error("checkpoint vocabulary must start with <unk>");
  for (std::size_t w = 1; w < words.size(); ++w) vocab.add(words[w]);
  ck.scorer = ToyScorer(std::move(vocab), j.at("dim").get<int>(), j.at("window").get<int>());
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != ck.scorer.params().size()) throw Error("checkpoint parameter count mismatch");
  ck.scorer.params() = std::move(params);
  for (const auto& m : j.at("history"))
    ck.history.push_back(EpochMetrics{m.at("epoch").get<int>(), m.at("mean_objective").get<double>(),
                                      m.at("documents").get<std::size_t>(), m.at("skipped").get<std::size_t>()});
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out << to_json(ck).dump() << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

// ---------------------------------------------------------------------------

inline Prediction predict_pair(const ToyScorer& scorer, const DocumentQuestionPair& pair, SpaceKind space,
                               const InferenceSpec& spec) {
  return predict(log_partition(score(scorer, pair), space), pair, spec);
}

}  // namespace dsqa
