// dsqa: command-line entry point.
//
//   dsqa label    --data d.jsonl --out labels.jsonl
//   dsqa train    --data d.jsonl --labels l.jsonl --objective H2-P-pos-mml --out model.json
//   dsqa eval     --data d.jsonl --checkpoint model.json --out metrics.json
//   dsqa grid     --profile p.json --specs H2-P-pos-mml,H3-D-pos-mml --seeds 1,2 --out table.csv
//   dsqa simulate --profile p.json --out dir/
//   dsqa check
//
// Exit status: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsqa/dsqa.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsqa::Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw dsqa::Error("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw dsqa::Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::vector<std::string>& items, char sep = ',') {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, sep))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

void log_run(const std::string& command, const json& config, std::uint64_t seed) {
  std::cerr << "dsqa " << command << ": config " << dsqa::fingerprint(config) << " seed " << seed << '\n';
}

int default_jobs() {
  if (const char* env = std::getenv("DSQA_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "dsqa: ignoring invalid DSQA_JOBS='" << env << "'\n";
  }
  return 1;
}

// Options of a subcommand take their defaults from a JSON config file
// (keys are long option names without dashes); flags still win.
void apply_config(CLI::App* sub, const json& config) {
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : config.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      continue;  // keys for other subcommands
    }
    if (value.is_array()) {
      std::vector<std::string> parts;
      for (const auto& v : value) parts.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      opt->add_result(parts);
    } else if (opt->get_expected_min() == 0) {
      opt->add_result(value.get<bool>() ? "true" : "false");
    } else {
      opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
    }
    // Writes the bound variable, then forgets the result so a flag given
    // on the command line is parsed as if the option were fresh.
    opt->run_callback();
    opt->clear();
    opt->required(false);
  }
}

struct Globals {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string config_path;
};

// ---------------------------------------------------------------------------

struct LabelArgs {
  std::string data, out, mode = "exact";
  int l_max = dsqa::kDefaultMaxSpanLength;
  double threshold = dsqa::kDefaultRougeThreshold;
  int k_max = dsqa::kDefaultMaxParagraphs, t_max = dsqa::kDefaultMaxTokens;
};

int run_label(const LabelArgs& a, const Globals& g) {
  if (a.mode != "exact" && a.mode != "rouge") throw UsageError("--mode must be 'exact' or 'rouge'");
  const json cfg{{"command", "label"}, {"mode", a.mode}, {"l_max", a.l_max}, {"threshold", a.threshold},
                 {"k_max", a.k_max}, {"t_max", a.t_max}};
  log_run("label", cfg, g.seed);
  const auto pairs = dsqa::load_dataset(a.data, a.k_max, a.t_max);
  std::vector<dsqa::ConsistentLabelSet> labels;
  std::size_t spans = 0, positive = 0;
  for (const auto& p : pairs) {
    labels.push_back(a.mode == "exact" ? dsqa::find_consistent_spans_exact(p, a.l_max)
                                       : dsqa::find_consistent_spans_rouge(p, a.l_max, a.threshold));
    spans += labels.back().total_spans();
    positive += labels.back().total_spans() > 0;
  }
  dsqa::save_labels(a.out, pairs, labels);
  std::cerr << "labeled " << pairs.size() << " documents, " << positive << " with spans, " << spans << " spans\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data, labels, out, pretrain, pretrain_labels;
  std::vector<std::string> objectives;
  std::vector<double> weights;
  double lr = dsqa::TrainConfig{}.learning_rate;
  int epochs = dsqa::TrainConfig{}.epochs;
  int pretrain_epochs = 2;
  int batch_size = dsqa::TrainConfig{}.batch_size;
  int dim = dsqa::TrainConfig{}.dim;
  double momentum = 0.0, clip_norm = dsqa::TrainConfig{}.clip_norm, l2 = 0.0;
  bool hardem_ramp = false;
  std::string init;
};

int run_train(const TrainArgs& a, const Globals& g) {
  dsqa::TrainConfig c;
  if (!a.objectives.empty()) c.objectives = split_list(a.objectives);
  c.weights = a.weights;
  c.learning_rate = a.lr;
  c.epochs = a.epochs;
  c.seed = g.seed;
  c.batch_size = a.batch_size;
  c.dim = a.dim;
  c.momentum = a.momentum;
  c.clip_norm = a.clip_norm;
  c.l2 = a.l2;
  c.hardem_ramp = a.hardem_ramp;
  c.pretrain_path = a.pretrain;
  try {
    c.validate();
  } catch (const dsqa::Error& e) {
    throw UsageError(e.what());
  }
  log_run("train", dsqa::to_json(c), c.seed);

  const auto pairs = dsqa::load_dataset(a.data);
  const auto labels = dsqa::load_labels(a.labels, pairs);
  auto report = [](const char* stage) {
    return [stage](const dsqa::EpochMetrics& m) {
      std::cerr << stage << " epoch " << m.epoch << " objective " << m.mean_objective << " documents " << m.documents;
      if (m.skipped) std::cerr << " skipped " << m.skipped << " (no consistent span)";
      std::cerr << '\n';
    };
  };

  std::optional<dsqa::Checkpoint> init;
  if (!a.init.empty()) init = dsqa::load_checkpoint(a.init);
  if (!a.pretrain.empty()) {
    const auto clean = dsqa::load_dataset(a.pretrain);
    const std::string lpath =
        a.pretrain_labels.empty() ? (fs::path(a.pretrain).replace_extension("").string() + ".labels.jsonl") : a.pretrain_labels;
    const auto clean_labels = dsqa::load_labels(lpath, clean);
    dsqa::TrainConfig pc = c;
    pc.epochs = a.pretrain_epochs;
    init = dsqa::pretrain_clean(pc, clean, clean_labels, init ? &*init : nullptr, report("pretrain"));
  }
  const auto ck = dsqa::train(c, pairs, labels, init ? &*init : nullptr, report("train"));
  dsqa::save_checkpoint(a.out, ck);
  std::cerr << "wrote " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string data, checkpoint, out, predictions, truth, labels, baseline, space;
  std::string inference = "sum";
  std::string metric = "f1";
  int top_k = dsqa::kDefaultTopK, l_max = dsqa::kDefaultMaxSpanLength;
  bool partition = false;
  int span_threshold = 5, answer_threshold = 1;
};

int run_eval(const EvalArgs& a, const Globals& g) {
  dsqa::InferenceSpec spec;
  try {
    spec = dsqa::InferenceSpec{dsqa::parse_inference_aggregation(a.inference), a.top_k, a.l_max};
    spec.validate();
  } catch (const dsqa::Error& e) {
    throw UsageError(e.what());
  }
  if (a.metric != "em" && a.metric != "f1" && a.metric != "rouge") throw UsageError("--metric must be em, f1 or rouge");
  if (!a.space.empty() && a.space != "P" && a.space != "D") throw UsageError("--space must be P or D");

  const auto ck = dsqa::load_checkpoint(a.checkpoint);
  const auto space = a.space.empty() ? dsqa::inference_space(ck.config)
                                     : (a.space == "P" ? dsqa::SpaceKind::ParagraphLevel : dsqa::SpaceKind::DocumentLevel);
  const json cfg{{"command", "eval"}, {"checkpoint_config", ck.config_fingerprint}, {"inference", a.inference},
                 {"top_k", a.top_k}, {"l_max", a.l_max}, {"space", std::string(dsqa::to_string(space))},
                 {"metric", a.metric}, {"partition", a.partition}};
  log_run("eval", cfg, ck.config.seed);

  const auto pairs = dsqa::load_dataset(a.data);
  std::vector<dsqa::SyntheticTruth> truth;
  if (!a.truth.empty()) truth = dsqa::load_truth(a.truth, pairs);
  std::vector<dsqa::ConsistentLabelSet> labels;
  if (a.partition) {
    if (!a.labels.empty()) {
      labels = dsqa::load_labels(a.labels, pairs);
    } else {
      for (const auto& p : pairs) labels.push_back(dsqa::find_consistent_spans_exact(p));
    }
  }
  std::map<std::string, std::string> baseline;
  if (!a.baseline.empty()) {
    std::ifstream in(a.baseline);
    if (!in) throw dsqa::Error("cannot open '" + a.baseline + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = json::parse(line);
      baseline[j.at("id").get<std::string>()] = j.at("answer").get<std::string>();
    }
  }

  std::ofstream preds;
  if (!a.predictions.empty()) {
    preds.open(a.predictions);
    if (!preds) throw dsqa::Error("cannot write '" + a.predictions + "'");
  }
  auto score_of = [&](const std::string& answer, std::span<const std::string> golds) {
    if (a.metric == "em") return static_cast<double>(dsqa::exact_match(answer, golds));
    if (a.metric == "f1") return dsqa::token_f1(answer, golds);
    double best = 0.0;
    for (const auto& gstr : golds) best = std::max(best, dsqa::rouge_l(answer, gstr));
    return best;
  };

  double em = 0.0, f1 = 0.0;
  std::vector<dsqa::ExampleScore> examples;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto& pair = pairs[n];
    const auto pred = dsqa::predict_pair(ck.scorer, pair, space, spec);
    if (preds.is_open()) preds << json{{"id", pair.id}, {"answer", pred.answer}, {"score", pred.score}}.dump() << '\n';
    std::vector<std::string> golds;
    if (!truth.empty()) golds.push_back(truth[n].gold);
    else
      for (const auto& s : pair.answers.entries()) golds.push_back(s.normalized);
    em += dsqa::exact_match(pred.answer, golds);
    f1 += dsqa::token_f1(pred.answer, golds);
    dsqa::ExampleScore ex;
    ex.id = pair.id;
    ex.answer_count = pair.answers.size();
    ex.span_count = a.partition ? labels[n].total_spans() : 0;
    ex.score = score_of(pred.answer, golds);
    if (!baseline.empty()) {
      auto it = baseline.find(pair.id);
      if (it == baseline.end()) throw dsqa::Error("baseline has no prediction for '" + pair.id + "'");
      ex.baseline = score_of(it->second, golds);
    }
    examples.push_back(std::move(ex));
  }

  dsqa::MetricsReport report;
  if (a.partition) {
    if (a.span_threshold < 1 || a.answer_threshold < 1) throw UsageError("thresholds must be >= 1");
    report = dsqa::partition_analysis(std::move(examples), static_cast<std::size_t>(a.span_threshold),
                                      static_cast<std::size_t>(a.answer_threshold));
  } else {
    report = dsqa::partition_analysis(std::move(examples));
    report.subsets.clear();
  }
  json out = dsqa::to_json(report);
  out["metric"] = a.metric;
  const double count = pairs.empty() ? 1.0 : static_cast<double>(pairs.size());
  out["em"] = 100.0 * em / count;
  out["f1"] = 100.0 * f1 / count;
  out["inference"] = a.inference;
  out["space"] = std::string(dsqa::to_string(space));
  write_json_file(a.out, out);
  std::cerr << "EM " << out["em"].get<double>() << " F1 " << out["f1"].get<double>() << " over " << pairs.size()
            << " documents\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string profile, out;
  int clean = 0;
};

dsqa::NoiseProfile load_profile(const std::string& path, std::optional<std::uint64_t> seed) {
  auto j = path.empty() ? json::object() : read_json_file(path);
  if (seed) j["seed"] = *seed;
  try {
    return dsqa::noise_profile_from_json(j);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad profile: ") + e.what());
  } catch (const dsqa::DomainError& e) {
    throw UsageError(std::string("bad profile: ") + e.what());
  }
}

// A clean corpus shares the profile but has no aliases; its labels keep
// one correct span per answer paragraph.
dsqa::SyntheticCorpus clean_corpus(const dsqa::NoiseProfile& profile, int documents) {
  auto p = profile;
  p.alias_rate = 0.0;
  p.multi_answer_rate = 0.0;
  p.documents = documents;
  p.dev_documents = 0;
  p.seed = profile.seed + 1000;
  return dsqa::generate(p).train;
}

int run_simulate(const SimulateArgs& a, const Globals& g, bool seed_given) {
  const auto profile = load_profile(a.profile, seed_given ? std::optional(g.seed) : std::nullopt);
  log_run("simulate", dsqa::to_json(profile), profile.seed);
  fs::create_directories(a.out);
  const auto split = dsqa::generate(profile);
  dsqa::save_corpus((fs::path(a.out) / "train").string(), split.train);
  dsqa::save_corpus((fs::path(a.out) / "dev").string(), split.dev);
  if (a.clean > 0) {
    const auto clean = clean_corpus(profile, a.clean);
    const auto stem = (fs::path(a.out) / "clean").string();
    dsqa::save_dataset(stem + ".jsonl", clean.pairs);
    dsqa::save_labels(stem + ".labels.jsonl", clean.pairs, clean.clean_labels());
  }
  write_json_file((fs::path(a.out) / "profile.json").string(), dsqa::to_json(profile));
  std::cerr << "alias paragraph fraction " << dsqa::alias_paragraph_fraction(split.train) << '\n';
  std::cerr << "wrote " << split.train.pairs.size() << " train and " << split.dev.pairs.size() << " dev documents to "
            << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct GridArgs {
  std::string profile, in, out;
  std::vector<std::string> specs;
  std::vector<std::uint64_t> seeds{1};
  std::string inference = "max,sum";
  double lr = dsqa::TrainConfig{}.learning_rate;
  int epochs = dsqa::TrainConfig{}.epochs;
  int dim = dsqa::TrainConfig{}.dim;
  int clean = 1000;
  int pretrain_epochs = 2;
};

// "H2-P-pos-mml+H3-D-pos-mml" combines objectives; a "clean:" prefix
// pretrains on the clean corpus first.
dsqa::GridCell parse_cell(const std::string& text) {
  dsqa::GridCell cell;
  cell.name = text;
  std::string body = text;
  if (body.rfind("clean:", 0) == 0) {
    cell.clean_pretrain = true;
    body = body.substr(6);
  }
  cell.objectives = split_list({body}, '+');
  try {
    for (const auto& o : cell.objectives) dsqa::parse_objective(o);
  } catch (const dsqa::SpecError& e) {
    throw UsageError(e.what());
  }
  if (cell.objectives.empty()) throw UsageError("empty grid spec '" + text + "'");
  return cell;
}

int run_grid_cmd(const GridArgs& a, Globals g) {
  if (a.profile.empty() == a.in.empty()) throw UsageError("grid needs exactly one of --profile or --in");
  std::vector<dsqa::GridCell> cells;
  for (const auto& s : split_list(a.specs)) cells.push_back(parse_cell(s));
  if (cells.empty()) throw UsageError("--specs is required");
  dsqa::GridOptions opts;
  opts.base.learning_rate = a.lr;
  opts.base.epochs = a.epochs;
  opts.base.dim = a.dim;
  opts.pretrain_epochs = a.pretrain_epochs;
  opts.jobs = g.jobs;
  std::cerr << "dsqa grid: " << g.jobs << " worker(s)\n";
  opts.inference.clear();
  try {
    for (const auto& s : split_list({a.inference})) opts.inference.push_back(dsqa::parse_inference_aggregation(s));
    opts.base.validate();
  } catch (const dsqa::Error& e) {
    throw UsageError(e.what());
  }

  dsqa::SyntheticCorpus train, dev, clean;
  bool have_clean = false;
  json cfg{{"command", "grid"}, {"specs", a.specs}, {"seeds", a.seeds}, {"train", dsqa::to_json(opts.base)},
           {"inference", a.inference}, {"pretrain_epochs", a.pretrain_epochs}};
  if (!a.profile.empty()) {
    const auto profile = load_profile(a.profile, std::nullopt);
    cfg["profile"] = dsqa::to_json(profile);
    log_run("grid", cfg, profile.seed);
    auto split = dsqa::generate(profile);
    train = std::move(split.train);
    dev = std::move(split.dev);
    clean = clean_corpus(profile, a.clean);
    have_clean = true;
  } else {
    cfg["in"] = a.in;
    log_run("grid", cfg, g.seed);
    train = dsqa::load_corpus((fs::path(a.in) / "train").string());
    dev = dsqa::load_corpus((fs::path(a.in) / "dev").string());
    if (dev.truth.empty()) throw dsqa::Error("grid needs " + (fs::path(a.in) / "dev.truth.jsonl").string());
    const auto stem = (fs::path(a.in) / "clean").string();
    if (fs::exists(stem + ".jsonl")) {
      clean.pairs = dsqa::load_dataset(stem + ".jsonl");
      clean.labels = dsqa::load_labels(stem + ".labels.jsonl", clean.pairs);
      // Clean labels are already singletons; treat them as the truth.
      for (std::size_t n = 0; n < clean.pairs.size(); ++n) {
        dsqa::SyntheticTruth t;
        t.correct_spans = clean.labels[n].all_spans();
        clean.truth.push_back(std::move(t));
      }
      have_clean = true;
    }
  }
  for (const auto& c : cells)
    if (c.clean_pretrain && !have_clean) throw UsageError("spec '" + c.name + "' needs a clean corpus");

  const auto rows = dsqa::run_grid(train, dev, cells, a.seeds, opts, have_clean ? &clean : nullptr);
  if (fs::path(a.out).extension() == ".csv") {
    if (auto dir = fs::path(a.out).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(a.out);
    if (!out) throw dsqa::Error("cannot write '" + a.out + "'");
    out << "objective,seed,inference,em,f1\n";
    for (const auto& r : rows)
      out << r.cell << ',' << r.seed << ',' << dsqa::to_string(r.inference) << ',' << r.em << ',' << r.f1 << '\n';
  } else {
    write_json_file(a.out, dsqa::to_json(rows));
  }
  for (const auto& c : cells)
    for (auto agg : opts.inference) {
      const auto m = dsqa::grid_mean(rows, c.name, agg);
      std::cerr << c.name << " " << dsqa::to_string(agg) << " EM " << m.em << " F1 " << m.f1 << '\n';
    }
  return 0;
}

// ---------------------------------------------------------------------------

int run_check(const Globals& g) {
  log_run("check", json{{"command", "check"}}, g.seed);
  bool ok = true;
  for (const auto& r : dsqa::run_self_check(g.seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    ok &= r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distantly supervised document QA toolkit"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand.
  app.fallthrough();
  Globals g;
  g.jobs = default_jobs();
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Parallel workers (default from DSQA_JOBS)")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "JSON file with option defaults")->check(CLI::ExistingFile);

  LabelArgs la;
  auto* label = app.add_subcommand("label", "Compute consistent answer spans");
  label->add_option("--data", la.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  label->add_option("--out", la.out, "Label file to write")->required();
  label->add_option("--mode", la.mode, "exact or rouge")->capture_default_str();
  label->add_option("--l-max", la.l_max, "Maximum span length")->capture_default_str();
  label->add_option("--threshold", la.threshold, "Rouge-L threshold")->capture_default_str();
  label->add_option("--k-max", la.k_max, "Paragraph cap")->capture_default_str();
  label->add_option("--t-max", la.t_max, "Tokens per paragraph cap")->capture_default_str();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the toy scorer");
  train->add_option("--data", ta.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--labels", ta.labels, "Label file")->required()->check(CLI::ExistingFile);
  train->add_option("--objective", ta.objectives, "Objective spec(s), comma separated")->delimiter(',');
  train->add_option("--weights", ta.weights, "Objective weights")->delimiter(',');
  train->add_option("--lr", ta.lr, "Learning rate")->capture_default_str();
  train->add_option("--epochs", ta.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch-size", ta.batch_size, "Documents per update")->capture_default_str();
  train->add_option("--dim", ta.dim, "Embedding dimension")->capture_default_str();
  train->add_option("--momentum", ta.momentum, "Momentum (0 = plain SGD)")->capture_default_str();
  train->add_option("--clip-norm", ta.clip_norm, "Gradient norm clip (0 = off)")->capture_default_str();
  train->add_option("--l2", ta.l2, "Weight decay")->capture_default_str();
  train->add_flag("--hardem-ramp", ta.hardem_ramp, "Ramp HardEM objectives in from MML");
  train->add_option("--pretrain", ta.pretrain, "Clean dataset for pretraining")->check(CLI::ExistingFile);
  train->add_option("--pretrain-labels", ta.pretrain_labels, "Labels of the clean dataset")->check(CLI::ExistingFile);
  train->add_option("--pretrain-epochs", ta.pretrain_epochs, "Pretraining epochs")->capture_default_str();
  train->add_option("--init", ta.init, "Checkpoint to start from")->check(CLI::ExistingFile);
  train->add_option("--out", ta.out, "Checkpoint to write")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Predict and score");
  eval->add_option("--data", ea.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", ea.out, "Metrics JSON to write")->required();
  eval->add_option("--predictions", ea.predictions, "Predictions JSONL to write");
  eval->add_option("--truth", ea.truth, "Truth file; scores against its gold string")->check(CLI::ExistingFile);
  eval->add_option("--inference", ea.inference, "max or sum")->capture_default_str();
  eval->add_option("--space", ea.space, "P or D (default: from the checkpoint's objectives)");
  eval->add_option("--top-k", ea.top_k, "Begin/end candidates per paragraph")->capture_default_str();
  eval->add_option("--l-max", ea.l_max, "Maximum span length")->capture_default_str();
  eval->add_option("--metric", ea.metric, "Per-example metric: em, f1 or rouge")->capture_default_str();
  eval->add_flag("--partition", ea.partition, "Report answer-set/span-count subsets");
  eval->add_option("--labels", ea.labels, "Label file for --partition (default: exact labeling)")->check(CLI::ExistingFile);
  eval->add_option("--baseline", ea.baseline, "Predictions of a second system, for deltas")->check(CLI::ExistingFile);
  eval->add_option("--span-threshold", ea.span_threshold, "Subset split on span count")->capture_default_str();
  eval->add_option("--answer-threshold", ea.answer_threshold, "Subset split on answer count")->capture_default_str();

  GridArgs ga;
  auto* grid = app.add_subcommand("grid", "Train and score a grid of objectives on synthetic data");
  grid->add_option("--profile", ga.profile, "Noise profile JSON")->check(CLI::ExistingFile);
  grid->add_option("--in", ga.in, "Directory written by simulate")->check(CLI::ExistingDirectory);
  grid->add_option("--specs", ga.specs, "Objectives; '+' combines, 'clean:' pretrains")->required()->delimiter(',');
  grid->add_option("--seeds", ga.seeds, "Training seeds")->delimiter(',');
  grid->add_option("--inference", ga.inference, "Aggregations to score")->capture_default_str();
  grid->add_option("--lr", ga.lr, "Learning rate")->capture_default_str();
  grid->add_option("--epochs", ga.epochs, "Epochs")->capture_default_str();
  grid->add_option("--dim", ga.dim, "Embedding dimension")->capture_default_str();
  grid->add_option("--clean", ga.clean, "Clean documents generated for --profile")->capture_default_str();
  grid->add_option("--pretrain-epochs", ga.pretrain_epochs, "Pretraining epochs")->capture_default_str();
  grid->add_option("--out", ga.out, "Table to write (.csv or .json)")->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus");
  simulate->add_option("--profile", sa.profile, "Noise profile JSON")->check(CLI::ExistingFile);
  simulate->add_option("--out", sa.out, "Output directory")->required();
  simulate->add_option("--clean", sa.clean, "Also write this many clean documents")->capture_default_str();

  auto* check = app.add_subcommand("check", "Run the objective, gradient and inference invariant suite");

  // The config file has to be read before the full parse so its values
  // become defaults that flags can override.
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg.rfind("--config=", 0) == 0) {
      const std::string path = arg == "--config" ? argv[i + 1] : arg.substr(9);
      try {
        const auto cfg = read_json_file(path);
        for (auto* sub : {label, train, eval, grid, simulate}) apply_config(sub, cfg);
        if (cfg.contains("seed")) g.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("jobs")) g.jobs = cfg["jobs"].get<int>();
      } catch (const std::exception& e) {
        std::cerr << "dsqa: " << e.what() << '\n';
        return 2;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*label) return run_label(la, g);
    if (*train) return run_train(ta, g);
    if (*eval) return run_eval(ea, g);
    if (*grid) return run_grid_cmd(ga, g);
    if (*simulate) return run_simulate(sa, g, seed_opt->count() > 0);
    if (*check) return run_check(g);
  } catch (const UsageError& e) {
    std::cerr << "dsqa: " << e.what() << '\n';
    return 2;
  } catch (const dsqa::SpecError& e) {
    std::cerr << "dsqa: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dsqa: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
