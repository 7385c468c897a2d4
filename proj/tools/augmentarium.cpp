// augmentarium: command-line front end for augmentation, filtering,
// scheduled training, experiments, timing and reporting.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "augmentarium/corpus.hpp"
#include "augmentarium/nnet.hpp"
#include "augmentarium/runner.hpp"
#include "augmentarium/schedule.hpp"
#include "augmentarium/scoring.hpp"
#include "augmentarium/textaug.hpp"
#include "augmentarium/vecaug.hpp"

namespace aug = augmentarium;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(aug::ErrorCode code) {
  return code == aug::ErrorCode::NonFiniteLoss ? kExitNumeric : kExitData;
}

// True when the first non-empty line of a JSONL file carries a "vec" field.
bool looks_like_vectors(const fs::path& path) {
  for (const auto& line : aug::read_lines(path)) {
    if (line.empty()) continue;
    return line.find("\"vec\"") != std::string::npos;
  }
  return false;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string method;
  fs::path in;
  fs::path out;
  std::optional<fs::path> vectors;
  std::optional<fs::path> thesaurus;
  std::optional<fs::path> lexicon;
  double alpha = 0.1;
  double rate = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> punctuation = {".", ";", "?", ":", "!", ","};
  double sigma = 1.0;
  double mixup_alpha = 0.2;
  double drop_p = 0.1;
  bool within_class = false;
  std::size_t dim = aug::FeaturizerConfig{}.dim;
};

void run_augment(const AugmentArgs& a) {
  if (auto m = aug::textaug::parse_method(a.method)) {
    if (a.in.empty()) throw UsageError("--in is required for text methods");
    const auto ds = aug::load_dataset(a.in);
    aug::textaug::Config cfg;
    cfg.method = *m;
    cfg.alpha = a.alpha;
    cfg.rate = a.rate;
    cfg.seed = a.seed;
    cfg.punctuation_set = a.punctuation;
    std::optional<aug::textaug::Thesaurus> th;
    std::optional<aug::textaug::Lexicon> lx;
    if (a.thesaurus) th = aug::textaug::Thesaurus::load(*a.thesaurus);
    if (a.lexicon) lx = aug::textaug::Lexicon::load(*a.lexicon);
    if ((*m == aug::textaug::Method::RI || *m == aug::textaug::Method::SR) && !th) {
      throw UsageError("--thesaurus is required for " + a.method);
    }
    if (*m == aug::textaug::Method::W2V && !lx) throw UsageError("--lexicon is required for w2v");
    const aug::textaug::Resources res{th ? &*th : nullptr, lx ? &*lx : nullptr};
    aug::Dataset out{ds.name + "." + a.method, ds.num_classes, aug::textaug::augment_corpus(ds, cfg, res)};
    aug::save_dataset(a.out, out);
    std::fprintf(stderr, "augment: %zu real -> %zu %s samples\n", ds.size(), out.size(), a.method.c_str());
    return;
  }

  const auto vm = aug::vecaug::parse_method(a.method);
  if (!vm) throw UsageError("unknown method '" + a.method + "'");
  std::vector<aug::LabeledVector> real;
  if (a.vectors && !a.in.empty()) {
    const auto ds = aug::load_dataset(a.in);
    real = aug::attach_vectors(ds, aug::import_vectors(*a.vectors, ds));
  } else if (a.vectors) {
    real = aug::load_labeled_vectors(*a.vectors);
  } else if (!a.in.empty()) {
    real = aug::featurize_dataset(aug::load_dataset(a.in), {a.dim, 0});
  } else {
    throw UsageError("vector methods need --vectors and/or --in");
  }
  std::erase_if(real, [](const aug::LabeledVector& v) { return !v.is_real(); });
  aug::vecaug::Config cfg;
  cfg.method = *vm;
  cfg.sigma = a.sigma;
  cfg.mixup_alpha = a.mixup_alpha;
  cfg.drop_p = a.drop_p;
  cfg.rate = a.rate;
  cfg.seed = a.seed;
  cfg.within_class = a.within_class;
  const auto out = aug::vecaug::augment_vectors(real, cfg);
  aug::save_vectors(a.out, out, true);
  std::fprintf(stderr, "augment: %zu real -> %zu %s vectors\n", real.size(), out.size(), a.method.c_str());
}

// ---------------------------------------------------------------------------

struct FilterArgs {
  double quantile = 0.5;
  fs::path scores;
  fs::path in;
  fs::path out;
  bool per_class = false;
};

void run_filter(const FilterArgs& a) {
  const auto scores = aug::scoring::to_map(aug::scoring::load_scores(a.scores));
  if (looks_like_vectors(a.in)) {
    const auto items = aug::load_labeled_vectors(a.in);
    const auto kept = aug::scoring::filter_by_loss(items, scores, a.quantile, a.per_class);
    aug::save_vectors(a.out, kept, true);
    std::fprintf(stderr, "filter: kept %zu of %zu\n", kept.size(), items.size());
  } else {
    const auto ds = aug::load_dataset(a.in);
    aug::Dataset out{ds.name, ds.num_classes,
                     aug::scoring::filter_by_loss(ds.samples, scores, a.quantile, a.per_class)};
    aug::save_dataset(a.out, out);
    std::fprintf(stderr, "filter: kept %zu of %zu\n", out.size(), ds.size());
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::optional<fs::path> data;
  std::optional<fs::path> in;
  std::optional<fs::path> aug_in;
  std::string strategy = "vanilla";
  std::size_t epochs = 30;
  std::optional<std::size_t> scorer_epochs;
  std::size_t batch = 32;
  double lr = 0.001;
  std::uint64_t seed = 0;
  double ip = 0.25;
  double fp = 1.0;
  double cycle_alpha = 0.25;
  double q = 0.5;
  std::string hidden = "64,64";
  std::size_t dim = aug::FeaturizerConfig{}.dim;
  fs::path out;
  std::optional<fs::path> dump_schedule;
  std::optional<fs::path> scores_out;
};

// Vectors for `vectors` (or featurized `data`), labels from `data` when the
// vector file carries none.
std::vector<aug::LabeledVector> load_training_items(const std::optional<fs::path>& vectors,
                                                    const std::optional<fs::path>& data,
                                                    std::size_t dim) {
  if (vectors && data) {
    const auto ds = aug::load_dataset(*data);
    return aug::attach_vectors(ds, aug::import_vectors(*vectors, ds));
  }
  if (vectors) return aug::load_labeled_vectors(*vectors);
  if (data) return aug::featurize_dataset(aug::load_dataset(*data), {dim, 0});
  throw UsageError("train needs --in and/or --data");
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw UsageError("--hidden expects comma-separated widths, got '" + text + "'");
    }
  }
  return out;
}

void run_train(const TrainArgs& a) {
  auto items = load_training_items(a.in, a.data, a.dim);
  std::vector<aug::LabeledVector> real;
  std::vector<aug::LabeledVector> extra;
  for (auto& v : items) (v.is_real() ? real : extra).push_back(std::move(v));
  if (a.aug_in) {
    for (auto& v : aug::load_labeled_vectors(*a.aug_in, real.empty() ? std::nullopt
                                                                     : std::optional<int>(real.front().y.num_classes()))) {
      v.origin = aug::Origin::Augmented;
      extra.push_back(std::move(v));
    }
  }

  const auto strategy = aug::schedule::parse_strategy(a.strategy);
  if (!strategy) throw UsageError("unknown strategy '" + a.strategy + "'");
  aug::schedule::PipelineConfig cfg;
  cfg.schedule.strategy = *strategy;
  cfg.schedule.T = a.epochs;
  cfg.schedule.ip = a.ip;
  cfg.schedule.fp = a.fp;
  cfg.schedule.alpha_cycle = a.cycle_alpha;
  cfg.schedule.q = a.q;
  cfg.train.epochs = a.scorer_epochs.value_or(a.epochs);
  cfg.train.batch_size = a.batch;
  cfg.train.adam.lr = a.lr;
  cfg.train.seed = a.seed;
  cfg.hidden = parse_hidden(a.hidden);

  const auto result = aug::schedule::train_with_strategy(real, extra, cfg, a.seed);
  aug::nnet::save_checkpoint(a.out, result.model);
  if (a.dump_schedule) aug::schedule::save_schedule(*a.dump_schedule, result.schedule);
  if (a.scores_out) aug::scoring::save_scores(*a.scores_out, result.scores);
  std::fprintf(stderr, "train: %s, %zu real + %zu augmented, %zu epochs, real accuracy %.4f\n",
               a.strategy.c_str(), real.size(), extra.size(), result.schedule.plans.size(),
               aug::nnet::accuracy(result.model, real));
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  fs::path model;
  std::optional<fs::path> in;
  std::optional<fs::path> data;
  std::size_t dim = aug::FeaturizerConfig{}.dim;
  fs::path out;
};

void run_score(const ScoreArgs& a) {
  const auto model = aug::nnet::load_checkpoint(a.model);
  const auto items = load_training_items(a.in, a.data, a.dim);
  aug::scoring::save_scores(a.out, aug::scoring::score(model, items));
  std::fprintf(stderr, "score: %zu items\n", items.size());
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  fs::path spec;
  fs::path out = "report";
  std::optional<std::size_t> workers;
};

void print_report(const aug::runner::ExperimentReport& r) {
  std::printf("%s %s %s: baseline %.4f +- %.4f, method %.4f +- %.4f, p = %.4g -> %s\n", r.dataset.c_str(),
              r.method.c_str(), aug::runner::format_rate(r.aug_rate).c_str(), r.baseline_mean, r.baseline_std,
              r.method_mean, r.method_std, r.verdict.p_value,
              std::string(aug::stats::to_string(r.verdict.outcome)).c_str());
}

void write_outputs(const fs::path& dir, const aug::runner::ExperimentReport& r) {
  aug::runner::write_reports(dir, std::span(&r, 1));
  aug::runner::save_report_json(dir / "report.json", r);
}

int run_experiment_cmd(const ExperimentArgs& a) {
  auto spec = aug::runner::load_experiment_spec(a.spec);
  if (a.workers) spec.workers = *a.workers;
  try {
    const auto report = aug::runner::run_experiment(spec);
    write_outputs(a.out, report);
    print_report(report);
    return kExitOk;
  } catch (const aug::runner::ExperimentAborted& e) {
    std::fprintf(stderr, "experiment aborted at repetition %zu: %s\n", e.failed_repetition(), e.what());
    if (!e.partial().method_accuracies.empty()) {
      aug::runner::save_report_json(a.out / "partial.json", e.partial());
    }
    return exit_code_for(e.cause_code());
  }
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  fs::path in;
  std::vector<std::string> methods;
  std::size_t repetitions = 5;
  double rate = 1.0;
  std::uint64_t seed = 0;
  std::optional<fs::path> thesaurus;
  std::optional<fs::path> lexicon;
  std::optional<fs::path> out;
};

void run_bench(const BenchArgs& a) {
  const auto corpus = aug::load_dataset(a.in);
  aug::runner::BenchConfig cfg;
  if (!a.methods.empty()) cfg.methods = a.methods;
  cfg.repetitions = a.repetitions;
  cfg.rate = a.rate;
  cfg.seed = a.seed;
  std::optional<aug::textaug::Thesaurus> th;
  std::optional<aug::textaug::Lexicon> lx;
  if (a.thesaurus) cfg.thesaurus = &th.emplace(aug::textaug::Thesaurus::load(*a.thesaurus));
  if (a.lexicon) cfg.lexicon = &lx.emplace(aug::textaug::Lexicon::load(*a.lexicon));
  const auto rows = aug::runner::bench_augmenters(corpus, cfg);
  std::printf("%-8s %14s\n", "method", "median_ms");
  for (const auto& row : rows) std::printf("%-8s %14.4f\n", row.method.c_str(), row.median_ms);
  if (a.out) aug::runner::write_timing_csv(*a.out, rows);
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<fs::path> inputs;
  fs::path out = "report";
};

void run_report(const ReportArgs& a) {
  std::vector<aug::runner::ExperimentReport> reports;
  for (const auto& p : a.inputs) reports.push_back(aug::runner::load_report_json(p));
  aug::runner::write_reports(a.out, reports);
  for (const auto& r : reports) print_report(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text and vector data augmentation with curriculum training schedules"};
  app.require_subcommand(1);

  AugmentArgs aa;
  auto* augment = app.add_subcommand("augment", "Augment a dataset (text) or its vectors");
  augment->add_option("--method", aa.method, "rd|ri|rs|sr|w2v|aeda|noise|mixup|vdrop")->required();
  augment->add_option("--in", aa.in, "Dataset JSONL");
  augment->add_option("--out", aa.out, "Output JSONL")->required();
  augment->add_option("--vectors", aa.vectors, "Vector JSONL (vector methods)");
  augment->add_option("--thesaurus", aa.thesaurus, "word<TAB>syn1,syn2 file (ri, sr)");
  augment->add_option("--lexicon", aa.lexicon, "word2vec text file (w2v)");
  augment->add_option("--alpha", aa.alpha, "Per-word operation rate");
  augment->add_option("--rate", aa.rate, "Augmented size as a multiple of the input");
  augment->add_option("--seed", aa.seed);
  augment->add_option("--punctuation", aa.punctuation, "AEDA marks");
  augment->add_option("--sigma", aa.sigma, "Noise standard deviation");
  augment->add_option("--mixup-alpha", aa.mixup_alpha, "Beta concentration for mixup");
  augment->add_option("--drop-p", aa.drop_p, "Vector dropout probability");
  augment->add_flag("--within-class", aa.within_class, "Mixup partners from the same class");
  augment->add_option("--dim", aa.dim, "Featurizer dimension when no vectors are given");

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "Keep the lowest-loss fraction of augmented samples");
  filter->add_option("--quantile", fa.quantile, "Fraction kept, in (0, 1]");
  filter->add_option("--scores", fa.scores, "sample_id,loss CSV")->required();
  filter->add_option("--in", fa.in, "Augmented dataset or vector JSONL")->required();
  filter->add_option("--out", fa.out)->required();
  filter->add_flag("--per-class", fa.per_class, "Apply the quantile within each class");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the classifier under a training strategy");
  train->add_option("--data", ta.data, "Dataset JSONL (labels; featurized when --in is absent)");
  train->add_option("--in", ta.in, "Vector JSONL");
  train->add_option("--aug-vectors", ta.aug_in, "Augmented labeled vector JSONL");
  train->add_option("--strategy", ta.strategy, "vanilla|adf|adm|ada|cl|anticl|randcl|ccl|mccl");
  train->add_option("--epochs,--T", ta.epochs, "Training epochs");
  train->add_option("--scorer-epochs", ta.scorer_epochs, "Epochs of the easiness scorer");
  train->add_option("--batch", ta.batch);
  train->add_option("--lr", ta.lr);
  train->add_option("--seed", ta.seed);
  train->add_option("--ip", ta.ip, "Initial cycle fraction");
  train->add_option("--fp", ta.fp, "Peak cycle fraction");
  train->add_option("--cycle-alpha", ta.cycle_alpha, "Cycle step");
  train->add_option("--q", ta.q, "Subset fraction for cl/anticl/randcl");
  train->add_option("--hidden", ta.hidden, "Hidden widths, e.g. 64,64");
  train->add_option("--dim", ta.dim, "Featurizer dimension when no vectors are given");
  train->add_option("--out", ta.out, "Checkpoint path")->required();
  train->add_option("--dump-schedule", ta.dump_schedule, "Write epoch plans as JSONL");
  train->add_option("--scores-out", ta.scores_out, "Write easiness scores as CSV");

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Per-sample losses under a trained checkpoint");
  score->add_option("--model", sa.model)->required();
  score->add_option("--in", sa.in, "Labeled vector JSONL");
  score->add_option("--data", sa.data, "Dataset JSONL");
  score->add_option("--dim", sa.dim);
  score->add_option("--out", sa.out, "sample_id,loss CSV")->required();

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run a repeated baseline-vs-method experiment");
  experiment->add_option("--spec", ea.spec, "key = value spec file")->required();
  experiment->add_option("--out", ea.out, "Output directory");
  experiment->add_option("--workers", ea.workers);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time the built-in augmenters");
  bench->add_option("--in", ba.in, "Dataset JSONL")->required();
  bench->add_option("--methods", ba.methods);
  bench->add_option("--repetitions", ba.repetitions);
  bench->add_option("--rate", ba.rate);
  bench->add_option("--seed", ba.seed);
  bench->add_option("--thesaurus", ba.thesaurus);
  bench->add_option("--lexicon", ba.lexicon);
  bench->add_option("--out", ba.out, "Timing CSV");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Aggregate report JSON files into CSV tables");
  report->add_option("--in", ra.inputs, "report.json files")->required();
  report->add_option("--out", ra.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*augment) run_augment(aa);
    if (*filter) run_filter(fa);
    if (*train) run_train(ta);
    if (*score) run_score(sa);
    if (*experiment) return run_experiment_cmd(ea);
    if (*bench) run_bench(ba);
    if (*report) run_report(ra);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const aug::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  }
  return kExitOk;
}
