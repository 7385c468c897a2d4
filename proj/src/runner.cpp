#include "augmentarium/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "augmentarium/scoring.hpp"

namespace augmentarium::runner {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_text_method(std::string_view name) { return textaug::parse_method(name).has_value(); }
bool is_vector_method(std::string_view name) { return vecaug::parse_method(name).has_value(); }

}  // namespace

DataSource make_two_blob(const TwoBlobConfig& cfg) {
  if (cfg.dim < 1) throw Error(ErrorCode::InvalidArgument, "two-blob dim must be positive");
  DataSource src;
  src.dataset.name = "two_blob";
  src.dataset.num_classes = 2;
  src.vectors.emplace();
  Rng rng(derive_seed(cfg.seed, "two_blob"));
  for (std::size_t i = 0; i < cfg.n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "blob-%06zu", i);
    const int label = static_cast<int>(i % 2);
    std::vector<double> x(cfg.dim);
    for (auto& v : x) v = rng.normal(0.0, 1.0);
    x[0] += (label == 1 ? 0.5 : -0.5) * cfg.separation;
    src.dataset.samples.push_back({id, "", label, Origin::Real, "", ""});
    src.vectors->emplace(id, FeatureVector(std::move(x)));
  }
  return src;
}

// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
  if (repetitions < 2) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 2");
  if (train_n == 0 || test_n == 0) throw Error(ErrorCode::InvalidArgument, "train_n and test_n must be positive");
  if (!custom_augmenter) {
    const bool known = augmentation == "none" || augmentation == "adapter" ||
                       is_text_method(augmentation) || is_vector_method(augmentation);
    if (!known) throw Error(ErrorCode::InvalidArgument, "unknown augmentation '" + augmentation + "'");
    if (augmentation == "adapter" && !adapter_path) {
      throw Error(ErrorCode::InvalidArgument, "adapter augmentation needs an adapter file");
    }
  }
  if (!(aug_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "aug_rate must be positive");
  if (filter_quantile && !(*filter_quantile > 0.0 && *filter_quantile <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "filter quantile must be in (0, 1]");
  }
  if (!(alpha_sig > 0.0 && alpha_sig < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha_sig must be in (0, 1)");
  pipeline.schedule.validate();
}

std::string ExperimentSpec::augmentation_name() const {
  return custom_augmenter ? custom_name : augmentation;
}

std::string ExperimentSpec::method_label() const {
  std::string label;
  if (pipeline.schedule.strategy != schedule::Strategy::Vanilla) {
    label = std::string(schedule::to_string(pipeline.schedule.strategy)) + "+";
  }
  label += augmentation_name();
  if (filter_quantile) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "[filter=%g]", *filter_quantile);
    label += buf;
  }
  return label;
}

ExperimentAborted::ExperimentAborted(const Error& cause, ExperimentReport partial,
                                     std::size_t failed_repetition)
    : Error(cause.code(), "repetition " + std::to_string(failed_repetition) + " failed (" +
                              std::to_string(partial.method_accuracies.size()) +
                              " completed): " + cause.what()),
      partial_(std::move(partial)),
      failed_repetition_(failed_repetition),
      cause_(cause.code()) {}

std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t r) { return base_seed + r; }

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("AUGMENTARIUM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

DataSource load_data(const ExperimentSpec& spec) {
  if (spec.dataset_path.empty()) return make_two_blob(spec.synthetic);
  DataSource src;
  src.dataset = load_dataset(spec.dataset_path, spec.num_classes);
  for (auto& s : src.dataset.samples) s.text = preprocess(s.text);
  if (spec.vectors_path) src.vectors = import_vectors(*spec.vectors_path);
  return src;
}

namespace {

/// Vectors for ds: imported when the source has a table, else featurized.
std::vector<LabeledVector> vectors_for(const Dataset& ds, const DataSource& src,
                                       const FeaturizerConfig& featurizer) {
  if (!src.vectors) return featurize_dataset(ds, featurizer);
  return attach_vectors(ds, *src.vectors);
}

struct Repetition {
  double baseline_accuracy = 0.0;
  double method_accuracy = 0.0;
  PhaseTimings timings;
};

struct SharedInputs {
  textaug::Thesaurus thesaurus;
  std::optional<textaug::Lexicon> lexicon;
  std::vector<Sample> adapter_samples;
};

std::vector<LabeledVector> augment_split(const ExperimentSpec& spec, const DataSource& src,
                                         const SharedInputs& shared, const Dataset& train,
                                         std::span<const LabeledVector> train_vecs,
                                         std::uint64_t seed) {
  if (spec.custom_augmenter) return spec.custom_augmenter(train, train_vecs, seed);
  const std::string& name = spec.augmentation;
  if (name == "none") return {};

  if (auto vm = vecaug::parse_method(name)) {
    vecaug::Config cfg = spec.vector_cfg;
    cfg.method = *vm;
    cfg.rate = spec.aug_rate;
    cfg.seed = seed;
    return vecaug::augment_vectors(train_vecs, cfg);
  }

  Dataset augmented{train.name + ".aug", train.num_classes, {}};
  if (auto tm = textaug::parse_method(name)) {
    textaug::Config cfg;
    cfg.method = *tm;
    cfg.alpha = spec.text_alpha;
    cfg.rate = spec.aug_rate;
    cfg.seed = seed;
    cfg.punctuation_set = spec.punctuation_set;
    const textaug::Resources res{&shared.thesaurus, shared.lexicon ? &*shared.lexicon : nullptr};
    augmented.samples = textaug::augment_corpus(train, cfg, res);
  } else {  // adapter
    std::unordered_set<std::string_view> parents;
    for (const auto& s : train.samples) parents.insert(s.id);
    for (const auto& s : shared.adapter_samples) {
      if (parents.contains(s.parent_id)) augmented.samples.push_back(s);
    }
  }
  return vectors_for(augmented, src, spec.featurizer);
}

Repetition run_repetition(const ExperimentSpec& spec, const DataSource& src,
                          const SharedInputs& shared, std::size_t r) {
  Repetition rep;
  const std::uint64_t seed = repetition_seed(spec.base_seed, r);

  auto t0 = Clock::now();
  const auto [train, test] =
      stratified_split(src.dataset, spec.train_n, spec.test_n, derive_seed(seed, "split"));
  const auto train_vecs = vectors_for(train, src, spec.featurizer);
  const auto test_vecs = vectors_for(test, src, spec.featurizer);
  rep.timings.prepare = seconds_since(t0);

  const std::uint64_t model_seed = derive_seed(seed, "model");
  schedule::PipelineConfig baseline_cfg = spec.pipeline;
  baseline_cfg.schedule.strategy = schedule::Strategy::Vanilla;

  t0 = Clock::now();
  const auto baseline = schedule::train_with_strategy(train_vecs, {}, baseline_cfg, model_seed);
  rep.timings.train_baseline = seconds_since(t0);
  {
    std::unordered_set<std::string_view> real_ids;
    for (const auto& v : train_vecs) real_ids.insert(v.id);
    for (const auto& epoch : baseline.trace.epochs) {
      for (const auto& id : epoch) {
        if (!real_ids.contains(id)) {
          throw Error(ErrorCode::InvalidArgument, "baseline consumed non-real sample '" + id + "'");
        }
      }
    }
  }

  t0 = Clock::now();
  auto aug = augment_split(spec, src, shared, train, train_vecs, derive_seed(seed, "augment"));
  rep.timings.augment = seconds_since(t0);

  if (spec.filter_quantile && !aug.empty()) {
    t0 = Clock::now();
    // The scorer is the vanilla model trained without augmentation.
    const auto scores = scoring::to_map(scoring::score(baseline.model, aug));
    aug = scoring::filter_by_loss(aug, scores, *spec.filter_quantile, spec.filter_per_class);
    rep.timings.filter = seconds_since(t0);
  }

  t0 = Clock::now();
  const auto method = schedule::train_with_strategy(train_vecs, aug, spec.pipeline, model_seed);
  rep.timings.train_method = seconds_since(t0);

  rep.baseline_accuracy = nnet::accuracy(baseline.model, test_vecs);
  rep.method_accuracy = nnet::accuracy(method.model, test_vecs);
  return rep;
}

ExperimentReport assemble(const ExperimentSpec& spec, const std::vector<std::optional<Repetition>>& reps) {
  ExperimentReport report;
  report.dataset = spec.name;
  report.method = spec.method_label();
  report.strategy = std::string(schedule::to_string(spec.pipeline.schedule.strategy));
  report.augmentation = spec.augmentation_name();
  report.aug_rate = spec.aug_rate;
  for (const auto& rep : reps) {
    if (!rep) continue;
    report.baseline_accuracies.push_back(rep->baseline_accuracy);
    report.method_accuracies.push_back(rep->method_accuracy);
    report.timings.prepare += rep->timings.prepare;
    report.timings.augment += rep->timings.augment;
    report.timings.filter += rep->timings.filter;
    report.timings.train_baseline += rep->timings.train_baseline;
    report.timings.train_method += rep->timings.train_method;
  }
  report.baseline_mean = stats::mean(report.baseline_accuracies);
  report.baseline_std = stats::sample_std(report.baseline_accuracies);
  report.method_mean = stats::mean(report.method_accuracies);
  report.method_std = stats::sample_std(report.method_accuracies);
  if (report.method_accuracies.size() >= 2) {
    report.verdict = stats::compare({report.method_accuracies}, {report.baseline_accuracies},
                                    spec.alpha_sig, spec.pooled_ttest);
  } else {
    report.verdict.mean_diff = report.method_mean - report.baseline_mean;
  }
  report.heatmap = stats::heatmap_value(report.verdict);
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  return run_experiment(spec, load_data(spec));
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const DataSource& data) {
  spec.validate();
  SharedInputs shared;
  if (spec.thesaurus_path) shared.thesaurus = textaug::Thesaurus::load(*spec.thesaurus_path);
  if (spec.lexicon_path) shared.lexicon = textaug::Lexicon::load(*spec.lexicon_path);
  if (!spec.custom_augmenter && spec.augmentation == "adapter") {
    shared.adapter_samples = textaug::import_adapter_output(*spec.adapter_path, data.dataset);
  }

  const std::size_t R = spec.repetitions;
  std::vector<std::optional<Repetition>> reps(R);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::optional<std::pair<std::size_t, Error>> failure;

  const auto worker = [&] {
    while (!stop.load()) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        reps[r] = run_repetition(spec, data, shared, r);
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure || r < failure->first) failure.emplace(r, e);
        stop = true;
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure || r < failure->first) failure.emplace(r, Error(ErrorCode::InvalidArgument, e.what()));
        stop = true;
      }
    }
  };

  const std::size_t workers = std::min(resolve_workers(spec.workers), R);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  if (failure) throw ExperimentAborted(failure->second, assemble(spec, reps), failure->first);
  return assemble(spec, reps);
}

// ---------------------------------------------------------------------------

textaug::Lexicon synthesize_lexicon(const Dataset& corpus, std::size_t dim, std::uint64_t seed) {
  textaug::Lexicon lex;
  std::unordered_set<std::string> seen;
  for (const auto& s : corpus.samples) {
    for (const auto& tok : tokenize(s.text)) {
      if (!seen.insert(tok).second) continue;
      Rng rng(derive_seed(seed, tok));
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.normal(0.0, 1.0);
      lex.add(tok, std::move(v));
    }
  }
  return lex;
}

std::vector<TimingRow> bench_augmenters(const Dataset& corpus, const BenchConfig& cfg) {
  if (corpus.samples.empty()) throw Error(ErrorCode::InvalidArgument, "bench needs a nonempty corpus");
  if (cfg.repetitions == 0) throw Error(ErrorCode::InvalidArgument, "bench needs at least one repetition");

  const textaug::Thesaurus empty_thesaurus;
  std::optional<textaug::Lexicon> synthesized;
  const textaug::Lexicon* lexicon = cfg.lexicon;
  std::optional<std::vector<LabeledVector>> vectors;

  std::vector<TimingRow> rows;
  for (const auto& name : cfg.methods) {
    std::function<void()> job;
    if (auto tm = textaug::parse_method(name)) {
      if (*tm == textaug::Method::W2V && !lexicon) {
        synthesized = synthesize_lexicon(corpus, 50, cfg.seed);
        lexicon = &*synthesized;
      }
      textaug::Config tc;
      tc.method = *tm;
      tc.rate = cfg.rate;
      tc.seed = cfg.seed;
      const textaug::Resources res{cfg.thesaurus ? cfg.thesaurus : &empty_thesaurus, lexicon};
      job = [&corpus, tc, res] { (void)textaug::augment_corpus(corpus, tc, res); };
    } else if (auto vm = vecaug::parse_method(name)) {
      if (!vectors) vectors = featurize_dataset(corpus, cfg.featurizer);
      vecaug::Config vc;
      vc.method = *vm;
      vc.rate = cfg.rate;
      vc.seed = cfg.seed;
      job = [&vectors, vc] { (void)vecaug::augment_vectors(*vectors, vc); };
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
    }

    job();  // warm-up
    std::vector<double> ms;
    for (std::size_t k = 0; k < cfg.repetitions; ++k) {
      const auto t0 = Clock::now();
      job();
      ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    const std::size_t mid = ms.size() / 2;
    const double median = ms.size() % 2 ? ms[mid] : 0.5 * (ms[mid - 1] + ms[mid]);
    rows.push_back({name, std::max(0.0, median), cfg.repetitions});
  }
  return rows;
}

std::span<const ReferenceTiming> reference_timings() {
  static constexpr ReferenceTiming kRows[] = {
      {"back_tr", 2385000.0}, {"sr", 2.26},          {"ri", 0.03},         {"rs", 0.03},
      {"rd", 0.03},           {"aeda", 0.03},        {"w2v", 145000.0},    {"gpt2", 2477000.0},
      {"tiny-imf", 216000.0}, {"bert-imf", 2173000.0}, {"dropout", 152000.0}, {"noise", 0.008},
      {"mixup", 0.007},
  };
  return kRows;
}

void write_timing_csv(const std::filesystem::path& path, std::span<const TimingRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "method,median_ms,repetitions,reference_ms\n";
  for (const auto& row : rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", row.median_ms);
    out << row.method << ',' << buf << ',' << row.repetitions << ',';
    const std::string ref_name = row.method == "vdrop" ? "dropout" : row.method;
    for (const auto& ref : reference_timings()) {
      if (ref_name == ref.method) {
        std::snprintf(buf, sizeof buf, "%g", ref.milliseconds);
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace augmentarium::runner
