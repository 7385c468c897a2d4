#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/error.hpp"
#include "augmentarium/schedule.hpp"
#include "augmentarium/stats.hpp"
#include "augmentarium/textaug.hpp"
#include "augmentarium/vecaug.hpp"

namespace augmentarium::runner {

/// Labeled samples plus, optionally, their imported vectors.
struct DataSource {
  Dataset dataset;
  /// Empty: vectors come from the built-in featurizer.
  std::optional<VectorTable> vectors;
};

/// Two isotropic unit-variance Gaussian blobs in `dim` dimensions whose
/// centres differ by `separation` along the first axis; classes alternate.
struct TwoBlobConfig {
  std::size_t n = 1000;
  std::size_t dim = 8;
  double separation = 2.0;
  std::uint64_t seed = 0;
};

DataSource make_two_blob(const TwoBlobConfig& cfg);

/// Produces augmented vectors from the real training split of one repetition.
using CustomAugmenter = std::function<std::vector<LabeledVector>(
    const Dataset& train, std::span<const LabeledVector> train_vectors, std::uint64_t seed)>;

/// Everything one experiment needs; every field has a key in the spec file
/// format (see parse_experiment_spec), except custom_augmenter.
struct ExperimentSpec {
  std::string name = "experiment";

  // Data.
  std::filesystem::path dataset_path;  // empty: synthetic two-blob data
  std::optional<std::filesystem::path> vectors_path;
  std::optional<int> num_classes;
  FeaturizerConfig featurizer;
  TwoBlobConfig synthetic;
  std::size_t train_n = 1000;
  std::size_t test_n = 4000;

  // Augmentation: none, a textaug or vecaug method name, or "adapter".
  std::string augmentation = "none";
  double aug_rate = 1.0;
  double text_alpha = 0.1;
  std::vector<std::string> punctuation_set = {".", ";", "?", ":", "!", ","};
  vecaug::Config vector_cfg;
  std::optional<std::filesystem::path> thesaurus_path;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> adapter_path;
  std::optional<double> filter_quantile;
  bool filter_per_class = false;

  // Training.
  schedule::PipelineConfig pipeline;

  // Protocol.
  std::size_t repetitions = 20;
  std::uint64_t base_seed = 0;
  double alpha_sig = stats::kDefaultSignificance;
  bool pooled_ttest = false;
  /// 0: AUGMENTARIUM_WORKERS, else hardware concurrency.
  std::size_t workers = 0;

  /// Replaces `augmentation` when set; reported under custom_name.
  CustomAugmenter custom_augmenter;
  std::string custom_name = "custom";

  void validate() const;
  /// Report label for the augmentation arm, e.g. "noise", "mccl+aeda",
  /// "sr[filter=0.5]".
  std::string method_label() const;
  std::string augmentation_name() const;
};

/// Reads the `key = value` spec format; `#` starts a comment.
ExperimentSpec parse_experiment_spec(std::string_view text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Wall-clock seconds per phase, summed over repetitions.
struct PhaseTimings {
  double prepare = 0.0;
  double augment = 0.0;
  double filter = 0.0;
  double train_baseline = 0.0;
  double train_method = 0.0;
};

struct ExperimentReport {
  std::string dataset;
  std::string method;  // ExperimentSpec::method_label()
  std::string strategy;
  std::string augmentation;
  double aug_rate = 0.0;
  std::vector<double> baseline_accuracies;
  std::vector<double> method_accuracies;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  double method_mean = 0.0;
  double method_std = 0.0;
  stats::Verdict verdict;
  double heatmap = 0.0;
  PhaseTimings timings;
};

/// Thrown when a repetition fails; carries the repetitions that completed.
class ExperimentAborted : public Error {
 public:
  ExperimentAborted(const Error& cause, ExperimentReport partial, std::size_t failed_repetition);

  const ExperimentReport& partial() const { return partial_; }
  std::size_t failed_repetition() const { return failed_repetition_; }
  ErrorCode cause_code() const { return cause_; }

 private:
  ExperimentReport partial_;
  std::size_t failed_repetition_;
  ErrorCode cause_;
};

/// Seed of repetition r: base_seed + r.
std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t r);

/// Loads the spec's files (or generates synthetic data).
DataSource load_data(const ExperimentSpec& spec);

/// Runs spec.repetitions paired repetitions; per repetition both arms share
/// the split and the model seeds. The baseline is Vanilla on real data only.
ExperimentReport run_experiment(const ExperimentSpec& spec);
ExperimentReport run_experiment(const ExperimentSpec& spec, const DataSource& data);

/// Resolves the worker count: explicit > AUGMENTARIUM_WORKERS > hardware.
std::size_t resolve_workers(std::size_t requested);

// ---------------------------------------------------------------------------
// Timing

struct TimingRow {
  std::string method;
  double median_ms = 0.0;
  std::size_t repetitions = 0;
};

struct BenchConfig {
  std::vector<std::string> methods = {"rd", "ri", "rs", "sr", "w2v", "aeda", "noise", "mixup", "vdrop"};
  std::size_t repetitions = 5;
  double rate = 1.0;
  std::uint64_t seed = 0;
  FeaturizerConfig featurizer;
  const textaug::Thesaurus* thesaurus = nullptr;
  /// When null, a lexicon over the corpus vocabulary is synthesized.
  const textaug::Lexicon* lexicon = nullptr;
};

/// Median wall-clock of augmenting the whole corpus once, per method; one
/// warm-up pass per method is not counted.
std::vector<TimingRow> bench_augmenters(const Dataset& corpus, const BenchConfig& cfg);

/// Seeded Gaussian vectors for every token in the corpus (deterministic per
/// word), used when no real lexicon is supplied.
textaug::Lexicon synthesize_lexicon(const Dataset& corpus, std::size_t dim, std::uint64_t seed);

/// Reference execution times (ms) from the original encoder-backed setup;
/// printed next to local measurements, never compared against them.
struct ReferenceTiming {
  const char* method;
  double milliseconds;
};
std::span<const ReferenceTiming> reference_timings();

void write_timing_csv(const std::filesystem::path& path, std::span<const TimingRow> rows);

// ---------------------------------------------------------------------------
// Reporting

/// `dataset,method,aug_rate,mean,std,p,outcome,heatmap_value`
std::string summary_csv(std::span<const ExperimentReport> reports);
/// `Method,Aug Rate,Wins,Losses`, grouped by (method, rate) over datasets.
std::string tally_csv(std::span<const ExperimentReport> reports);
/// Rows: method labels (with rate); columns: datasets.
std::string heatmap_csv(std::span<const ExperimentReport> reports);
/// `dataset,method,aug_rate,repetition,baseline_accuracy,method_accuracy`
std::string runs_csv(std::span<const ExperimentReport> reports);

/// Writes summary.csv, tally.csv, heatmap.csv and runs.csv into dir.
void write_reports(const std::filesystem::path& dir, std::span<const ExperimentReport> reports);

/// JSON persistence of a report (timings included) for later aggregation.
void save_report_json(const std::filesystem::path& path, const ExperimentReport& report);
ExperimentReport load_report_json(const std::filesystem::path& path);

/// "100%"
std::string format_rate(double rate);

}  // namespace augmentarium::runner
