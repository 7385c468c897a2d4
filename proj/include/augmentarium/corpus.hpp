#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace augmentarium {

enum class Origin { Real, Augmented };

std::string_view to_string(Origin origin);

/// One labeled text instance with provenance.
///
/// Real samples have empty method and parent_id; augmented samples name the
/// generating method and the real sample they derive from.
struct Sample {
  std::string id;
  std::string text;
  int label = 0;
  Origin origin = Origin::Real;
  std::string method;
  std::string parent_id;

  bool is_real() const { return origin == Origin::Real; }
  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::string name;
  int num_classes = 1;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;

  /// Throws InvalidArgument when labels fall outside [0, num_classes), ids
  /// repeat, or provenance fields are inconsistent.
  void validate() const;
  std::vector<std::size_t> class_counts() const;
};

struct FeatureVector {
  std::vector<double> values;

  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> v) : values(std::move(v)) {}
  explicit FeatureVector(std::size_t dim) : values(dim, 0.0) {}

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

double l2_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

/// Class distribution; hard labels are one-hot lifted.
struct SoftLabel {
  std::vector<double> probs;

  static SoftLabel one_hot(int label, int num_classes);
  std::size_t num_classes() const { return probs.size(); }
  /// Lowest index among the maxima.
  int argmax() const;
  bool operator==(const SoftLabel&) const = default;
};

/// Training/evaluation unit: a vector, its (possibly soft) target, and the
/// provenance of the sample it came from.
struct LabeledVector {
  std::string id;
  FeatureVector x;
  SoftLabel y;
  Origin origin = Origin::Real;
  std::string parent_id;
  std::string method;

  int label() const { return y.argmax(); }
  bool is_real() const { return origin == Origin::Real; }
};

// ---------------------------------------------------------------------------
// Text handling

/// Lowercase, then keep the first 300 Unicode scalar values. Invalid UTF-8
/// sequences are replaced by U+FFFD.
std::string preprocess(std::string_view text);

inline constexpr std::size_t kMaxChars = 300;

std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
bool is_unicode_space(char32_t c);

/// Split preprocess(text) on Unicode whitespace. Punctuation stays attached.
std::vector<std::string> tokenize(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

// ---------------------------------------------------------------------------
// Splitting

/// Stratified train/test split with largest-remainder per-class quotas.
///
/// Each split's per-class quota is computed independently from the class
/// distribution of ds; ties in the fractional parts go to the lower class
/// index. Within a class, samples are drawn by a seeded shuffle; outputs keep
/// the original dataset order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, std::size_t train_n,
                                             std::size_t test_n, std::uint64_t seed);

/// Largest-remainder apportionment of total over the given weights.
std::vector<std::size_t> largest_remainder_quotas(std::span<const std::size_t> counts,
                                                  std::size_t total);

// ---------------------------------------------------------------------------
// Built-in featurizer: signed feature hashing over whitespace tokens.

struct FeaturizerConfig {
  std::size_t dim = 512;
  std::uint64_t salt = 0;
};

FeatureVector featurize(std::string_view text, const FeaturizerConfig& cfg = {});

/// Lift every sample to a LabeledVector using the built-in featurizer.
std::vector<LabeledVector> featurize_dataset(const Dataset& ds, const FeaturizerConfig& cfg);

// ---------------------------------------------------------------------------
// File formats

Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_classes = {});
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

using VectorTable = std::unordered_map<std::string, FeatureVector>;

/// Reads `{"id": ..., "vec": [...]}` records. Throws DimensionMismatch when a
/// record's length differs from the first record's.
VectorTable import_vectors(const std::filesystem::path& path);

/// As above, and additionally rejects ids that are not in ds (UnknownId).
VectorTable import_vectors(const std::filesystem::path& path, const Dataset& ds);

/// Pairs every sample of ds with its vector. Throws MissingVector.
std::vector<LabeledVector> attach_vectors(const Dataset& ds, const VectorTable& table);

/// Writes vector JSONL; with_labels adds label/probs/provenance fields.
void save_vectors(const std::filesystem::path& path, std::span<const LabeledVector> items,
                  bool with_labels);

/// Reads vector JSONL written with labels (probs or label required). Without
/// num_classes the count is inferred from probs lengths or the largest label.
std::vector<LabeledVector> load_labeled_vectors(const std::filesystem::path& path,
                                                std::optional<int> num_classes = {});

/// Reads every line of a UTF-8 text file, tolerating a trailing newline and
/// CRLF endings.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace augmentarium
