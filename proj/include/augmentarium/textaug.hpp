#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/random.hpp"

namespace augmentarium::textaug {

enum class Method { RD, RI, RS, SR, W2V, AEDA };

inline constexpr Method kAllMethods[] = {Method::RD, Method::RI, Method::RS,
                                         Method::SR, Method::W2V, Method::AEDA};

/// Lowercase CLI/report name: rd, ri, rs, sr, w2v, aeda.
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct Config {
  Method method = Method::RD;
  /// Per-word operation rate.
  double alpha = 0.1;
  /// Size of the augmented set as a multiple of the real set (3.0 = 300%).
  double rate = 1.0;
  std::uint64_t seed = 0;
  /// AEDA marks.
  std::vector<std::string> punctuation_set = {".", ";", "?", ":", "!", ","};

  void validate() const;
};

/// Headword -> synonyms. Synonyms equal to the headword are dropped.
class Thesaurus {
 public:
  Thesaurus() = default;

  /// `word<TAB>syn1,syn2,...` per line.
  static Thesaurus load(const std::filesystem::path& path);

  void add(const std::string& word, std::vector<std::string> synonyms);
  /// nullptr when the word has no (non-trivial) synonyms.
  const std::vector<std::string>* find(const std::string& word) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

/// Word vectors for nearest-neighbour replacement.
class Lexicon {
 public:
  Lexicon() = default;

  /// word2vec text format: `<count> <dim>` header, then `word v1 ... v_dim`.
  static Lexicon load(const std::filesystem::path& path);

  /// Later duplicates of a word are ignored.
  void add(const std::string& word, std::vector<double> vec);

  bool contains(const std::string& word) const { return index_.contains(word); }
  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return words_.empty(); }
  const std::string& word(std::size_t i) const { return words_[i]; }

  /// Highest-cosine word other than `word` itself; ties go to the earlier
  /// lexicon entry. nullopt when `word` is out of vocabulary or has no
  /// usable neighbour.
  std::optional<std::string> nearest(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::vector<double> unit_;  // row-major, L2-normalized (zero rows stay zero)
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
};

/// Number of word operations for a text of `len` tokens:
/// 0 when alpha == 0, else max(1, round(alpha * len)).
std::size_t operation_count(double alpha, std::size_t len);

using Tokens = std::vector<std::string>;

// All operations throw EmptyInput for an empty token list. Random choices are
// made through RandomSource::index/uniform in the order documented per
// operation, so a scripted source replays them exactly.

/// One uniform() per token (deleted when < alpha); if everything was deleted,
/// one index(len) picks the survivor.
Tokens random_deletion(std::span<const std::string> tokens, double alpha, RandomSource& rng);

/// Per insertion: index(#tokens with synonyms) picks the word, index(#synonyms)
/// the synonym, index(len + 1) the insertion point. Without any synonyms the
/// word choice is index(len) over all tokens and the word itself is inserted.
Tokens random_insertion(std::span<const std::string> tokens, double alpha,
                        const Thesaurus& thesaurus, RandomSource& rng);

/// Per swap: index(len - 1) picks i, then tokens i and i+1 are exchanged.
Tokens random_swap(std::span<const std::string> tokens, double alpha, RandomSource& rng);

/// Partial Fisher-Yates over candidate positions (index(k - i) per pick),
/// then index(#synonyms) per picked position.
Tokens synonym_replacement(std::span<const std::string> tokens, double alpha,
                           const Thesaurus& thesaurus, RandomSource& rng);

/// Position choice as in synonym_replacement; the replacement is the
/// deterministic cosine-nearest lexicon word. Throws EmptyLexicon.
Tokens w2v_replacement(std::span<const std::string> tokens, double alpha, const Lexicon& lexicon,
                       RandomSource& rng);

/// between(1, max(1, len / 3)) picks n; then per mark: index(#marks) picks the
/// mark and index(current_len + 1) the insertion point.
Tokens aeda(std::span<const std::string> tokens, std::span<const std::string> punctuation_set,
            RandomSource& rng);

struct Resources {
  const Thesaurus* thesaurus = nullptr;
  const Lexicon* lexicon = nullptr;
};

/// Dispatch on cfg.method. RI/SR need a thesaurus, W2V a lexicon.
Tokens augment_tokens(std::span<const std::string> tokens, const Config& cfg,
                      const Resources& res, RandomSource& rng);

/// Augmented id: `<parent_id>~<method>-<replica>`.
std::string augmented_id(std::string_view parent_id, std::string_view method, std::size_t replica);

/// Applies cfg.method to round(rate * |real|) parents drawn uniformly with
/// replacement. Each (parent, replica) pair gets its own RNG substream
/// derived from (seed, parent_id, replica); the result is sorted by parent id
/// then replica. Parents whose text has no tokens are copied unchanged.
std::vector<Sample> augment_corpus(const Dataset& real, const Config& cfg, const Resources& res);

/// Adapter JSONL `{"parent_id", "method", "text"}` from external augmenters.
/// Throws UnknownParent / ParseError.
std::vector<Sample> import_adapter_output(const std::filesystem::path& path, const Dataset& real);

}  // namespace augmentarium::textaug
