#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/nnet.hpp"

namespace augmentarium::scoring {

/// Per-sample loss under a scorer model; lower is easier.
struct EasinessScore {
  std::string sample_id;
  double loss = 0.0;

  bool operator==(const EasinessScore&) const = default;
};

using ScoreMap = std::unordered_map<std::string, double>;

/// Scores in input order.
std::vector<EasinessScore> score(const nnet::MLP& scorer, std::span<const LabeledVector> items);

/// Throws InvalidArgument on duplicate ids.
ScoreMap to_map(std::span<const EasinessScore> scores);

/// ceil(fraction * n), guarded against representation error (0.5 * 4 is 2,
/// never 3), clamped to [0, n].
std::size_t ceil_count(double fraction, std::size_t n);

/// Indices of the ceil(q * n) lowest losses, ties going to the earlier index,
/// returned in ascending index order.
std::vector<std::size_t> lowest_loss_indices(std::span<const double> losses, double q);

/// Keeps the ceil(q * |aug|) lowest-loss items (per class when per_class),
/// preserving input order. Throws MissingScore, InvalidArgument for q outside
/// (0, 1].
std::vector<LabeledVector> filter_by_loss(std::span<const LabeledVector> aug, const ScoreMap& scores,
                                          double q, bool per_class = false);
std::vector<Sample> filter_by_loss(std::span<const Sample> aug, const ScoreMap& scores, double q,
                                   bool per_class = false);

/// `sample_id,loss` with a header row.
void save_scores(const std::filesystem::path& path, std::span<const EasinessScore> scores);
std::vector<EasinessScore> load_scores(const std::filesystem::path& path);

}  // namespace augmentarium::scoring
