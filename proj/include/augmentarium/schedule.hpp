#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/nnet.hpp"
#include "augmentarium/random.hpp"
#include "augmentarium/scoring.hpp"

namespace augmentarium::schedule {

enum class Strategy { Vanilla, ADF, ADM, ADA, CL, AntiCL, RandCL, CCL, MCCL };

inline constexpr Strategy kAllStrategies[] = {
    Strategy::Vanilla, Strategy::ADF,    Strategy::ADM, Strategy::ADA,  Strategy::CL,
    Strategy::AntiCL,  Strategy::RandCL, Strategy::CCL, Strategy::MCCL,
};

/// vanilla, adf, adm, ada, cl, anticl, randcl, ccl, mccl
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

/// Whether the strategy orders data by easiness scores.
bool needs_scores(Strategy s);

struct ScheduleConfig {
  Strategy strategy = Strategy::Vanilla;
  /// Total epochs; every strategy emits exactly this many epoch plans.
  std::size_t T = 30;
  /// Cycle bounds and step for CCL/MCCL, as fractions of the pool.
  double ip = 0.25;
  double fp = 1.0;
  double alpha_cycle = 0.25;
  /// Subset fraction for CL/AntiCL/RandCL.
  double q = 0.5;

  void validate() const;
};

struct EpochPlan {
  std::size_t epoch_index = 0;
  std::vector<std::string> sample_ids;

  bool operator==(const EpochPlan&) const = default;
};

struct TrainingSchedule {
  std::vector<EpochPlan> plans;

  /// |plan| / pool_size per epoch.
  std::vector<double> fractions(std::size_t pool_size) const;
  bool operator==(const TrainingSchedule&) const = default;
};

/// Triangle wave of subset fractions: starts at ip, rises by alpha_cycle per
/// epoch up to fp (clipped), falls back to ip (clipped) and repeats.
std::vector<double> cycle_fractions(double ip, double fp, double alpha_cycle, std::size_t T);

/// Builds the per-epoch subsets of a strategy over the mixed pool
/// (real ids followed by aug ids). Each epoch's subset is shuffled from rng.
/// Throws MissingScore, EmptyPool.
TrainingSchedule build_schedule(const ScheduleConfig& cfg, std::span<const std::string> real_ids,
                                std::span<const std::string> aug_ids, const scoring::ScoreMap& scores,
                                RandomSource& rng);

/// JSONL, one `{"epoch": t, "ids": [...]}` per line.
void save_schedule(const std::filesystem::path& path, const TrainingSchedule& schedule);

struct PipelineConfig {
  ScheduleConfig schedule;
  /// Batch size and Adam settings for both models; epochs is the scorer's
  /// training length (the trained model always gets schedule.T epochs).
  nnet::TrainConfig train;
  /// Hidden layer widths.
  std::vector<std::size_t> hidden = {64, 64};
};

struct PipelineResult {
  nnet::MLP model;
  TrainingSchedule schedule;
  /// What the trained model saw.
  nnet::TrainingTrace trace;
  /// What the scorer saw; empty when the strategy needs no scores.
  nnet::TrainingTrace scorer_trace;
  std::vector<scoring::EasinessScore> scores;
};

/// Which data the easiness scorer is trained on for a strategy: real only for
/// MCCL, real + augmented for CL, AntiCL and CCL.
bool scorer_uses_augmented(Strategy s);

/// Trains a fresh model on real + aug under cfg.schedule.strategy. When the
/// strategy needs scores, a scorer is trained first (see
/// scorer_uses_augmented) and the whole pool is scored with it.
///
/// All randomness derives from seed; with aug empty and the Vanilla strategy
/// the result is the plain baseline model.
PipelineResult train_with_strategy(std::span<const LabeledVector> real,
                                   std::span<const LabeledVector> aug, const PipelineConfig& cfg,
                                   std::uint64_t seed);

/// Scorer on real only, cyclical curriculum over real + aug.
PipelineResult mccl_pipeline(std::span<const LabeledVector> real, std::span<const LabeledVector> aug,
                             PipelineConfig cfg, std::uint64_t seed);

/// Scorer on real + aug, cyclical curriculum over real + aug.
PipelineResult ccl_pipeline(std::span<const LabeledVector> real, std::span<const LabeledVector> aug,
                            PipelineConfig cfg, std::uint64_t seed);

}  // namespace augmentarium::schedule
