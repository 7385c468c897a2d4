#include "augmentarium/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "augmentarium/error.hpp"

namespace augmentarium::schedule {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Vanilla: return "vanilla";
    case Strategy::ADF: return "adf";
    case Strategy::ADM: return "adm";
    case Strategy::ADA: return "ada";
    case Strategy::CL: return "cl";
    case Strategy::AntiCL: return "anticl";
    case Strategy::RandCL: return "randcl";
    case Strategy::CCL: return "ccl";
    case Strategy::MCCL: return "mccl";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool needs_scores(Strategy s) {
  return s == Strategy::CL || s == Strategy::AntiCL || s == Strategy::CCL || s == Strategy::MCCL;
}

bool scorer_uses_augmented(Strategy s) { return needs_scores(s) && s != Strategy::MCCL; }

void ScheduleConfig::validate() const {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "T must be >= 1");
  if (!(ip > 0.0 && ip <= fp && fp <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < ip <= fp <= 1");
  }
  if (!(alpha_cycle > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha_cycle must be > 0");
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "q must be in (0, 1]");
}

std::vector<double> TrainingSchedule::fractions(std::size_t pool_size) const {
  std::vector<double> out;
  out.reserve(plans.size());
  for (const auto& p : plans) {
    out.push_back(static_cast<double>(p.sample_ids.size()) / static_cast<double>(pool_size));
  }
  return out;
}

std::vector<double> cycle_fractions(double ip, double fp, double alpha_cycle, std::size_t T) {
  constexpr double kTol = 1e-9;
  std::vector<double> out;
  out.reserve(T);
  bool rising = true;
  std::size_t step = 0;  // steps taken since the current phase's anchor
  for (std::size_t t = 0; t < T; ++t) {
    double f = rising ? ip + static_cast<double>(step) * alpha_cycle
                      : fp - static_cast<double>(step) * alpha_cycle;
    if (rising && f >= fp - kTol) {
      f = fp;
      rising = false;
      step = 0;
    } else if (!rising && f <= ip + kTol) {
      f = ip;
      rising = true;
      step = 0;
    }
    out.push_back(f);
    ++step;
  }
  return out;
}

namespace {

std::vector<std::string> concat(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::string> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Pool ids sorted by loss (ascending, or descending when hardest_first),
/// ties in pool order.
std::vector<std::string> rank_by_loss(const std::vector<std::string>& pool,
                                      const scoring::ScoreMap& scores, bool hardest_first) {
  std::vector<double> losses;
  losses.reserve(pool.size());
  for (const auto& id : pool) {
    auto it = scores.find(id);
    if (it == scores.end()) throw Error(ErrorCode::MissingScore, "no score for '" + id + "'");
    losses.push_back(it->second);
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return hardest_first ? losses[a] > losses[b] : losses[a] < losses[b];
  });
  std::vector<std::string> ranked;
  ranked.reserve(pool.size());
  for (std::size_t i : order) ranked.push_back(pool[i]);
  return ranked;
}

std::vector<std::string> prefix(const std::vector<std::string>& ranked, double fraction) {
  const std::size_t n = std::max<std::size_t>(1, scoring::ceil_count(fraction, ranked.size()));
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

TrainingSchedule build_schedule(const ScheduleConfig& cfg, std::span<const std::string> real_ids,
                                std::span<const std::string> aug_ids, const scoring::ScoreMap& scores,
                                RandomSource& rng) {
  cfg.validate();
  if (real_ids.empty()) throw Error(ErrorCode::EmptyPool, "no real samples");
  const std::vector<std::string> real(real_ids.begin(), real_ids.end());
  const std::vector<std::string> aug(aug_ids.begin(), aug_ids.end());
  const std::vector<std::string> mixed = concat(real_ids, aug_ids);
  const std::size_t T = cfg.T;
  const auto need_aug = [&] {
    if (aug.empty()) {
      throw Error(ErrorCode::EmptyPool, std::string(to_string(cfg.strategy)) + " needs augmented data");
    }
  };

  // Subset for each epoch, before shuffling.
  std::vector<const std::vector<std::string>*> per_epoch(T, &mixed);
  std::vector<std::vector<std::string>> owned;
  owned.reserve(T + 1);

  switch (cfg.strategy) {
    case Strategy::Vanilla:
      break;
    case Strategy::ADF:
    case Strategy::ADA: {
      need_aug();
      const std::size_t first = ceil_div(T, 2);
      const bool aug_first = cfg.strategy == Strategy::ADF;
      for (std::size_t t = 0; t < T; ++t) per_epoch[t] = (t < first) == aug_first ? &aug : &real;
      break;
    }
    case Strategy::ADM: {
      need_aug();
      const std::size_t block = ceil_div(T, 3);
      for (std::size_t t = 0; t < T; ++t) per_epoch[t] = (t >= block && t < 2 * block) ? &aug : &real;
      break;
    }
    case Strategy::CL:
    case Strategy::AntiCL:
    case Strategy::RandCL: {
      if (cfg.strategy == Strategy::RandCL) {
        std::vector<std::string> shuffled = mixed;
        shuffle(std::span<std::string>(shuffled), rng);
        owned.push_back(prefix(shuffled, cfg.q));
      } else {
        owned.push_back(prefix(rank_by_loss(mixed, scores, cfg.strategy == Strategy::AntiCL), cfg.q));
      }
      const std::size_t first = ceil_div(T, 2);
      for (std::size_t t = 0; t < first; ++t) per_epoch[t] = &owned.back();
      break;
    }
    case Strategy::CCL:
    case Strategy::MCCL: {
      const auto ranked = rank_by_loss(mixed, scores, false);
      const auto f = cycle_fractions(cfg.ip, cfg.fp, cfg.alpha_cycle, T);
      for (std::size_t t = 0; t < T; ++t) {
        owned.push_back(prefix(ranked, f[t]));
        per_epoch[t] = &owned.back();
      }
      break;
    }
  }

  TrainingSchedule out;
  out.plans.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    EpochPlan plan{t, *per_epoch[t]};
    shuffle(std::span<std::string>(plan.sample_ids), rng);
    out.plans.push_back(std::move(plan));
  }
  return out;
}

void save_schedule(const std::filesystem::path& path, const TrainingSchedule& schedule) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& p : schedule.plans) {
    out << nlohmann::json{{"epoch", p.epoch_index}, {"ids", p.sample_ids}}.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

PipelineResult train_with_strategy(std::span<const LabeledVector> real,
                                   std::span<const LabeledVector> aug, const PipelineConfig& cfg,
                                   std::uint64_t seed) {
  cfg.schedule.validate();
  if (real.empty()) throw Error(ErrorCode::EmptyPool, "no real samples");

  std::vector<LabeledVector> pool(real.begin(), real.end());
  pool.insert(pool.end(), aug.begin(), aug.end());
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(pool.size());
  std::vector<std::string> real_ids;
  std::vector<std::string> aug_ids;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!index.emplace(pool[i].id, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate id '" + pool[i].id + "' in training pool");
    }
    (i < real.size() ? real_ids : aug_ids).push_back(pool[i].id);
  }

  std::vector<std::size_t> dims{pool.front().x.dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(pool.front().y.num_classes());

  PipelineResult result;
  scoring::ScoreMap scores;
  if (needs_scores(cfg.schedule.strategy)) {
    const auto scorer_data = scorer_uses_augmented(cfg.schedule.strategy)
                                 ? std::span<const LabeledVector>(pool)
                                 : real;
    nnet::MLP scorer = nnet::MLP::init(dims, derive_seed(seed, "scorer-init"));
    Rng scorer_rng(derive_seed(seed, "scorer-shuffle"));
    nnet::train(scorer, scorer_data, cfg.train, scorer_rng, &result.scorer_trace);
    result.scores = scoring::score(scorer, pool);
    scores = scoring::to_map(result.scores);
  }

  Rng schedule_rng(derive_seed(seed, "schedule"));
  result.schedule = build_schedule(cfg.schedule, real_ids, aug_ids, scores, schedule_rng);

  result.model = nnet::MLP::init(dims, derive_seed(seed, "init"));
  nnet::Trainer trainer(result.model, cfg.train, &result.trace);
  std::vector<std::size_t> order;
  for (const auto& plan : result.schedule.plans) {
    order.clear();
    for (const auto& id : plan.sample_ids) order.push_back(index.at(id));
    trainer.run_epoch(pool, order);
  }
  return result;
}

PipelineResult mccl_pipeline(std::span<const LabeledVector> real, std::span<const LabeledVector> aug,
                             PipelineConfig cfg, std::uint64_t seed) {
  cfg.schedule.strategy = Strategy::MCCL;
  return train_with_strategy(real, aug, cfg, seed);
}

PipelineResult ccl_pipeline(std::span<const LabeledVector> real, std::span<const LabeledVector> aug,
                            PipelineConfig cfg, std::uint64_t seed) {
  cfg.schedule.strategy = Strategy::CCL;
  return train_with_strategy(real, aug, cfg, seed);
}

}  // namespace augmentarium::schedule
