#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "augmentarium/error.hpp"
#include "augmentarium/schedule.hpp"

using namespace augmentarium;
using namespace augmentarium::schedule;

namespace {

std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// One period of the triangle wave, enumerated directly: ip, ip+a, ... below
// fp, then fp, then fp-a, ... above ip.
std::vector<double> period_table(double ip, double fp, double a) {
  const double tol = 1e-9;
  std::vector<double> period;
  for (int k = 0; ip + k * a < fp - tol; ++k) period.push_back(ip + k * a);
  period.push_back(fp);
  for (int k = 1; fp - k * a > ip + tol; ++k) period.push_back(fp - k * a);
  return period;
}

std::vector<double> oracle_wave(double ip, double fp, double a, std::size_t T) {
  const auto period = period_table(ip, fp, a);
  std::vector<double> out;
  for (std::size_t t = 0; t < T; ++t) out.push_back(period[t % period.size()]);
  return out;
}

std::vector<LabeledVector> blob(const std::string& prefix, std::size_t n, Origin origin, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    out.push_back({prefix + std::to_string(i),
                   FeatureVector(std::vector<double>{rng.normal(c ? 1.5 : -1.5, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)}),
                   SoftLabel::one_hot(c, 2), origin, origin == Origin::Real ? "" : "r0",
                   origin == Origin::Real ? "" : "noise"});
  }
  return out;
}

}  // namespace

TEST_CASE("triangle wave: worked example") {
  CHECK(cycle_fractions(0.25, 1.0, 0.25, 8) == std::vector<double>{0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.5});
}

TEST_CASE("triangle wave matches the period-table oracle and stays in bounds") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const double ip = 0.05 + 0.9 * rng.uniform();
    const double fp = ip + (1.0 - ip) * rng.uniform();
    const double a = 0.02 + 0.5 * rng.uniform();
    const std::size_t T = 1 + rng.index(60);
    const auto f = cycle_fractions(ip, fp, a, T);
    const auto expect = oracle_wave(ip, fp, a, T);
    REQUIRE(f.size() == T);
    for (std::size_t t = 0; t < T; ++t) {
      CHECK(f[t] == doctest::Approx(expect[t]).epsilon(1e-12));
      CHECK(f[t] >= ip - 1e-12);
      CHECK(f[t] <= fp + 1e-12);
      if (t > 0) {
        const double step = std::fabs(f[t] - f[t - 1]);
        const bool clipped = f[t] == ip || f[t] == fp || f[t - 1] == ip || f[t - 1] == fp;
        if (!clipped) CHECK(step == doctest::Approx(a).epsilon(1e-9));
      }
    }
  }
  CHECK(cycle_fractions(0.5, 0.5, 0.1, 4) == std::vector<double>{0.5, 0.5, 0.5, 0.5});
}

TEST_CASE("vanilla: every epoch covers the pool") {
  Rng rng(1);
  const auto real = ids("r", 5);
  const auto s = build_schedule({Strategy::Vanilla, 3}, real, {}, {}, rng);
  REQUIRE(s.plans.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(s.plans[t].epoch_index == t);
    CHECK(as_set(s.plans[t].sample_ids) == as_set(real));
  }
}

TEST_CASE("ADF, ADA and ADM phase layout") {
  const auto real = ids("r", 4);
  const auto aug = ids("a", 6);
  for (std::size_t T : {1u, 2u, 5u, 7u, 30u}) {
    Rng rng(T);
    const auto adf = build_schedule({Strategy::ADF, T}, real, aug, {}, rng);
    const auto ada = build_schedule({Strategy::ADA, T}, real, aug, {}, rng);
    const auto adm = build_schedule({Strategy::ADM, T}, real, aug, {}, rng);
    const std::size_t half = (T + 1) / 2;
    const std::size_t third = (T + 2) / 3;
    for (std::size_t t = 0; t < T; ++t) {
      CHECK(as_set(adf.plans[t].sample_ids) == as_set(t < half ? aug : real));
      CHECK(as_set(ada.plans[t].sample_ids) == as_set(t < half ? real : aug));
      const bool middle = t >= third && t < 2 * third;
      CHECK(as_set(adm.plans[t].sample_ids) == as_set(middle ? aug : real));
    }
  }
  Rng rng(0);
  CHECK_THROWS_AS(build_schedule({Strategy::ADF, 4}, real, {}, {}, rng), Error);
}

TEST_CASE("CL, AntiCL and RandCL subsets") {
  Rng rng(2);
  const std::vector<std::string> pool = {"a", "b", "c", "d"};
  const scoring::ScoreMap scores = {{"a", 0.1}, {"b", 0.2}, {"c", 0.9}, {"d", 1.0}};
  ScheduleConfig cfg{Strategy::CL, 4};
  const auto cl = build_schedule(cfg, {pool.begin(), pool.begin() + 2}, {pool.begin() + 2, pool.end()}, scores, rng);
  CHECK(as_set(cl.plans[0].sample_ids) == std::set<std::string>{"a", "b"});
  CHECK(as_set(cl.plans[1].sample_ids) == std::set<std::string>{"a", "b"});
  CHECK(as_set(cl.plans[2].sample_ids) == as_set(pool));
  CHECK(as_set(cl.plans[3].sample_ids) == as_set(pool));

  cfg.strategy = Strategy::AntiCL;
  const auto anti = build_schedule(cfg, pool, {}, scores, rng);
  CHECK(as_set(anti.plans[0].sample_ids) == std::set<std::string>{"c", "d"});

  cfg.strategy = Strategy::RandCL;
  const auto rand = build_schedule(cfg, pool, {}, {}, rng);
  CHECK(rand.plans[0].sample_ids.size() == 2);
  CHECK(as_set(rand.plans[0].sample_ids) == as_set(rand.plans[1].sample_ids));
  CHECK(as_set(rand.plans[2].sample_ids) == as_set(pool));

  cfg.strategy = Strategy::CL;
  CHECK_THROWS_AS(build_schedule(cfg, pool, {}, {{"a", 0.1}}, rng), Error);
}

TEST_CASE("CL epoch-0 set equals the lowest-loss prefix by brute force") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto real = ids("r", 3 + rng.index(20));
    const auto aug = ids("a", rng.index(20));
    scoring::ScoreMap scores;
    std::vector<std::pair<double, std::size_t>> ranked;
    std::vector<std::string> mixed = real;
    mixed.insert(mixed.end(), aug.begin(), aug.end());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      const double loss = static_cast<double>(rng.index(8));
      scores[mixed[i]] = loss;
      ranked.push_back({loss, i});
    }
    std::sort(ranked.begin(), ranked.end());
    const double q = 0.5;
    const std::size_t k = (mixed.size() + 1) / 2;
    std::set<std::string> expect;
    for (std::size_t i = 0; i < k; ++i) expect.insert(mixed[ranked[i].second]);
    ScheduleConfig cfg{Strategy::CL, 6};
    cfg.q = q;
    const auto s = build_schedule(cfg, real, aug, scores, rng);
    CHECK(as_set(s.plans[0].sample_ids) == expect);
  }
}

TEST_CASE("CCL and MCCL: plan sizes follow the wave over the loss ranking") {
  Rng rng(7);
  const auto real = ids("r", 10);
  const auto aug = ids("a", 10);
  scoring::ScoreMap scores;
  for (std::size_t i = 0; i < 10; ++i) {
    scores[real[i]] = 0.1 * static_cast<double>(i);
    scores[aug[i]] = 0.05 + 0.1 * static_cast<double>(i);
  }
  for (Strategy st : {Strategy::CCL, Strategy::MCCL}) {
    ScheduleConfig cfg{st, 8};
    const auto s = build_schedule(cfg, real, aug, scores, rng);
    const std::vector<std::size_t> sizes = {5, 10, 15, 20, 15, 10, 5, 10};
    for (std::size_t t = 0; t < 8; ++t) {
      REQUIRE(s.plans[t].sample_ids.size() == sizes[t]);
      // Every kept id is at most as hard as every dropped id.
      double kept_max = -1.0;
      for (const auto& id : s.plans[t].sample_ids) kept_max = std::max(kept_max, scores.at(id));
      const auto kept = as_set(s.plans[t].sample_ids);
      for (const auto& [id, loss] : scores) {
        if (!kept.contains(id)) CHECK(loss >= kept_max);
      }
    }
  }
}

TEST_CASE("every strategy emits exactly T nonempty plans") {
  const auto real = ids("r", 7);
  const auto aug = ids("a", 5);
  scoring::ScoreMap scores;
  for (const auto& id : real) scores[id] = 1.0;
  for (const auto& id : aug) scores[id] = 2.0;
  for (Strategy st : kAllStrategies) {
    for (std::size_t T : {1u, 3u, 10u, 30u}) {
      Rng rng(T);
      const auto s = build_schedule({st, T}, real, aug, scores, rng);
      CHECK(s.plans.size() == T);
      for (const auto& p : s.plans) CHECK_FALSE(p.sample_ids.empty());
      Rng again(T);
      CHECK(build_schedule({st, T}, real, aug, scores, again) == s);
    }
  }
}

TEST_CASE("config validation and parsing") {
  ScheduleConfig cfg;
  cfg.ip = 0.8;
  cfg.fp = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.alpha_cycle = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.T = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  for (Strategy s : kAllStrategies) CHECK(parse_strategy(to_string(s)) == s);
  CHECK(scorer_uses_augmented(Strategy::CCL));
  CHECK_FALSE(scorer_uses_augmented(Strategy::MCCL));
}

TEST_CASE("MCCL scorer sees real data only; CCL scorer sees augmented data") {
  const auto real = blob("r", 40, Origin::Real, 1);
  const auto aug = blob("a", 40, Origin::Augmented, 2);
  PipelineConfig cfg;
  cfg.schedule.T = 6;
  cfg.train.epochs = 4;
  const auto mccl = mccl_pipeline(real, aug, cfg, 3);
  std::vector<LabeledVector> pool = real;
  pool.insert(pool.end(), aug.begin(), aug.end());
  CHECK(mccl.scorer_trace.epochs.size() == 4);
  CHECK_FALSE(mccl.scorer_trace.contains_augmented(pool));
  CHECK(mccl.trace.contains_augmented(pool));
  CHECK(mccl.scores.size() == pool.size());
  CHECK(mccl.schedule.plans.size() == 6);

  const auto ccl = ccl_pipeline(real, aug, cfg, 3);
  CHECK(ccl.scorer_trace.contains_augmented(pool));

  // Fractions equal the CCL enumeration under the same cfg.
  const auto f = cycle_fractions(cfg.schedule.ip, cfg.schedule.fp, cfg.schedule.alpha_cycle, 6);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(mccl.schedule.plans[t].sample_ids.size() == scoring::ceil_count(f[t], pool.size()));
  }
}

TEST_CASE("with no augmentation CCL and MCCL schedules coincide") {
  const auto real = blob("r", 30, Origin::Real, 4);
  PipelineConfig cfg;
  cfg.schedule.T = 5;
  cfg.train.epochs = 3;
  const auto a = mccl_pipeline(real, {}, cfg, 9);
  const auto b = ccl_pipeline(real, {}, cfg, 9);
  CHECK(a.schedule == b.schedule);
  CHECK(a.model == b.model);
}

TEST_CASE("pipelines are deterministic and M2 is freshly initialized") {
  const auto real = blob("r", 30, Origin::Real, 5);
  const auto aug = blob("a", 30, Origin::Augmented, 6);
  PipelineConfig cfg;
  cfg.schedule.T = 4;
  cfg.train.epochs = 2;
  for (Strategy st : kAllStrategies) {
    cfg.schedule.strategy = st;
    const auto a = train_with_strategy(real, aug, cfg, 11);
    const auto b = train_with_strategy(real, aug, cfg, 11);
    CHECK(a.model == b.model);
    CHECK(a.schedule == b.schedule);
    CHECK(a.trace.epochs.size() == 4);
  }
  // Vanilla on real data with no augmentation presents only real ids.
  cfg.schedule.strategy = Strategy::Vanilla;
  const auto base = train_with_strategy(real, {}, cfg, 1);
  CHECK(base.scorer_trace.epochs.empty());
  CHECK_FALSE(base.trace.contains_augmented(aug));
}

TEST_CASE("schedule export writes one JSON line per epoch") {
  Rng rng(0);
  const auto s = build_schedule({Strategy::Vanilla, 3}, ids("r", 2), {}, {}, rng);
  const auto path = std::filesystem::temp_directory_path() / "augmentarium_schedule.jsonl";
  save_schedule(path, s);
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(line.find("\"epoch\":" + std::to_string(n)) != std::string::npos);
    ++n;
  }
  CHECK(n == 3);
}
