// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "augmentarium/error.hpp"
#include "augmentarium/nnet.hpp"
#include "augmentarium/random.hpp"
#include "augmentarium/runner.hpp"
#include "augmentarium/schedule.hpp"
#include "augmentarium/scoring.hpp"
#include "augmentarium/stats.hpp"
#include "augmentarium/textaug.hpp"
#include "augmentarium/vecaug.hpp"

namespace aug = augmentarium;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradStep = 1e-5;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradBudgetS = 5.0;
constexpr double kAdamTol = 1e-9;
constexpr double kAugBudgetS = 10.0;
constexpr double kWelchPTol = 5e-4;
constexpr double kExactTol = 1e-12;
constexpr double kJitterMargin = 0.01;
constexpr double kProtocolBudgetS = 180.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

double mean_loss(const aug::nnet::MLP& m, std::span<const aug::LabeledVector> data) {
  const auto losses = aug::nnet::per_sample_losses(m, data);
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  aug::Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto m = aug::nnet::MLP::init({5, 16, 16, 3}, 100 + trial);
    std::vector<aug::LabeledVector> data;
    for (int i = 0; i < 12; ++i) {
      std::vector<double> x(5);
      for (auto& v : x) v = rng.normal(0.0, 1.5);
      aug::SoftLabel y;
      if (trial % 2 == 0) {
        y = aug::SoftLabel::one_hot(static_cast<int>(rng.index(3)), 3);
      } else {
        const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        y.probs = {a / (a + b + c), b / (a + b + c), c / (a + b + c)};
      }
      data.push_back({"g" + std::to_string(i), aug::FeatureVector(std::move(x)), y, aug::Origin::Real, "", ""});
    }
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> grad;
    aug::nnet::loss_and_gradient(m, data, idx, grad);
    auto params = m.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = params[k];
      params[k] = saved + kGradStep;
      const double up = mean_loss(m, data);
      params[k] = saved - kGradStep;
      const double down = mean_loss(m, data);
      params[k] = saved;
      const double numeric = (up - down) / (2.0 * kGradStep);
      const double rel = std::fabs(grad[k] - numeric) / std::max(1e-6, std::fabs(grad[k]) + std::fabs(numeric));
      worst = std::max(worst, rel);
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kGradRelTol && secs < kGradBudgetS, fmt("worst rel err %.2e, %.2f s", worst, secs)};
}

Outcome adam_step() {
  aug::nnet::AdamState adam(1);
  std::vector<double> w = {1.0};
  const std::vector<double> g = {2.0};  // d/dw w^2 at w = 1
  adam.step(w, g);
  const double err = std::fabs(w[0] - 0.999);
  return {err <= kAdamTol, fmt("w = %.12f, |w - 0.999| = %.2e", w[0], err)};
}

// ---------------------------------------------------------------------------

struct TextWorld {
  std::vector<std::string> vocab;
  aug::textaug::Thesaurus thesaurus;
  aug::textaug::Lexicon lexicon;
};

TextWorld make_world(aug::Rng& rng) {
  TextWorld w;
  for (int i = 0; i < 60; ++i) w.vocab.push_back("w" + std::to_string(i));
  for (int i = 0; i < 60; i += 2) {
    w.thesaurus.add(w.vocab[i], {w.vocab[(i + 7) % 60], w.vocab[(i + 13) % 60]});
  }
  for (const auto& word : w.vocab) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.normal(0.0, 1.0);
    w.lexicon.add(word, v);
  }
  return w;
}

std::vector<std::string> random_tokens(aug::Rng& rng, const TextWorld& w) {
  std::vector<std::string> t(1 + rng.index(25));
  for (auto& tok : t) tok = w.vocab[rng.index(w.vocab.size())];
  return t;
}

Outcome augmenter_contracts() {
  using aug::textaug::Method;
  const auto t0 = Clock::now();
  aug::Rng rng(77);
  const TextWorld world = make_world(rng);
  const std::vector<std::string> marks = {".", ";", "?", ":", "!", ","};
  const aug::textaug::Resources res{&world.thesaurus, &world.lexicon};
  std::vector<std::string> failures;
  const auto fail = [&](const std::string& what) {
    if (failures.size() < 5) failures.push_back(what);
  };

  for (Method method : aug::textaug::kAllMethods) {
    const std::string name(aug::textaug::to_string(method));
    aug::textaug::Config cfg;
    cfg.method = method;
    cfg.alpha = 0.3;
    for (int i = 0; i < 1000; ++i) {
      const auto tokens = random_tokens(rng, world);
      aug::Rng op_rng(aug::derive_seed(5, name, static_cast<std::uint64_t>(i)));
      const auto out = aug::textaug::augment_tokens(tokens, cfg, res, op_rng);
      switch (method) {
        case Method::RD:
          if (out.empty()) fail("rd produced an empty text");
          break;
        case Method::RS: {
          auto a = tokens, b = out;
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          if (a != b) fail("rs changed the token multiset");
          break;
        }
        case Method::SR:
        case Method::W2V:
          if (out.size() != tokens.size()) fail(name + " changed the length");
          break;
        case Method::AEDA: {
          const std::size_t n = out.size() - tokens.size();
          const std::size_t hi = std::max<std::size_t>(1, tokens.size() / 3);
          if (n < 1 || n > hi) fail("aeda inserted " + std::to_string(n) + " marks");
          std::vector<std::string> stripped;
          for (const auto& t : out) {
            if (std::find(marks.begin(), marks.end(), t) == marks.end()) stripped.push_back(t);
          }
          if (stripped != tokens) fail("aeda deletion-recovery failed");
          break;
        }
        case Method::RI:
          if (out.size() < tokens.size()) fail("ri shortened the text");
          break;
      }
    }

    // Labels through the corpus path: 1000 parents.
    aug::Dataset ds{"contracts", 3, {}};
    for (int i = 0; i < 1000; ++i) {
      std::string text;
      for (const auto& t : random_tokens(rng, world)) text += t + " ";
      ds.samples.push_back({"p" + std::to_string(i), text, static_cast<int>(rng.index(3)), aug::Origin::Real, "", ""});
    }
    std::map<std::string, int> parent_label;
    for (const auto& s : ds.samples) parent_label[s.id] = s.label;
    cfg.seed = 9;
    for (const auto& s : aug::textaug::augment_corpus(ds, cfg, res)) {
      if (s.label != parent_label.at(s.parent_id)) fail(name + " relabelled " + s.id);
    }
  }

  // Vector methods keep the parent label (mixup: the heavier side's label).
  std::vector<aug::LabeledVector> real;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.normal(0.0, 1.0);
    real.push_back({"v" + std::to_string(i), aug::FeatureVector(std::move(x)),
                    aug::SoftLabel::one_hot(static_cast<int>(rng.index(3)), 3), aug::Origin::Real, "", ""});
  }
  std::map<std::string, int> vec_label;
  for (const auto& r : real) vec_label[r.id] = r.label();
  for (auto vm : aug::vecaug::kAllMethods) {
    aug::vecaug::Config vcfg;
    vcfg.method = vm;
    vcfg.seed = 4;
    for (const auto& a : aug::vecaug::augment_vectors(real, vcfg)) {
      if (a.label() != vec_label.at(a.parent_id)) fail(std::string(aug::vecaug::to_string(vm)) + " label drift");
    }
  }

  const double secs = seconds_since(t0);
  std::string detail = fmt("6 text methods x 1000 inputs, %.2f s", secs);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty() && secs < kAugBudgetS, detail};
}

// ---------------------------------------------------------------------------

Outcome filtering_exactness() {
  aug::Rng rng(31337);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(200);
    const int k = 1 + static_cast<int>(rng.index(1000));
    const double q = k / 1000.0;
    std::vector<aug::LabeledVector> items;
    aug::scoring::ScoreMap scores;
    std::vector<std::pair<double, std::size_t>> oracle;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "f" + std::to_string(i);
      // Half of the trials use coarse losses to exercise ties.
      const double loss = trial % 2 ? rng.uniform() * 5.0 : static_cast<double>(rng.index(6));
      items.push_back({id, aug::FeatureVector(std::vector<double>{0.0}), aug::SoftLabel::one_hot(0, 2), aug::Origin::Augmented, "p", "x"});
      scores[id] = loss;
      oracle.push_back({loss, i});
    }
    const auto kept = aug::scoring::filter_by_loss(items, scores, q);
    // Exact integer ceiling of k * n / 1000.
    const std::size_t expect_n = (static_cast<std::size_t>(k) * n + 999) / 1000;
    std::sort(oracle.begin(), oracle.end());
    std::set<std::string> expect;
    for (std::size_t i = 0; i < expect_n; ++i) expect.insert(items[oracle[i].second].id);

    std::set<std::string> got;
    double kept_max = -1.0;
    for (const auto& it : kept) {
      got.insert(it.id);
      kept_max = std::max(kept_max, scores.at(it.id));
    }
    bool ok = kept.size() == expect_n && got == expect;
    for (const auto& it : items) {
      if (!got.contains(it.id) && scores.at(it.id) < kept_max) ok = false;
    }
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " of 1000 loss sets disagree with the sort oracle"};
}

// ---------------------------------------------------------------------------

std::vector<double> enumerated_wave(double ip, double fp, double a, std::size_t T) {
  const double tol = 1e-9;
  std::vector<double> period;
  for (int k = 0; ip + k * a < fp - tol; ++k) period.push_back(ip + k * a);
  period.push_back(fp);
  for (int k = 1; fp - k * a > ip + tol; ++k) period.push_back(fp - k * a);
  std::vector<double> out;
  for (std::size_t t = 0; t < T; ++t) out.push_back(period[t % period.size()]);
  return out;
}

std::vector<aug::LabeledVector> blob_items(const std::string& prefix, std::size_t n, aug::Origin origin,
                                           aug::Rng& rng) {
  std::vector<aug::LabeledVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    const bool real = origin == aug::Origin::Real;
    out.push_back({prefix + std::to_string(i),
                   aug::FeatureVector(std::vector<double>{rng.normal(c ? 1.0 : -1.0, 1.0), rng.normal(0.0, 1.0)}),
                   aug::SoftLabel::one_hot(c, 2), origin, real ? "" : "r0", real ? "" : "noise"});
  }
  return out;
}

Outcome schedule_correctness() {
  using namespace aug::schedule;
  aug::Rng rng(99);
  std::size_t wave_bad = 0, size_bad = 0, count_bad = 0;
  std::vector<std::string> real_ids, aug_ids;
  for (int i = 0; i < 23; ++i) real_ids.push_back("r" + std::to_string(i));
  for (int i = 0; i < 17; ++i) aug_ids.push_back("a" + std::to_string(i));
  aug::scoring::ScoreMap scores;
  for (const auto& id : real_ids) scores[id] = rng.uniform();
  for (const auto& id : aug_ids) scores[id] = rng.uniform();
  const std::size_t pool = real_ids.size() + aug_ids.size();

  for (int c = 0; c < 50; ++c) {
    ScheduleConfig cfg;
    cfg.ip = 0.05 + 0.6 * rng.uniform();
    cfg.fp = cfg.ip + (1.0 - cfg.ip) * rng.uniform();
    cfg.alpha_cycle = 0.05 + 0.3 * rng.uniform();
    cfg.T = 1 + rng.index(40);
    const auto wave = cycle_fractions(cfg.ip, cfg.fp, cfg.alpha_cycle, cfg.T);
    const auto expect = enumerated_wave(cfg.ip, cfg.fp, cfg.alpha_cycle, cfg.T);
    bool same = wave.size() == expect.size();
    for (std::size_t t = 0; same && t < wave.size(); ++t) same = std::fabs(wave[t] - expect[t]) <= kExactTol;
    if (!same) ++wave_bad;

    for (Strategy st : {Strategy::CCL, Strategy::MCCL}) {
      cfg.strategy = st;
      aug::Rng srng(static_cast<std::uint64_t>(c));
      const auto s = build_schedule(cfg, real_ids, aug_ids, scores, srng);
      for (std::size_t t = 0; t < s.plans.size() && t < expect.size(); ++t) {
        const auto want = static_cast<std::size_t>(std::max(1.0, std::ceil(expect[t] * pool - 1e-9)));
        if (s.plans[t].sample_ids.size() != want) ++size_bad;
      }
    }
    for (Strategy st : kAllStrategies) {
      cfg.strategy = st;
      aug::Rng srng(static_cast<std::uint64_t>(c));
      if (build_schedule(cfg, real_ids, aug_ids, scores, srng).plans.size() != cfg.T) ++count_bad;
    }
  }

  aug::Rng drng(5);
  const auto real = blob_items("real", 60, aug::Origin::Real, drng);
  const auto augmented = blob_items("aug", 120, aug::Origin::Augmented, drng);
  PipelineConfig pcfg;
  pcfg.schedule.T = 8;
  pcfg.train.epochs = 8;
  pcfg.hidden = {16};
  const auto r = mccl_pipeline(real, augmented, pcfg, 17);
  std::size_t leaked = 0;
  std::set<std::string> aug_set;
  for (const auto& a : augmented) aug_set.insert(a.id);
  for (const auto& epoch : r.scorer_trace.epochs) {
    for (const auto& id : epoch) leaked += aug_set.contains(id);
  }
  const bool scorer_ran = !r.scorer_trace.epochs.empty();

  const bool ok = wave_bad == 0 && size_bad == 0 && count_bad == 0 && leaked == 0 && scorer_ran;
  std::ostringstream d;
  d << "wave mismatches " << wave_bad << "/50, plan-size mismatches " << size_bad << ", wrong plan counts "
    << count_bad << ", augmented ids in MCCL scorer trace " << leaked;
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------

Outcome statistics_oracle() {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> b = {2, 3, 4, 5, 6};
  const auto r = aug::stats::welch_ttest(a, b);
  bool ok = std::fabs(r.t + 1.0) <= kExactTol && std::fabs(r.df - 8.0) <= kExactTol &&
            std::fabs(r.p - 0.3466) <= kWelchPTol;
  const auto same = aug::stats::welch_ttest(a, a);
  ok = ok && same.p == 1.0;

  const aug::stats::RunSet base{{0.70, 0.72, 0.71, 0.69, 0.70}};
  const aug::stats::RunSet up{{0.73, 0.74, 0.72, 0.71, 0.73}};
  const aug::stats::RunSet down{{0.66, 0.69, 0.68, 0.67, 0.70}};
  const auto vu = aug::stats::compare(up, base);
  const auto vd = aug::stats::compare(down, base);
  const double hu = aug::stats::heatmap_value(vu);
  const double hd = aug::stats::heatmap_value(vd);
  ok = ok && std::fabs(hu - (1.0 - vu.p_value)) <= kExactTol && std::fabs(hd + (1.0 - vd.p_value)) <= kExactTol;
  ok = ok && aug::stats::heatmap_value(aug::stats::compare(base, base)) == 0.0;
  return {ok, fmt("t = %.6f, df = %.6f, p = %.6f", r.t, r.df, r.p) +
                  fmt("; identical p = %g; heatmap %+.4f / %+.4f", same.p, hu, hd)};
}

// ---------------------------------------------------------------------------

aug::runner::ExperimentSpec protocol_spec(std::uint64_t base_seed) {
  aug::runner::ExperimentSpec spec;
  spec.name = "two_blob";
  spec.synthetic = {2000, 8, 2.56, 11};
  spec.train_n = 200;
  spec.test_n = 800;
  spec.repetitions = 20;
  spec.alpha_sig = 0.05;
  spec.base_seed = base_seed;
  spec.pipeline.schedule.T = 30;
  spec.pipeline.train.epochs = 30;
  return spec;
}

Outcome protocol_shape() {
  const auto t0 = Clock::now();
  std::ostringstream d;
  bool ok = true;

  {
    auto spec = protocol_spec(0);
    spec.augmentation = "none";
    const auto r = aug::runner::run_experiment(spec);
    const bool tie = r.verdict.outcome == aug::stats::Outcome::Tie;
    ok = ok && tie;
    d << "(a) no-op: " << aug::stats::to_string(r.verdict.outcome) << " p=" << r.verdict.p_value;
  }
  {
    auto spec = protocol_spec(0);
    spec.aug_rate = 3.0;
    spec.custom_name = "label_flip";
    spec.custom_augmenter = [](const aug::Dataset&, std::span<const aug::LabeledVector> train, std::uint64_t) {
      std::vector<aug::LabeledVector> out;
      for (const auto& v : train) {
        for (std::size_t k = 0; k < 3; ++k) {
          aug::LabeledVector f = v;
          f.id = aug::textaug::augmented_id(v.id, "flip", k);
          f.origin = aug::Origin::Augmented;
          f.method = "flip";
          f.parent_id = v.id;
          f.y = aug::SoftLabel::one_hot(1 - v.label(), 2);
          out.push_back(std::move(f));
        }
      }
      return out;
    };
    const auto r = aug::runner::run_experiment(spec);
    const bool loss = r.verdict.outcome == aug::stats::Outcome::Loss;
    ok = ok && loss;
    d << "; (b) flip 300%: " << aug::stats::to_string(r.verdict.outcome) << " p=" << r.verdict.p_value;
  }
  {
    d << "; (c) mccl+noise 100%:";
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto spec = protocol_spec(1000 * (s + 1));
      spec.augmentation = "noise";
      spec.aug_rate = 1.0;
      spec.vector_cfg.sigma = 0.2;
      spec.pipeline.schedule.strategy = aug::schedule::Strategy::MCCL;
      const auto r = aug::runner::run_experiment(spec);
      const bool good = r.verdict.outcome != aug::stats::Outcome::Loss &&
                        r.method_mean >= r.baseline_mean - kJitterMargin;
      ok = ok && good;
      d << ' ' << aug::stats::to_string(r.verdict.outcome)
        << fmt("(%.4f vs %.4f)", r.method_mean, r.baseline_mean);
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kProtocolBudgetS;
  d << fmt("; %.1f s", secs);
  return {ok, d.str()};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome reproducibility() {
  auto spec = protocol_spec(42);
  spec.synthetic.n = 600;
  spec.train_n = 100;
  spec.test_n = 300;
  spec.repetitions = 6;
  spec.augmentation = "mixup";
  spec.aug_rate = 2.0;
  spec.filter_quantile = 0.5;
  spec.pipeline.schedule.strategy = aug::schedule::Strategy::MCCL;
  spec.pipeline.schedule.T = 10;
  spec.pipeline.train.epochs = 10;

  const auto root = fs::temp_directory_path() / "augmentarium_acceptance";
  fs::remove_all(root);
  std::vector<aug::runner::ExperimentReport> first, second;
  spec.workers = 1;
  first.push_back(aug::runner::run_experiment(spec));
  spec.workers = 4;
  second.push_back(aug::runner::run_experiment(spec));
  aug::runner::write_reports(root / "run1", first);
  aug::runner::write_reports(root / "run2", second);
  std::size_t differ = 0;
  for (const char* f : {"summary.csv", "tally.csv", "heatmap.csv", "runs.csv"}) {
    const auto a = slurp(root / "run1" / f);
    if (a.empty() || a != slurp(root / "run2" / f)) ++differ;
  }
  return {differ == 0, std::to_string(differ) + " of 4 report CSVs differ between runs"};
}

Outcome timing_report() {
  aug::Dataset corpus{"bench", 2, {}};
  aug::Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::string text;
    const std::size_t len = 5 + rng.index(20);
    for (std::size_t k = 0; k < len; ++k) text += "tok" + std::to_string(rng.index(300)) + " ";
    corpus.samples.push_back({"b" + std::to_string(i), text, i % 2, aug::Origin::Real, "", ""});
  }
  aug::textaug::Thesaurus th;
  for (int w = 0; w < 300; w += 3) th.add("tok" + std::to_string(w), {"tok" + std::to_string(w + 1)});
  aug::runner::BenchConfig cfg;
  cfg.repetitions = 3;
  cfg.thesaurus = &th;
  const auto rows = aug::runner::bench_augmenters(corpus, cfg);
  const std::vector<std::string> want = {"rd", "ri", "rs", "sr", "w2v", "aeda", "noise", "mixup", "vdrop"};
  bool ok = rows.size() == want.size();
  std::ostringstream d;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    ok = rows[i].method == want[i] && rows[i].median_ms >= 0.0 && std::isfinite(rows[i].median_ms);
    d << (i ? ", " : "") << rows[i].method << fmt(" %.3f ms", rows[i].median_ms);
  }
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient-oracle", gradient_oracle},
      {"adam-unit-step", adam_step},
      {"augmenter-contracts", augmenter_contracts},
      {"filtering-exactness", filtering_exactness},
      {"schedule-correctness", schedule_correctness},
      {"statistics-oracle", statistics_oracle},
      {"protocol-shape", protocol_shape},
      {"reproducibility", reproducibility},
      {"timing-report", timing_report},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
