#include "augmentarium/vecaug.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "augmentarium/error.hpp"
#include "augmentarium/textaug.hpp"

namespace augmentarium::vecaug {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Noise: return "noise";
    case Method::Mixup: return "mixup";
    case Method::VecDropout: return "vdrop";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void Config::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  if (!(mixup_alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "mixup_alpha must be > 0");
  if (!(drop_p >= 0.0 && drop_p < 1.0)) throw Error(ErrorCode::InvalidArgument, "drop_p must be in [0, 1)");
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate must be positive");
}

FeatureVector gaussian_noise(const FeatureVector& v, double sigma, RandomSource& rng) {
  FeatureVector out = v;
  if (sigma == 0.0) return out;
  for (auto& x : out.values) x += rng.normal(0.0, sigma);
  return out;
}

std::pair<FeatureVector, SoftLabel> mixup(const FeatureVector& v1, const SoftLabel& y1,
                                          const FeatureVector& v2, const SoftLabel& y2,
                                          double lambda) {
  if (v1.dim() != v2.dim()) throw Error(ErrorCode::DimensionMismatch, "mixup vector dims differ");
  if (y1.num_classes() != y2.num_classes()) {
    throw Error(ErrorCode::DimensionMismatch, "mixup label sizes differ");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
  const double mu = 1.0 - lambda;
  FeatureVector x(v1.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) x.values[i] = lambda * v1.values[i] + mu * v2.values[i];
  SoftLabel y;
  y.probs.resize(y1.num_classes());
  for (std::size_t c = 0; c < y.probs.size(); ++c) y.probs[c] = lambda * y1.probs[c] + mu * y2.probs[c];
  return {std::move(x), std::move(y)};
}

FeatureVector vec_dropout(const FeatureVector& v, double drop_p, RandomSource& rng) {
  if (!(drop_p >= 0.0 && drop_p < 1.0)) throw Error(ErrorCode::InvalidArgument, "drop_p must be in [0, 1)");
  FeatureVector out = v;
  if (drop_p == 0.0) return out;
  const double scale = 1.0 / (1.0 - drop_p);
  for (auto& x : out.values) x = rng.uniform() < drop_p ? 0.0 : x * scale;
  return out;
}

std::vector<LabeledVector> augment_vectors(std::span<const LabeledVector> real, const Config& cfg) {
  cfg.validate();
  if (real.empty()) return {};
  const std::size_t dim = real.front().x.dim();
  for (const auto& r : real) {
    if (r.x.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "input vectors differ in dim");
  }
  const auto count = static_cast<std::size_t>(std::llround(cfg.rate * static_cast<double>(real.size())));

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  {
    Rng pick(derive_seed(cfg.seed, "parents"));
    std::vector<std::size_t> replicas(real.size(), 0);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t p = pick.index(real.size());
      jobs.emplace_back(p, replicas[p]++);
    }
  }
  std::sort(jobs.begin(), jobs.end(), [&](const auto& a, const auto& b) {
    const auto& ia = real[a.first].id;
    const auto& ib = real[b.first].id;
    return ia != ib ? ia < ib : a.second < b.second;
  });

  std::vector<std::vector<std::size_t>> by_class;
  if (cfg.method == Method::Mixup && cfg.within_class) {
    for (std::size_t i = 0; i < real.size(); ++i) {
      const auto c = static_cast<std::size_t>(real[i].label());
      if (by_class.size() <= c) by_class.resize(c + 1);
      by_class[c].push_back(i);
    }
  }

  const std::string method(to_string(cfg.method));
  std::vector<LabeledVector> out;
  out.reserve(jobs.size());
  for (const auto& [p, replica] : jobs) {
    const LabeledVector& parent = real[p];
    Rng rng(derive_seed(cfg.seed, parent.id, replica));
    LabeledVector item;
    item.origin = Origin::Augmented;
    item.method = method;
    item.parent_id = parent.id;
    item.y = parent.y;
    switch (cfg.method) {
      case Method::Noise:
        item.x = gaussian_noise(parent.x, cfg.sigma, rng);
        break;
      case Method::VecDropout:
        item.x = vec_dropout(parent.x, cfg.drop_p, rng);
        break;
      case Method::Mixup: {
        std::size_t q = 0;
        if (cfg.within_class) {
          const auto& pool = by_class[static_cast<std::size_t>(parent.label())];
          q = pool[rng.index(pool.size())];
        } else {
          q = rng.index(real.size());
        }
        const double lambda = rng.beta(cfg.mixup_alpha, cfg.mixup_alpha);
        const LabeledVector& partner = real[q];
        auto mixed = mixup(parent.x, parent.y, partner.x, partner.y, lambda);
        item.x = std::move(mixed.first);
        item.y = std::move(mixed.second);
        // Provenance follows the input whose class wins the mixed label.
        const LabeledVector& heavy = parent.label() == item.y.argmax() ? parent : partner;
        item.parent_id = heavy.parent_id.empty() ? heavy.id : heavy.parent_id;
        break;
      }
    }
    item.id = textaug::augmented_id(parent.id, method, replica);
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace augmentarium::vecaug
