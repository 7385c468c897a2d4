#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/random.hpp"

namespace augmentarium::vecaug {

enum class Method { Noise, Mixup, VecDropout };

inline constexpr Method kAllMethods[] = {Method::Noise, Method::Mixup, Method::VecDropout};

/// noise, mixup, vdrop
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct Config {
  Method method = Method::Noise;
  double sigma = 1.0;
  /// Beta(mixup_alpha, mixup_alpha) concentration for the mixing weight.
  double mixup_alpha = 0.2;
  double drop_p = 0.1;
  double rate = 1.0;
  std::uint64_t seed = 0;
  /// Draw mixup partners from the parent's class only.
  bool within_class = false;

  void validate() const;
};

/// v + N(0, sigma^2) per component.
FeatureVector gaussian_noise(const FeatureVector& v, double sigma, RandomSource& rng);

/// Convex combination lambda * first + (1 - lambda) * second of vectors and
/// labels. Throws DimensionMismatch.
std::pair<FeatureVector, SoftLabel> mixup(const FeatureVector& v1, const SoftLabel& y1,
                                          const FeatureVector& v2, const SoftLabel& y2,
                                          double lambda);

/// Inverted dropout: each component zeroed with probability drop_p (one
/// uniform() per component, dropped when < drop_p), survivors scaled by
/// 1 / (1 - drop_p).
FeatureVector vec_dropout(const FeatureVector& v, double drop_p, RandomSource& rng);

/// Applies cfg.method to round(rate * |real|) parents drawn uniformly with
/// replacement; substreams and output order follow textaug::augment_corpus.
///
/// A mixup sample takes as parent whichever input's class wins the argmax of
/// the mixed label, so its hard label matches its parent's label.
std::vector<LabeledVector> augment_vectors(std::span<const LabeledVector> real, const Config& cfg);

}  // namespace augmentarium::vecaug
