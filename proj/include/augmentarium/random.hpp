#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <string_view>

namespace augmentarium {

/// Source of randomness consumed by augmenters and schedule builders.
///
/// Every discrete choice is made through uniform(): index(n) is
/// floor(uniform() * n), so a scripted sequence of uniform draws fully
/// determines the outcome of any operation that uses only discrete choices.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform draw in [0, 1).
  virtual double uniform() = 0;
  virtual double normal(double mean, double stddev) = 0;
  virtual double gamma(double shape) = 0;

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::size_t between(std::size_t lo, std::size_t hi);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }
};

/// 64-bit Mersenne Twister behind the RandomSource interface.
class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() override;
  double normal(double mean, double stddev) override;
  double gamma(double shape) override;

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates driven by RandomSource::index.
template <typename T>
void shuffle(std::span<T> items, RandomSource& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(items[i - 1], items[j]);
  }
}

/// FNV-1a over the bytes of s; stable across processes and platforms.
std::uint64_t stable_hash(std::string_view s);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic substream seed from (seed, key, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t index = 0);

}  // namespace augmentarium
