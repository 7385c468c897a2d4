#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "augmentarium/corpus.hpp"
#include "augmentarium/random.hpp"

namespace augmentarium::nnet {

/// [input, 64, 64, classes]
std::vector<std::size_t> default_dims(std::size_t input_dim, std::size_t num_classes);

/// Fully connected network with ReLU hidden layers and a softmax output.
///
/// All weights and biases live in one flat array; layer l occupies
/// W_l (out x in, row-major) followed by b_l (out).
class MLP {
 public:
  MLP() = default;

  /// Glorot-uniform weights, zero biases. Deterministic per seed.
  static MLP init(std::vector<std::size_t> dims, std::uint64_t seed);
  /// All parameters zero.
  static MLP zeros(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t num_classes() const { return dims_.back(); }
  std::size_t num_layers() const { return dims_.size() - 1; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  double& weight(std::size_t layer, std::size_t out, std::size_t in);
  double weight(std::size_t layer, std::size_t out, std::size_t in) const;
  double& bias(std::size_t layer, std::size_t out);
  double bias(std::size_t layer, std::size_t out) const;
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + dims_[layer + 1] * dims_[layer];
  }

  /// Class probabilities. Throws DimensionMismatch.
  SoftLabel forward(std::span<const double> x) const;
  SoftLabel forward(const FeatureVector& v) const { return forward(std::span<const double>(v.values)); }

  bool operator==(const MLP&) const = default;

 private:
  explicit MLP(std::vector<std::size_t> dims);

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

inline constexpr double kProbFloor = 1e-12;

/// -sum_c y_c * log(max(p_c, 1e-12))
double cross_entropy(const SoftLabel& predicted, const SoftLabel& target);

/// Mean cross-entropy over data[indices]; gradient (same layout as
/// MLP::parameters) is written to grad, averaged over the batch.
double loss_and_gradient(const MLP& m, std::span<const LabeledVector> data,
                         std::span<const std::size_t> indices, std::vector<double>& grad);

struct AdamParams {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState(std::size_t num_params, AdamParams params = {});

  /// One bias-corrected Adam update of params in place.
  void step(std::span<double> params, std::span<const double> grads);

  std::size_t timestep() const { return t_; }
  const AdamParams& hyper() const { return hyper_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamParams hyper_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  AdamParams adam;
};

/// Ids presented to a model, per epoch, in presentation order.
struct TrainingTrace {
  std::vector<std::vector<std::string>> epochs;

  bool contains_augmented(std::span<const LabeledVector> pool) const;
  std::size_t total_presentations() const;
};

/// Drives mini-batch Adam over caller-ordered epochs.
class Trainer {
 public:
  Trainer(MLP& model, const TrainConfig& cfg, TrainingTrace* trace = nullptr);

  /// One pass over data[order] in batches of cfg.batch_size. Returns the mean
  /// loss of the epoch. Throws NonFiniteLoss.
  double run_epoch(std::span<const LabeledVector> data, std::span<const std::size_t> order);

 private:
  MLP& model_;
  std::size_t batch_size_;
  AdamState adam_;
  TrainingTrace* trace_;
  std::vector<double> grad_;
};

/// cfg.epochs epochs over all of data, reshuffled each epoch from rng.
/// Returns the per-epoch mean losses.
std::vector<double> train(MLP& m, std::span<const LabeledVector> data, const TrainConfig& cfg,
                          RandomSource& rng, TrainingTrace* trace = nullptr);

std::vector<double> per_sample_losses(const MLP& m, std::span<const LabeledVector> data);

/// Fraction of items whose argmax prediction equals the argmax of the target.
double accuracy(const MLP& m, std::span<const LabeledVector> data);

/// JSON checkpoint: {"format": "augmentarium-mlp", "version": 1, "dims": [...], "params": [...]}.
void save_checkpoint(const std::filesystem::path& path, const MLP& m);
MLP load_checkpoint(const std::filesystem::path& path);

}  // namespace augmentarium::nnet
