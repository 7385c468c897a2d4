#include "augmentarium/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "augmentarium/error.hpp"

namespace augmentarium::nnet {

std::vector<std::size_t> default_dims(std::size_t input_dim, std::size_t num_classes) {
  return {input_dim, 64, 64, num_classes};
}

MLP::MLP(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw Error(ErrorCode::InvalidArgument, "an MLP needs at least two layer sizes");
  if (std::find(dims_.begin(), dims_.end(), 0) != dims_.end()) {
    throw Error(ErrorCode::InvalidArgument, "layer sizes must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

MLP MLP::zeros(std::vector<std::size_t> dims) { return MLP(std::move(dims)); }

MLP MLP::init(std::vector<std::size_t> dims, std::uint64_t seed) {
  MLP m(std::move(dims));
  Rng rng(seed);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const double fan_in = static_cast<double>(m.dims_[l]);
    const double fan_out = static_cast<double>(m.dims_[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t n = m.dims_[l + 1] * m.dims_[l];
    for (std::size_t k = 0; k < n; ++k) {
      m.params_[m.offsets_[l] + k] = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
  return m;
}

double& MLP::weight(std::size_t layer, std::size_t out, std::size_t in) {
  return params_[offsets_[layer] + out * dims_[layer] + in];
}
double MLP::weight(std::size_t layer, std::size_t out, std::size_t in) const {
  return params_[offsets_[layer] + out * dims_[layer] + in];
}
double& MLP::bias(std::size_t layer, std::size_t out) { return params_[bias_offset(layer) + out]; }
double MLP::bias(std::size_t layer, std::size_t out) const { return params_[bias_offset(layer) + out]; }

namespace {

void softmax_inplace(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

/// Activations of every layer (input first, probabilities last).
std::vector<std::vector<double>> forward_all(const MLP& m, std::span<const double> x) {
  const auto& dims = m.dims();
  std::vector<std::vector<double>> acts;
  acts.reserve(dims.size());
  acts.emplace_back(x.begin(), x.end());
  const auto params = m.parameters();
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const double* w = params.data() + m.weight_offset(l);
    const double* b = params.data() + m.bias_offset(l);
    const auto& a = acts.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = s;
    }
    if (l + 1 < m.num_layers()) {
      for (auto& v : z) v = std::max(v, 0.0);
    } else {
      softmax_inplace(z);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

void check_input(const MLP& m, std::size_t dim) {
  if (dim != m.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input has dim " + std::to_string(dim) +
                                                  ", model expects " + std::to_string(m.input_dim()));
  }
}

void check_target(const MLP& m, const SoftLabel& y) {
  if (y.num_classes() != m.num_classes()) {
    throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(y.num_classes()) +
                                                  " classes, model has " + std::to_string(m.num_classes()));
  }
}

}  // namespace

SoftLabel MLP::forward(std::span<const double> x) const {
  check_input(*this, x.size());
  auto acts = forward_all(*this, x);
  return SoftLabel{std::move(acts.back())};
}

double cross_entropy(const SoftLabel& predicted, const SoftLabel& target) {
  double loss = 0.0;
  for (std::size_t c = 0; c < target.probs.size(); ++c) {
    if (target.probs[c] != 0.0) loss -= target.probs[c] * std::log(std::max(predicted.probs[c], kProbFloor));
  }
  return loss;
}

double loss_and_gradient(const MLP& m, std::span<const LabeledVector> data,
                         std::span<const std::size_t> indices, std::vector<double>& grad) {
  grad.assign(m.parameters().size(), 0.0);
  if (indices.empty()) return 0.0;
  const auto& dims = m.dims();
  const auto params = m.parameters();
  const std::size_t L = m.num_layers();
  double total = 0.0;
  for (std::size_t idx : indices) {
    const auto& item = data[idx];
    check_input(m, item.x.dim());
    check_target(m, item.y);
    const auto acts = forward_all(m, item.x.values);
    const auto& p = acts.back();
    total += cross_entropy(SoftLabel{p}, item.y);

    // dLoss/dz for the output layer: p * sum(y) - y
    const double ysum = std::accumulate(item.y.probs.begin(), item.y.probs.end(), 0.0);
    std::vector<double> delta(p.size());
    for (std::size_t c = 0; c < p.size(); ++c) delta[c] = p[c] * ysum - item.y.probs[c];

    for (std::size_t l = L; l-- > 0;) {
      const std::size_t in = dims[l];
      const std::size_t out = dims[l + 1];
      const auto& a = acts[l];
      double* gw = grad.data() + m.weight_offset(l);
      double* gb = grad.data() + m.bias_offset(l);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* row = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) row[i] += d * a[i];
      }
      if (l == 0) break;
      const double* w = params.data() + m.weight_offset(l);
      std::vector<double> prev(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
      }
      // ReLU gate of the previous layer's output.
      for (std::size_t i = 0; i < in; ++i) {
        if (a[i] <= 0.0) prev[i] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (auto& g : grad) g *= scale;
  return total * scale;
}

// ---------------------------------------------------------------------------

AdamState::AdamState(std::size_t num_params, AdamParams params)
    : hyper_(params), m_(num_params, 0.0), v_(num_params, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Adam state does not match parameter count");
  }
  ++t_;
  const double b1 = hyper_.beta1;
  const double b2 = hyper_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= hyper_.lr * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
  }
}

// ---------------------------------------------------------------------------

bool TrainingTrace::contains_augmented(std::span<const LabeledVector> pool) const {
  std::unordered_set<std::string_view> augmented;
  for (const auto& item : pool) {
    if (!item.is_real()) augmented.insert(item.id);
  }
  for (const auto& epoch : epochs) {
    for (const auto& id : epoch) {
      if (augmented.contains(id)) return true;
    }
  }
  return false;
}

std::size_t TrainingTrace::total_presentations() const {
  std::size_t n = 0;
  for (const auto& e : epochs) n += e.size();
  return n;
}

Trainer::Trainer(MLP& model, const TrainConfig& cfg, TrainingTrace* trace)
    : model_(model),
      batch_size_(cfg.batch_size),
      adam_(model.parameters().size(), cfg.adam),
      trace_(trace) {
  if (batch_size_ == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be positive");
}

double Trainer::run_epoch(std::span<const LabeledVector> data, std::span<const std::size_t> order) {
  if (trace_) {
    auto& ids = trace_->epochs.emplace_back();
    ids.reserve(order.size());
    for (std::size_t i : order) ids.push_back(data[i].id);
  }
  double sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size_) {
    const std::size_t n = std::min(batch_size_, order.size() - start);
    const double loss = loss_and_gradient(model_, data, order.subspan(start, n), grad_);
    if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteLoss, "training loss is not finite");
    adam_.step(model_.parameters(), grad_);
    if (!all_finite(model_.parameters())) {
      throw Error(ErrorCode::NonFiniteLoss, "parameters became non-finite");
    }
    sum += loss * static_cast<double>(n);
  }
  return order.empty() ? 0.0 : sum / static_cast<double>(order.size());
}

std::vector<double> train(MLP& m, std::span<const LabeledVector> data, const TrainConfig& cfg,
                          RandomSource& rng, TrainingTrace* trace) {
  if (cfg.epochs > 0 && data.empty()) throw Error(ErrorCode::InvalidArgument, "no training data");
  Trainer trainer(m, cfg, trace);
  std::vector<std::size_t> order(data.size());
  std::vector<double> losses;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span<std::size_t>(order), rng);
    losses.push_back(trainer.run_epoch(data, order));
  }
  return losses;
}

std::vector<double> per_sample_losses(const MLP& m, std::span<const LabeledVector> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& item : data) {
    check_target(m, item.y);
    out.push_back(cross_entropy(m.forward(item.x), item.y));
  }
  return out;
}

double accuracy(const MLP& m, std::span<const LabeledVector> data) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy of an empty set");
  std::size_t correct = 0;
  for (const auto& item : data) {
    if (m.forward(item.x).argmax() == item.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const MLP& m) {
  nlohmann::json j = {{"format", "augmentarium-mlp"},
                      {"version", 1},
                      {"dims", m.dims()},
                      {"params", std::vector<double>(m.parameters().begin(), m.parameters().end())}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump() << '\n';
}

MLP load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  std::vector<std::size_t> dims;
  std::vector<double> params;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "augmentarium-mlp") {
      throw Error(ErrorCode::ParseError, path.string() + ": not an MLP checkpoint");
    }
    dims = j.at("dims").get<std::vector<std::size_t>>();
    params = j.at("params").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  MLP m = MLP::zeros(std::move(dims));
  if (params.size() != m.parameters().size()) {
    throw Error(ErrorCode::DimensionMismatch, path.string() + ": parameter count does not match dims");
  }
  std::copy(params.begin(), params.end(), m.parameters().begin());
  return m;
}

}  // namespace augmentarium::nnet
