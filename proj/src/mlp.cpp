#include "rankdnn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rankdnn/binary_io.hpp"
#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

constexpr io::Magic kMagic{'R', 'K', 'M', 'L'};
constexpr std::uint32_t kVersion = 1;

void validate_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw InvalidArgument("layer_dims needs at least 2 entries");
  if (dims.back() != 1) throw InvalidArgument("layer_dims must end in 1");
  for (std::size_t d : dims)
    if (d == 0) throw InvalidArgument("layer_dims entries must be positive");
}

double sigmoid(double z) {
  // Split on sign so exp never overflows.
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::size_t param_count(std::span<const std::size_t> layer_dims) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l)
    total += layer_dims[l + 1] * layer_dims[l] + layer_dims[l + 1];
  return total;
}

MlpModel::MlpModel(MlpConfig config) : config_(std::move(config)) {
  validate_dims(config_.layer_dims);
  if (!(config_.learning_rate > 0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(config_.momentum >= 0 && config_.momentum < 1)) throw InvalidArgument("momentum must be in [0, 1)");
  if (!(config_.weight_decay >= 0)) throw InvalidArgument("weight_decay must be >= 0");

  std::mt19937_64 rng(config_.seed);
  const auto& dims = config_.layer_dims;
  layers_.resize(dims.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    DenseLayer& layer = layers_[l];
    layer.weight.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = uniform(rng);
    layer.bias = Vector::Zero(out);
    layer.weight_velocity = Matrix::Zero(out, in);
    layer.bias_velocity = Vector::Zero(out);
  }
}

ForwardCache MlpModel::forward(const Matrix& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != input_dim())
    throw InvalidArgument("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                          std::to_string(input_dim()));
  if (!batch.allFinite()) throw InvalidArgument("batch contains non-finite values");

  ForwardCache cache;
  cache.inputs.reserve(layers_.size());
  cache.pre_activations.reserve(layers_.size());
  cache.inputs.push_back(batch);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    Matrix z = cache.inputs.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    cache.pre_activations.push_back(z);
    if (l + 1 < layers_.size()) cache.inputs.push_back(z.cwiseMax(0.0));
  }
  const Matrix& logits = cache.pre_activations.back();
  cache.probabilities.resize(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    cache.probabilities(r) =
        std::clamp(sigmoid(logits(r, 0)), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  return cache;
}

Vector MlpModel::predict(const Matrix& batch) const { return forward(batch).probabilities; }

double MlpModel::loss(const Matrix& batch, const Vector& targets) const {
  return bce_loss(predict(batch), targets);
}

Gradients MlpModel::backward(const ForwardCache& cache, const Vector& targets) const {
  const Eigen::Index n = cache.probabilities.size();
  if (targets.size() != n) throw InvalidArgument("target count does not match batch size");

  Gradients grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());

  // d(mean BCE)/d(logit) = (sigmoid(z) - y) / n.
  const Matrix& logits = cache.pre_activations.back();
  Matrix delta(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) delta(r, 0) = (sigmoid(logits(r, 0)) - targets(r)) / static_cast<double>(n);

  for (std::size_t l = layers_.size(); l-- > 0;) {
    grads.weight[l] = delta.transpose() * cache.inputs[l];
    grads.bias[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * layers_[l].weight;
    const Matrix& z = cache.pre_activations[l - 1];
    delta = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
  }
  return grads;
}

double MlpModel::train_step(const Matrix& batch, const Vector& targets) {
  ForwardCache cache = forward(batch);
  const double loss_value = bce_loss(cache.probabilities, targets);
  Gradients grads = backward(cache, targets);

  for (std::size_t l = layers_.size(); l-- > 0;)
    if (!grads.weight[l].allFinite() || !grads.bias[l].allFinite())
      throw TrainingDiverged(l, "non-finite gradient");

  double scale = 1.0;
  if (config_.clip_norm) {
    double sq = 0.0;
    for (std::size_t l = 0; l < layers_.size(); ++l)
      sq += grads.weight[l].squaredNorm() + grads.bias[l].squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > *config_.clip_norm) scale = *config_.clip_norm / norm;
  }

  const double mu = config_.momentum;
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    DenseLayer& layer = layers_[l];
    layer.weight_velocity = mu * layer.weight_velocity + scale * grads.weight[l] + wd * layer.weight;
    layer.bias_velocity = mu * layer.bias_velocity + scale * grads.bias[l] + wd * layer.bias;
    layer.weight -= lr * layer.weight_velocity;
    layer.bias -= lr * layer.bias_velocity;
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw TrainingDiverged(l, "non-finite parameter after update");
  }
  return loss_value;
}

std::size_t MlpModel::param_count() const noexcept { return rankdnn::param_count(config_.layer_dims); }

void MlpModel::set_learning_rate(double lr) {
  if (!(lr > 0)) throw InvalidArgument("learning_rate must be > 0");
  config_.learning_rate = lr;
}

void MlpModel::reset_velocity() {
  for (DenseLayer& layer : layers_) {
    layer.weight_velocity.setZero();
    layer.bias_velocity.setZero();
  }
}

bool MlpModel::same_parameters(const MlpModel& other) const {
  if (config_.layer_dims != other.config_.layer_dims) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l].weight != other.layers_[l].weight || layers_[l].bias != other.layers_[l].bias)
      return false;
  return true;
}

double bce_loss(const Vector& probabilities, const Vector& targets) {
  if (probabilities.size() != targets.size())
    throw InvalidArgument("bce_loss: " + std::to_string(probabilities.size()) + " probabilities vs " +
                          std::to_string(targets.size()) + " labels");
  if (probabilities.size() == 0) throw InvalidArgument("bce_loss: empty batch");
  double total = 0.0;
  for (Eigen::Index k = 0; k < probabilities.size(); ++k) {
    const double p = std::clamp(probabilities(k), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    const double y = targets(k);
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(probabilities.size());
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  const auto& dims = model.config().layer_dims;
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
  for (const DenseLayer& layer : model.layers()) {
    w.f32s(std::span<const double>(layer.weight.data(), static_cast<std::size_t>(layer.weight.size())));
    w.f32s(std::span<const double>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())));
  }
  w.save(path);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  auto r = io::ByteReader::load(path);
  r.expect_magic(kMagic);
  r.expect_version(kVersion);
  const std::uint32_t count = r.u32("layer_count");
  if (count < 2) throw FormatError("layer_count", "need at least 2 layer widths");
  MlpModel model;
  model.config_.layer_dims.resize(count);
  for (auto& d : model.config_.layer_dims) {
    d = r.u32("layer_dims");
    if (d == 0) throw FormatError("layer_dims", "widths must be positive");
  }
  if (model.config_.layer_dims.back() != 1) throw FormatError("layer_dims", "last width must be 1");
  r.require_payload(4 * param_count(model.config_.layer_dims));

  const auto& dims = model.config_.layer_dims;
  model.layers_.resize(dims.size() - 1);
  for (std::size_t l = 0; l < model.layers_.size(); ++l) {
    DenseLayer& layer = model.layers_[l];
    const auto in = static_cast<Eigen::Index>(dims[l]);
    const auto out = static_cast<Eigen::Index>(dims[l + 1]);
    layer.weight.resize(out, in);
    layer.bias.resize(out);
    r.f32s(std::span<double>(layer.weight.data(), static_cast<std::size_t>(layer.weight.size())));
    r.f32s(std::span<double>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())));
    layer.weight_velocity = Matrix::Zero(out, in);
    layer.bias_velocity = Vector::Zero(out);
  }
  return model;
}

}  // namespace rankdnn
